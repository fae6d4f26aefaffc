#pragma once

#include "tabsynth/schema.hpp"

#include <filesystem>
#include <optional>

namespace tabsynth {

struct TableOptions {
  char delimiter = ',';
  /// Which header column holds the label; defaults to the last column when
  /// parsing without a schema.
  std::optional<std::string> label_column;
  /// Sensitive designation applied when parsing without a schema.
  std::optional<SensitiveSpec> sensitive;
};

struct ParseReport {
  Index rows_kept = 0;
  Index rows_dropped = 0;  // rows containing a "?" cell
};

struct ParsedTable {
  Dataset dataset;
  ParseReport report;
};

/// Reads a delimited text file with a header row. With a schema, cell values
/// are resolved against the declared domains; without one, domains are
/// inferred as the sorted distinct observed values per column.
ParsedTable parse_table(const std::filesystem::path& path, const std::optional<Schema>& schema,
                        const TableOptions& options = {});

void write_table(const Dataset& d, const std::filesystem::path& path, char delimiter = ',');

}  // namespace tabsynth
