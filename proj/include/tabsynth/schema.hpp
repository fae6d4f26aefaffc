#pragma once

#include "tabsynth/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tabsynth {

enum class ColumnKind { categorical, ordinal };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::vector<std::string> domain;  // ordered, distinct category strings

  Index cardinality() const { return static_cast<Index>(domain.size()); }

  /// Index of a category value in the domain, or -1 when absent.
  Index index_of(std::string_view value) const;
};

/// Designation of the sensitive column: b is the unprivileged value,
/// w the privileged one.
struct SensitiveSpec {
  std::string column;
  std::string unprivileged;
  std::string privileged;
};

struct LabelSpec {
  std::string column;
  std::string negative;  // maps to 0
  std::string positive;  // maps to 1
};

struct Schema {
  std::vector<ColumnSpec> columns;  // attribute columns in file order
  LabelSpec label;
  std::optional<SensitiveSpec> sensitive;

  Index attribute_count() const { return static_cast<Index>(columns.size()); }
  Index column_index(std::string_view name) const;  // -1 when absent

  void validate() const;

  /// Deterministic serialization; also the hashing preimage for model binding.
  std::string canonical_text() const;
  std::string sha256_hex() const;
};

Schema parse_schema_text(std::string_view text);
Schema read_schema(const std::filesystem::path& path);
void write_schema(const Schema& schema, const std::filesystem::path& path);

struct Dataset {
  Schema schema;
  IndexMatrix rows;    // N x A category indices
  IndexVector labels;  // N entries in {0, 1}

  Index size() const { return rows.rows(); }
  Index attribute_count() const { return schema.attribute_count(); }

  bool has_sensitive() const { return schema.sensitive.has_value(); }
  Index sensitive_column() const;          // throws DataError when undesignated
  std::int32_t unprivileged_index() const; // index of b within the sensitive domain
  std::int32_t privileged_index() const;

  /// Row subset in the given order; schema carried over unchanged.
  Dataset select(std::span<const Index> row_ids) const;

  void validate() const;
};

}  // namespace tabsynth
