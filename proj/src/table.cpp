#include "tabsynth/table.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tabsynth {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delimiter)) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == delimiter) cells.push_back("");
  return cells;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  Index dropped = 0;
};

RawTable read_raw(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());
  RawTable raw;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  raw.header = split_line(line, delimiter);
  if (raw.header.empty()) throw DataError("empty header row: " + path.string());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, delimiter);
    if (cells.size() != raw.header.size()) {
      throw DataError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(raw.header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    // "?" marks a missing value; the whole row is dropped and counted.
    bool missing = std::any_of(cells.begin(), cells.end(), [](const std::string& c) { return c == "?"; });
    if (missing) {
      ++raw.dropped;
      continue;
    }
    raw.rows.push_back(std::move(cells));
  }
  if (raw.rows.empty()) throw DataError("empty dataset: " + path.string());
  return raw;
}

Schema infer_schema(const RawTable& raw, const TableOptions& options) {
  std::string label_name = options.label_column.value_or(raw.header.back());
  auto label_it = std::find(raw.header.begin(), raw.header.end(), label_name);
  if (label_it == raw.header.end()) {
    throw DataError("label column '" + label_name + "' not present in header");
  }
  std::size_t label_pos = static_cast<std::size_t>(label_it - raw.header.begin());

  std::vector<std::set<std::string>> observed(raw.header.size());
  for (const auto& row : raw.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) observed[c].insert(row[c]);
  }

  Schema schema;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    if (c == label_pos) continue;
    ColumnSpec col;
    col.name = raw.header[c];
    col.kind = ColumnKind::categorical;
    col.domain.assign(observed[c].begin(), observed[c].end());  // sorted, distinct
    if (col.domain.size() < 2) {
      throw DataError("column '" + col.name + "' has fewer than 2 observed values; cannot infer a domain");
    }
    schema.columns.push_back(std::move(col));
  }
  const auto& label_values = observed[label_pos];
  if (label_values.size() != 2) {
    throw DataError("non-binary label column '" + label_name + "': observed " +
                    std::to_string(label_values.size()) + " distinct values");
  }
  auto it = label_values.begin();
  schema.label.column = label_name;
  schema.label.negative = *it++;
  schema.label.positive = *it;
  schema.sensitive = options.sensitive;
  schema.validate();
  return schema;
}

}  // namespace

ParsedTable parse_table(const std::filesystem::path& path, const std::optional<Schema>& schema_in,
                        const TableOptions& options) {
  RawTable raw = read_raw(path, options.delimiter);
  Schema schema = schema_in ? *schema_in : infer_schema(raw, options);
  schema.validate();

  // The header must list the schema's attribute columns and the label column,
  // in declaration order with the label in its recorded position.
  std::vector<std::string> expected;
  for (const auto& col : schema.columns) expected.push_back(col.name);
  std::size_t label_pos = raw.header.size();
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    if (raw.header[c] == schema.label.column) label_pos = c;
  }
  if (label_pos == raw.header.size()) {
    throw DataError("label column '" + schema.label.column + "' not present in header");
  }
  std::vector<std::string> header_attrs = raw.header;
  header_attrs.erase(header_attrs.begin() + static_cast<std::ptrdiff_t>(label_pos));
  if (header_attrs != expected) {
    throw DataError("header columns do not match schema for " + path.string());
  }

  const Index n = static_cast<Index>(raw.rows.size());
  const Index a = schema.attribute_count();
  Dataset d;
  d.schema = schema;
  d.rows.resize(n, a);
  d.labels.resize(n);
  for (Index r = 0; r < n; ++r) {
    const auto& cells = raw.rows[static_cast<std::size_t>(r)];
    Index attr = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_pos) {
        const std::string& v = cells[c];
        if (v == schema.label.negative) {
          d.labels[r] = 0;
        } else if (v == schema.label.positive) {
          d.labels[r] = 1;
        } else {
          throw DataError("non-binary label value '" + v + "' at data row " + std::to_string(r + 1));
        }
        continue;
      }
      const ColumnSpec& col = schema.columns[static_cast<std::size_t>(attr)];
      Index idx = col.index_of(cells[c]);
      if (idx < 0) {
        throw DataError("unknown category '" + cells[c] + "' in column '" + col.name + "' at data row " +
                        std::to_string(r + 1));
      }
      d.rows(r, attr) = static_cast<std::int32_t>(idx);
      ++attr;
    }
  }
  d.validate();
  return ParsedTable{std::move(d), ParseReport{n, raw.dropped}};
}

void write_table(const Dataset& d, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  for (const auto& col : d.schema.columns) out << col.name << delimiter;
  out << d.schema.label.column << '\n';
  for (Index r = 0; r < d.size(); ++r) {
    for (Index c = 0; c < d.attribute_count(); ++c) {
      const auto& col = d.schema.columns[static_cast<std::size_t>(c)];
      out << col.domain[static_cast<std::size_t>(d.rows(r, c))] << delimiter;
    }
    out << (d.labels[r] == 1 ? d.schema.label.positive : d.schema.label.negative) << '\n';
  }
  if (!out) throw DataError("failed writing dataset file: " + path.string());
}

}  // namespace tabsynth
