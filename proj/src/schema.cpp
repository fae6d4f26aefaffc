#include "tabsynth/schema.hpp"

#include "tabsynth/hash.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace tabsynth {

std::string to_string(ColumnKind kind) {
  return kind == ColumnKind::ordinal ? "ordinal" : "categorical";
}

ColumnKind column_kind_from_string(std::string_view s) {
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "ordinal") return ColumnKind::ordinal;
  throw DataError("unknown column kind: " + std::string(s));
}

Index ColumnSpec::index_of(std::string_view value) const {
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] == value) return static_cast<Index>(i);
  }
  return -1;
}

Index Schema::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<Index>(i);
  }
  return -1;
}

void Schema::validate() const {
  std::unordered_set<std::string> names;
  for (const auto& col : columns) {
    if (col.name.empty()) throw DataError("schema: empty column name");
    if (!names.insert(col.name).second) throw DataError("schema: duplicate column name '" + col.name + "'");
    if (col.domain.size() < 2) {
      throw DataError("schema: column '" + col.name + "' needs at least 2 categories");
    }
    std::unordered_set<std::string> values;
    for (const auto& v : col.domain) {
      if (!values.insert(v).second) {
        throw DataError("schema: duplicate category '" + v + "' in column '" + col.name + "'");
      }
    }
  }
  if (label.column.empty()) throw DataError("schema: no label column declared");
  if (names.count(label.column)) {
    throw DataError("schema: label column '" + label.column + "' also declared as attribute");
  }
  if (label.negative == label.positive) throw DataError("schema: label values must differ");
  if (sensitive) {
    Index c = column_index(sensitive->column);
    if (c < 0) throw DataError("schema: sensitive column '" + sensitive->column + "' not found");
    const ColumnSpec& col = columns[static_cast<std::size_t>(c)];
    if (col.cardinality() != 2) {
      throw DataError("schema: sensitive column '" + col.name + "' must have exactly 2 categories");
    }
    bool b_ok = col.index_of(sensitive->unprivileged) >= 0;
    bool w_ok = col.index_of(sensitive->privileged) >= 0;
    if (!b_ok || !w_ok || sensitive->unprivileged == sensitive->privileged) {
      throw DataError("schema: sensitive (b, w) assignment must cover the column domain");
    }
  }
}

std::string Schema::canonical_text() const {
  std::ostringstream out;
  out << "# tabsynth schema\n";
  for (const auto& col : columns) {
    out << "column " << col.name << ' ' << to_string(col.kind);
    for (const auto& v : col.domain) out << ' ' << v;
    out << '\n';
  }
  out << "label " << label.column << ' ' << label.negative << ' ' << label.positive << '\n';
  if (sensitive) {
    out << "sensitive " << sensitive->column << " b=" << sensitive->unprivileged
        << " w=" << sensitive->privileged << '\n';
  }
  return out.str();
}

std::string Schema::sha256_hex() const { return tabsynth::sha256_hex(canonical_text()); }

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::string strip_prefix(const std::string& token, std::string_view prefix, const char* what) {
  if (token.rfind(prefix, 0) != 0) {
    throw DataError(std::string("schema: expected ") + what + ", got '" + token + "'");
  }
  return token.substr(prefix.size());
}

}  // namespace

Schema parse_schema_text(std::string_view text) {
  Schema schema;
  bool saw_label = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const std::string& directive = tokens[0];
    if (directive == "column") {
      if (tokens.size() < 5) {
        throw DataError("schema line " + std::to_string(line_no) + ": column needs a name, kind and >= 2 values");
      }
      ColumnSpec col;
      col.name = tokens[1];
      col.kind = column_kind_from_string(tokens[2]);
      col.domain.assign(tokens.begin() + 3, tokens.end());
      schema.columns.push_back(std::move(col));
    } else if (directive == "label") {
      if (tokens.size() != 4) {
        throw DataError("schema line " + std::to_string(line_no) + ": label needs a name and 2 values");
      }
      schema.label = LabelSpec{tokens[1], tokens[2], tokens[3]};
      saw_label = true;
    } else if (directive == "sensitive") {
      if (tokens.size() != 4) {
        throw DataError("schema line " + std::to_string(line_no) + ": sensitive needs a name, b= and w=");
      }
      SensitiveSpec s;
      s.column = tokens[1];
      s.unprivileged = strip_prefix(tokens[2], "b=", "b=<value>");
      s.privileged = strip_prefix(tokens[3], "w=", "w=<value>");
      schema.sensitive = std::move(s);
    } else {
      throw DataError("schema line " + std::to_string(line_no) + ": unknown directive '" + directive + "'");
    }
  }
  if (schema.columns.empty()) throw DataError("schema: no columns declared");
  if (!saw_label) throw DataError("schema: no label declared");
  schema.validate();
  return schema;
}

Schema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_text(buf.str());
}

void write_schema(const Schema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schema file: " + path.string());
  out << schema.canonical_text();
  if (!out) throw DataError("failed writing schema file: " + path.string());
}

Index Dataset::sensitive_column() const {
  if (!schema.sensitive) throw DataError("sensitive attribute not designated");
  Index c = schema.column_index(schema.sensitive->column);
  if (c < 0) throw DataError("sensitive column '" + schema.sensitive->column + "' not in schema");
  return c;
}

std::int32_t Dataset::unprivileged_index() const {
  Index c = sensitive_column();
  return static_cast<std::int32_t>(
      schema.columns[static_cast<std::size_t>(c)].index_of(schema.sensitive->unprivileged));
}

std::int32_t Dataset::privileged_index() const {
  Index c = sensitive_column();
  return static_cast<std::int32_t>(
      schema.columns[static_cast<std::size_t>(c)].index_of(schema.sensitive->privileged));
}

Dataset Dataset::select(std::span<const Index> row_ids) const {
  Dataset out;
  out.schema = schema;
  out.rows.resize(static_cast<Index>(row_ids.size()), rows.cols());
  out.labels.resize(static_cast<Index>(row_ids.size()));
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    Index r = row_ids[i];
    if (r < 0 || r >= size()) throw DataError("row selection out of range");
    out.rows.row(static_cast<Index>(i)) = rows.row(r);
    out.labels[static_cast<Index>(i)] = labels[r];
  }
  return out;
}

void Dataset::validate() const {
  schema.validate();
  if (rows.rows() != labels.size()) throw DataError("dataset: row/label count mismatch");
  if (rows.cols() != attribute_count()) throw DataError("dataset: column count does not match schema");
  for (Index c = 0; c < rows.cols(); ++c) {
    const auto card = static_cast<std::int32_t>(schema.columns[static_cast<std::size_t>(c)].cardinality());
    for (Index r = 0; r < rows.rows(); ++r) {
      std::int32_t v = rows(r, c);
      if (v < 0 || v >= card) {
        throw DataError("dataset: cell (" + std::to_string(r) + ", " + std::to_string(c) +
                        ") outside column domain");
      }
    }
  }
  for (Index r = 0; r < labels.size(); ++r) {
    if (labels[r] != 0 && labels[r] != 1) {
      throw DataError("dataset: label at row " + std::to_string(r) + " is not binary");
    }
  }
  if (schema.sensitive) {
    sensitive_column();  // re-checks designation against the schema
  }
}

}  // namespace tabsynth
