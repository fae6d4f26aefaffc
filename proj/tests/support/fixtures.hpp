#pragma once

// Small dataset builders shared across test files.

#include <string>
#include <vector>

#include "tabsynth/rng.hpp"
#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace fixtures {

// Schema with attribute columns a0..a{n-1} of the given domain widths
// (values a0.v0, a0.v1, ...) and a binary label y (no/yes). When column 0
// is binary it becomes the sensitive column with b = a0.v0, w = a0.v1.
inline tabsynth::Schema make_schema(const std::vector<tabsynth::Index>& widths,
                                    bool with_sensitive = true) {
  tabsynth::Schema s;
  for (std::size_t c = 0; c < widths.size(); ++c) {
    tabsynth::ColumnSpec col;
    col.name = "a" + std::to_string(c);
    col.kind = tabsynth::ColumnKind::categorical;
    for (tabsynth::Index v = 0; v < widths[c]; ++v) {
      col.domain.push_back(col.name + ".v" + std::to_string(v));
    }
    s.columns.push_back(col);
  }
  s.label = {"y", "no", "yes"};
  if (with_sensitive && !s.columns.empty() && widths[0] == 2) {
    s.sensitive = tabsynth::SensitiveSpec{s.columns[0].name, s.columns[0].domain[0],
                                          s.columns[0].domain[1]};
  }
  return s;
}

// Rows as attribute index vectors plus 0/1 labels.
inline tabsynth::Dataset make_dataset(const tabsynth::Schema& schema,
                                      const std::vector<std::vector<tabsynth::Index>>& rows,
                                      const std::vector<int>& labels) {
  tabsynth::Dataset d;
  d.schema = schema;
  d.rows.resize(static_cast<tabsynth::Index>(rows.size()), schema.attribute_count());
  d.labels.resize(static_cast<tabsynth::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      d.rows(static_cast<tabsynth::Index>(i), static_cast<tabsynth::Index>(c)) = rows[i][c];
    }
    d.labels(static_cast<tabsynth::Index>(i)) = labels[i];
  }
  d.validate();
  return d;
}

// Random dataset over 1..4 attribute columns; the sensitive column is
// binary, the rest have widths 2..4. Both sensitive groups are populated.
inline tabsynth::Dataset random_dataset(tabsynth::Rng& rng, tabsynth::Index n) {
  std::vector<tabsynth::Index> widths{2};
  tabsynth::Index ncols = 1 + static_cast<tabsynth::Index>(rng.below(4));
  for (tabsynth::Index c = 1; c < ncols; ++c) {
    widths.push_back(2 + static_cast<tabsynth::Index>(rng.below(3)));
  }
  tabsynth::Schema schema = make_schema(widths);
  std::vector<std::vector<tabsynth::Index>> rows;
  std::vector<int> labels;
  for (tabsynth::Index i = 0; i < n; ++i) {
    std::vector<tabsynth::Index> row;
    for (tabsynth::Index c = 0; c < ncols; ++c) {
      row.push_back(static_cast<tabsynth::Index>(rng.below(static_cast<std::uint64_t>(widths[static_cast<std::size_t>(c)]))));
    }
    // Keep both groups present: alternate forced group membership on the
    // first two rows.
    if (i == 0) row[0] = 0;
    if (i == 1) row[0] = 1;
    rows.push_back(row);
    labels.push_back(rng.below(2) == 0 ? 0 : 1);
  }
  return make_dataset(schema, rows, labels);
}

}  // namespace fixtures
