#include "tabsynth/encode.hpp"

#include <cmath>

namespace tabsynth {

void EncodedMatrix::validate(double tol) const {
  if (layout_width(blocks) != values.cols()) throw DataError("encoded matrix: block layout width mismatch");
  for (const auto& b : blocks) {
    auto sums = values.middleCols(b.offset, b.width).rowwise().sum();
    for (Index r = 0; r < sums.size(); ++r) {
      if (std::abs(sums[r] - 1.0) > tol) {
        throw DataError("encoded matrix: block at offset " + std::to_string(b.offset) + " row " +
                        std::to_string(r) + " does not sum to 1");
      }
    }
  }
}

BlockLayout schema_block_layout(const Schema& schema, bool include_label) {
  std::vector<Index> widths;
  widths.reserve(schema.columns.size() + 1);
  for (const auto& col : schema.columns) widths.push_back(col.cardinality());
  if (include_label) widths.push_back(2);
  return layout_from_widths(widths);
}

EncodedMatrix one_hot_encode(const Dataset& d, bool include_label) {
  EncodedMatrix e;
  e.blocks = schema_block_layout(d.schema, include_label);
  e.includes_label = include_label;
  e.values = Matrix::Zero(d.size(), layout_width(e.blocks));
  for (Index r = 0; r < d.size(); ++r) {
    for (Index c = 0; c < d.attribute_count(); ++c) {
      e.values(r, e.blocks[static_cast<std::size_t>(c)].offset + d.rows(r, c)) = 1.0;
    }
    if (include_label) {
      e.values(r, e.blocks.back().offset + d.labels[r]) = 1.0;
    }
  }
  return e;
}

IndexMatrix decode(const Matrix& values, const BlockLayout& blocks) {
  if (layout_width(blocks) != values.cols()) throw DataError("decode: block layout does not match matrix width");
  for (const auto& b : blocks) {
    if (b.width <= 0) throw DataError("decode: empty block");
  }
  IndexMatrix out(values.rows(), static_cast<Index>(blocks.size()));
  for (Index r = 0; r < values.rows(); ++r) {
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& b = blocks[bi];
      Index best = 0;
      double best_value = values(r, b.offset);
      for (Index j = 1; j < b.width; ++j) {
        double v = values(r, b.offset + j);
        if (v > best_value) {  // strict, so ties keep the lowest index
          best_value = v;
          best = j;
        }
      }
      out(r, static_cast<Index>(bi)) = static_cast<std::int32_t>(best);
    }
  }
  return out;
}

Dataset dataset_from_indices(const Schema& schema, const IndexMatrix& attrs_and_label) {
  if (attrs_and_label.cols() != schema.attribute_count() + 1) {
    throw DataError("dataset_from_indices: expected attribute columns plus a label column");
  }
  Dataset d;
  d.schema = schema;
  d.rows = attrs_and_label.leftCols(schema.attribute_count());
  d.labels = attrs_and_label.col(schema.attribute_count());
  d.validate();
  return d;
}

}  // namespace tabsynth
