#pragma once

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

/// Block-structured one-hot encoding of a Dataset. One block per attribute
/// column, plus a trailing 2-wide label block when the label is included.
struct EncodedMatrix {
  Matrix values;  // N x F
  BlockLayout blocks;
  bool includes_label = false;

  Index width() const { return values.cols(); }

  /// Every block of every row must sum to 1 within tol.
  void validate(double tol = 1e-9) const;
};

BlockLayout schema_block_layout(const Schema& schema, bool include_label);

EncodedMatrix one_hot_encode(const Dataset& d, bool include_label = true);

/// Per-block argmax; ties resolve to the lowest index. Accepts hard one-hot
/// data as well as block-probability matrices.
IndexMatrix decode(const Matrix& values, const BlockLayout& blocks);

/// Rebuilds a Dataset from an index matrix holding the attribute columns
/// followed by the label column.
Dataset dataset_from_indices(const Schema& schema, const IndexMatrix& attrs_and_label);

}  // namespace tabsynth
