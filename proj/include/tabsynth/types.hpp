#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabsynth {

using Eigen::Index;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IndexMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;
using IndexVector = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>;

/// Contiguous column range of a wider matrix, one per encoded column.
struct Block {
  Index offset = 0;
  Index width = 0;
};

using BlockLayout = std::vector<Block>;

inline BlockLayout layout_from_widths(const std::vector<Index>& widths) {
  BlockLayout blocks;
  blocks.reserve(widths.size());
  Index offset = 0;
  for (Index w : widths) {
    blocks.push_back({offset, w});
    offset += w;
  }
  return blocks;
}

inline Index layout_width(const BlockLayout& blocks) {
  return std::accumulate(blocks.begin(), blocks.end(), Index{0},
                         [](Index acc, const Block& b) { return acc + b.width; });
}

// Error taxonomy; the CLI maps these onto exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VerifyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tabsynth
