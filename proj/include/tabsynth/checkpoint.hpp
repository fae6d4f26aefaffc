#pragma once

#include <string>
#include <vector>

#include "tabsynth/types.hpp"

namespace tabsynth {

// Binary tensor container: 8-byte magic "TSYNTNS1", little-endian u32
// tensor count, then per tensor u64 rows, u64 cols and rows*cols doubles in
// row-major order, little-endian IEEE-754. Bias rows are stored as 1 x n.
void write_tensors(const std::string& path, const std::vector<Matrix>& tensors);
std::vector<Matrix> read_tensors(const std::string& path);

}  // namespace tabsynth
