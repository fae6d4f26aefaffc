#pragma once

#include <cstdint>
#include <vector>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// Row-index partition of a dataset into train / validation / test.
struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;
};

// Sizes for a 70/10/20 partition: floor(0.7*n) train, floor(0.1*n)
// validation, and whatever remains goes to test. Requires n >= 10.
struct SplitSizes {
  Index train;
  Index validation;
  Index test;
};

SplitSizes split_sizes(Index n);

// Shuffles [0, n) with the given seed, then cuts according to split_sizes.
SplitIndices split_rows(Index n, std::uint64_t seed);

struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

DatasetSplit split_dataset(const Dataset& d, std::uint64_t seed);

}  // namespace tabsynth
