#include "tabsynth/split.hpp"

#include <cmath>
#include <numeric>

#include "tabsynth/rng.hpp"

namespace tabsynth {

SplitSizes split_sizes(Index n) {
  if (n < 10) throw DataError("split requires at least 10 rows, got " + std::to_string(n));
  SplitSizes s;
  s.train = static_cast<Index>(std::floor(0.7 * static_cast<double>(n)));
  s.validation = static_cast<Index>(std::floor(0.1 * static_cast<double>(n)));
  s.test = n - s.train - s.validation;
  return s;
}

SplitIndices split_rows(Index n, std::uint64_t seed) {
  SplitSizes sizes = split_sizes(n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(order);
  SplitIndices out;
  auto it = order.begin();
  out.train.assign(it, it + sizes.train);
  it += sizes.train;
  out.validation.assign(it, it + sizes.validation);
  it += sizes.validation;
  out.test.assign(it, order.end());
  return out;
}

DatasetSplit split_dataset(const Dataset& d, std::uint64_t seed) {
  SplitIndices idx = split_rows(d.size(), seed);
  DatasetSplit out;
  out.train = d.select(idx.train);
  out.validation = d.select(idx.validation);
  out.test = d.select(idx.test);
  return out;
}

}  // namespace tabsynth
