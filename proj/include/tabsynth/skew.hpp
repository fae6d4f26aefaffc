#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// Joint (sensitive value, label) counts. Row 0 is the unprivileged group b,
// row 1 the privileged group w; column 0 counts y=1, column 1 counts y=0.
struct CellCounts {
  std::array<std::array<Index, 2>, 2> n{{{0, 0}, {0, 0}}};

  Index b_pos() const { return n[0][0]; }
  Index b_neg() const { return n[0][1]; }
  Index w_pos() const { return n[1][0]; }
  Index w_neg() const { return n[1][1]; }
  Index total() const { return n[0][0] + n[0][1] + n[1][0] + n[1][1]; }
  bool operator==(const CellCounts&) const = default;
};

CellCounts conditional_counts(const Dataset& d);

// Target cell counts for a conditional subsample. `target` is ordered
// n(b,1), n(b,0), n(w,1), n(w,0), matching CellCounts row-major.
struct SkewSpec {
  std::string name;
  std::array<Index, 4> target{0, 0, 0, 0};
  std::uint64_t seed = 0;

  CellCounts as_counts() const;
};

// Throws DataError naming the first deficient cell or structural problem.
void validate_spec(const SkewSpec& spec, const CellCounts& available);

// Draws spec.target rows per cell without replacement (seeded shuffle per
// cell), then reassembles the picks in ascending source-row order. A spec
// equal to conditional_counts(d) therefore returns d unchanged.
Dataset apply_skew(const Dataset& d, const SkewSpec& spec);

// Largest positive count p with p / (p + negatives) <= rate.
Index fit_positive_count(Index negatives, double rate);

struct NamedDataset {
  std::string name;
  Dataset data;
};

// The five standard variations, in order:
//   full          the source itself
//   balanced      all four cells at the minimum source cell count
//   half_rate     b positives cut so the b rate is half the w rate
//   extreme       b positive rate <= 0.1%, all cells floored to even counts
//   extreme_small every extreme cell halved (same ratios, half the size)
std::vector<SkewSpec> standard_variation_specs(const CellCounts& source, std::uint64_t seed);
std::vector<NamedDataset> standard_variation_suite(const Dataset& d, std::uint64_t seed);

// Plain-text serialization, same conventions as the schema format. A file
// may hold several specs; each "name" line starts a new one.
std::vector<SkewSpec> parse_skew_specs_text(const std::string& text);
std::vector<SkewSpec> read_skew_specs(const std::string& path);
SkewSpec parse_skew_spec_text(const std::string& text);  // exactly one
SkewSpec read_skew_spec(const std::string& path);
void write_skew_spec(const SkewSpec& spec, const std::string& path);
std::string skew_spec_text(const SkewSpec& spec);

}  // namespace tabsynth
