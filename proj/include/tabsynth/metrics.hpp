#pragma once

#include <string>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// Dataset-level fairness statistics. disparate_impact may be +infinity
// (group w has no positives while group b does).
struct BiasReport {
  double stat_parity_diff = 0.0;
  double disparate_impact = 0.0;
  double consistency = 0.0;
  double base_rate = 0.0;
  Index num_pos = 0;
  Index num_neg = 0;
  Index k = 0;
};

// Pr(y=1 | S=b) - Pr(y=1 | S=w). Throws DataError naming the empty group.
double statistical_parity_difference(const Dataset& d);

// Pr(y=1 | S=b) / Pr(y=1 | S=w). +infinity when only the denominator is 0;
// 0/0 throws (indeterminate).
double disparate_impact(const Dataset& d);

// How the per-record deviation from the k nearest neighbors is aggregated.
// mean_of_neighbors compares y_i against the neighbor-label mean and is the
// default; summed compares against the raw neighbor-label sum and divides
// the total by N*k. Both exclude the record itself, measure distance as
// squared Euclidean over the one-hot attribute encoding (the label column
// is not part of the distance), and break distance ties by lower row index.
enum class ConsistencyForm { mean_of_neighbors, summed };

double consistency(const Dataset& d, Index k = 5,
                   ConsistencyForm form = ConsistencyForm::mean_of_neighbors);

struct BaseCounts {
  Index num_pos = 0;
  Index num_neg = 0;
  double base_rate = 0.0;
};

BaseCounts base_counts(const Dataset& d);

BiasReport full_report(const Dataset& d, Index k = 5);

// Flat key-value text record, one "name value" pair per line.
std::string report_text(const BiasReport& r);

}  // namespace tabsynth
