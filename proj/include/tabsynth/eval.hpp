#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/schema.hpp"
#include "tabsynth/skew.hpp"
#include "tabsynth/types.hpp"
#include "tabsynth/vae.hpp"

namespace tabsynth {

// Pearson r, clamped to [-1, 1]. NaN when either side has fewer than 2
// points or zero variance. Lengths must match.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Fraction of synthetic rows (attributes + label) that appear in the real
// row multiset. Both datasets must share a schema.
double exact_match_rate(const Dataset& real, const Dataset& synthetic);

// True when the two datasets hold exactly the same row multiset.
bool is_row_permutation(const Dataset& real, const Dataset& synthetic);

struct PairedScore {
  std::string name;
  BiasReport real;
  BiasReport synthetic;
  double match_rate = 0.0;
  Index real_size = 0;
  Index synthetic_size = 0;
};

struct PairedRun {
  std::vector<PairedScore> variations;  // sorted by variation name
  Index k = 5;
};

// Scores one real/synthetic pair with identical k.
PairedScore score_pair(const std::string& name, const Dataset& real, const Dataset& synthetic,
                       Index k);

// 12 metric vectors (6 real + 6 synthetic) correlated pairwise across the
// variations. Cells with fewer than 3 finite pairs after excluding
// non-finite entries (a +inf disparate impact, say) are NaN; `excluded`
// counts the variations dropped per cell.
struct CorrelationMatrix {
  std::vector<std::string> names;
  Matrix r;
  IndexMatrix excluded;
};

extern const char* const kMetricNames[6];

std::vector<double> metric_vector(const std::vector<PairedScore>& scores, int metric, bool synthetic);
CorrelationMatrix metric_correlations(const PairedRun& run);

struct ExperimentResult {
  PairedRun run;
  CorrelationMatrix correlation;
};

// Synthesizes a same-size dataset per variation through the trained model,
// scores both sides with identical k, and correlates the metric vectors
// across variations. Needs at least 3 variations.
ExperimentResult run_experiment(const std::vector<NamedDataset>& suite, const VaeModel& model,
                                Index k, std::uint64_t seed);

struct TsnePoints {
  Matrix points;                  // N x 2 or N x 3
  std::vector<std::string> tags;  // per point: "real" or "synthetic"
};

// Writes report.json, metrics.csv, correlation.csv, summary.txt and (when
// points are given) tsne.csv into out_dir. `header` is echoed under "run"
// in report.json; pass config and seeds there. Output is byte-stable for
// identical inputs.
void emit_reports(const ExperimentResult& result, const std::optional<TsnePoints>& tsne,
                  const nlohmann::ordered_json& header, const std::string& out_dir);

}  // namespace tabsynth
