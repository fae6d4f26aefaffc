#include "tabsynth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "tabsynth/format.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

std::string row_key(const Dataset& d, Index r) {
  std::string key;
  key.reserve(static_cast<std::size_t>(d.attribute_count() + 1) * 4);
  auto push = [&key](std::int32_t v) {
    for (int i = 0; i < 4; ++i) key.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  for (Index c = 0; c < d.attribute_count(); ++c) push(d.rows(r, c));
  push(d.labels[r]);
  return key;
}

void check_same_schema(const Dataset& a, const Dataset& b, const char* who) {
  if (a.schema.sha256_hex() != b.schema.sha256_hex()) {
    throw DataError(std::string(who) + ": datasets have different schemas");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write report file: " + path);
  out << content;
  if (!out) throw DataError("short write: " + path);
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_metric(v);
}

nlohmann::ordered_json report_json(const BiasReport& r) {
  nlohmann::ordered_json j;
  j["stat_parity_diff"] = json_number(r.stat_parity_diff);
  j["disparate_impact"] = json_number(r.disparate_impact);
  j["consistency"] = json_number(r.consistency);
  j["base_rate"] = json_number(r.base_rate);
  j["num_pos"] = r.num_pos;
  j["num_neg"] = r.num_neg;
  return j;
}

}  // namespace

const char* const kMetricNames[6] = {"stat_parity_diff", "disparate_impact", "consistency",
                                     "base_rate",        "num_pos",          "num_neg"};

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DataError("pearson: vector lengths differ");
  const std::size_t n = xs.size();
  if (n < 2) return kNan;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return kNan;
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double exact_match_rate(const Dataset& real, const Dataset& synthetic) {
  check_same_schema(real, synthetic, "exact_match_rate");
  if (synthetic.size() == 0) throw DataError("exact_match_rate: synthetic dataset is empty");
  std::unordered_set<std::string> real_rows;
  real_rows.reserve(static_cast<std::size_t>(real.size()) * 2);
  for (Index r = 0; r < real.size(); ++r) real_rows.insert(row_key(real, r));
  Index hits = 0;
  for (Index r = 0; r < synthetic.size(); ++r) {
    hits += real_rows.count(row_key(synthetic, r)) > 0;
  }
  return static_cast<double>(hits) / static_cast<double>(synthetic.size());
}

bool is_row_permutation(const Dataset& real, const Dataset& synthetic) {
  check_same_schema(real, synthetic, "is_row_permutation");
  if (real.size() != synthetic.size()) return false;
  std::unordered_map<std::string, Index> counts;
  counts.reserve(static_cast<std::size_t>(real.size()) * 2);
  for (Index r = 0; r < real.size(); ++r) ++counts[row_key(real, r)];
  for (Index r = 0; r < synthetic.size(); ++r) {
    auto it = counts.find(row_key(synthetic, r));
    if (it == counts.end() || it->second == 0) return false;
    --it->second;
  }
  return true;
}

std::vector<double> metric_vector(const std::vector<PairedScore>& scores, int metric,
                                  bool synthetic) {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& s : scores) {
    const BiasReport& r = synthetic ? s.synthetic : s.real;
    switch (metric) {
      case 0: v.push_back(r.stat_parity_diff); break;
      case 1: v.push_back(r.disparate_impact); break;
      case 2: v.push_back(r.consistency); break;
      case 3: v.push_back(r.base_rate); break;
      case 4: v.push_back(static_cast<double>(r.num_pos)); break;
      case 5: v.push_back(static_cast<double>(r.num_neg)); break;
      default: throw DataError("metric_vector: metric index out of range");
    }
  }
  return v;
}

CorrelationMatrix metric_correlations(const PairedRun& run) {
  const Index v = static_cast<Index>(run.variations.size());
  CorrelationMatrix out;
  out.names.reserve(12);
  std::vector<std::vector<double>> vectors;
  vectors.reserve(12);
  for (int side = 0; side < 2; ++side) {
    for (int metric = 0; metric < 6; ++metric) {
      out.names.push_back(std::string(side == 0 ? "real:" : "synth:") + kMetricNames[metric]);
      vectors.push_back(metric_vector(run.variations, metric, side == 1));
    }
  }
  out.r = Matrix::Constant(12, 12, kNan);
  out.excluded = IndexMatrix::Zero(12, 12);
  for (Index i = 0; i < 12; ++i) {
    for (Index j = 0; j < 12; ++j) {
      std::vector<double> xs, ys;
      xs.reserve(static_cast<std::size_t>(v));
      ys.reserve(static_cast<std::size_t>(v));
      for (Index t = 0; t < v; ++t) {
        double a = vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
        double b = vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
        if (std::isfinite(a) && std::isfinite(b)) {
          xs.push_back(a);
          ys.push_back(b);
        }
      }
      out.excluded(i, j) = static_cast<std::int32_t>(v - static_cast<Index>(xs.size()));
      if (xs.size() >= 3) out.r(i, j) = pearson(xs, ys);
    }
  }
  return out;
}

PairedScore score_pair(const std::string& name, const Dataset& real, const Dataset& synthetic,
                       Index k) {
  PairedScore score;
  score.name = name;
  score.real_size = real.size();
  score.synthetic_size = synthetic.size();
  score.real = full_report(real, k);
  score.synthetic = full_report(synthetic, k);
  score.match_rate = exact_match_rate(real, synthetic);
  return score;
}

ExperimentResult run_experiment(const std::vector<NamedDataset>& suite, const VaeModel& model,
                                Index k, std::uint64_t seed) {
  if (suite.size() < 3) {
    throw DataError("experiment needs at least 3 variations, got " + std::to_string(suite.size()));
  }
  ExperimentResult result;
  result.run.k = k;
  for (const auto& variation : suite) {
    Dataset synth = synthesize(model, variation.data, variation.data.size(),
                               SynthMode::reconstruction, derive_seed(seed, "synth:" + variation.name));
    result.run.variations.push_back(score_pair(variation.name, variation.data, synth, k));
  }
  std::sort(result.run.variations.begin(), result.run.variations.end(),
            [](const PairedScore& a, const PairedScore& b) { return a.name < b.name; });
  result.correlation = metric_correlations(result.run);
  return result;
}

void emit_reports(const ExperimentResult& result, const std::optional<TsnePoints>& tsne,
                  const nlohmann::ordered_json& header, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create report directory " + out_dir + ": " + ec.message());
  const auto dir = std::filesystem::path(out_dir);

  const PairedRun& run = result.run;
  const CorrelationMatrix& corr = result.correlation;

  nlohmann::ordered_json j;
  j["run"] = header;
  j["k"] = run.k;
  j["variations"] = nlohmann::ordered_json::array();
  for (const auto& s : run.variations) {
    nlohmann::ordered_json vj;
    vj["name"] = s.name;
    vj["real_rows"] = s.real_size;
    vj["synthetic_rows"] = s.synthetic_size;
    vj["real"] = report_json(s.real);
    vj["synthetic"] = report_json(s.synthetic);
    vj["exact_match_rate"] = json_number(s.match_rate);
    j["variations"].push_back(std::move(vj));
  }
  nlohmann::ordered_json cj;
  cj["metrics"] = corr.names;
  cj["matrix"] = nlohmann::ordered_json::array();
  Index excluded_total = 0;
  for (Index i = 0; i < corr.r.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Index c = 0; c < corr.r.cols(); ++c) {
      row.push_back(json_number(corr.r(i, c)));
      excluded_total += corr.excluded(i, c);
    }
    cj["matrix"].push_back(std::move(row));
  }
  cj["excluded_pairs_total"] = excluded_total;
  j["correlation"] = std::move(cj);
  write_file((dir / "report.json").string(), j.dump(2) + "\n");

  std::ostringstream metrics_csv;
  metrics_csv << "variation,source,stat_parity_diff,disparate_impact,consistency,base_rate,"
                 "num_pos,num_neg\n";
  for (const auto& s : run.variations) {
    for (int side = 0; side < 2; ++side) {
      const BiasReport& r = (side == 0) ? s.real : s.synthetic;
      metrics_csv << s.name << ',' << (side == 0 ? "real" : "synthetic") << ','
                  << format_metric(r.stat_parity_diff) << ',' << format_metric(r.disparate_impact)
                  << ',' << format_metric(r.consistency) << ',' << format_metric(r.base_rate) << ','
                  << r.num_pos << ',' << r.num_neg << "\n";
    }
  }
  write_file((dir / "metrics.csv").string(), metrics_csv.str());

  std::ostringstream corr_csv;
  corr_csv << "metric";
  for (const auto& name : corr.names) corr_csv << ',' << name;
  corr_csv << "\n";
  for (Index i = 0; i < corr.r.rows(); ++i) {
    corr_csv << corr.names[static_cast<std::size_t>(i)];
    for (Index c = 0; c < corr.r.cols(); ++c) corr_csv << ',' << format_metric(corr.r(i, c));
    corr_csv << "\n";
  }
  write_file((dir / "correlation.csv").string(), corr_csv.str());

  if (tsne.has_value()) {
    if (tsne->points.rows() != static_cast<Index>(tsne->tags.size())) {
      throw DataError("emit_reports: t-sne point and tag counts differ");
    }
    std::ostringstream tsne_csv;
    tsne_csv << (tsne->points.cols() == 3 ? "x,y,z,source\n" : "x,y,source\n");
    for (Index r = 0; r < tsne->points.rows(); ++r) {
      for (Index c = 0; c < tsne->points.cols(); ++c) {
        tsne_csv << format_g17(tsne->points(r, c)) << ',';
      }
      tsne_csv << tsne->tags[static_cast<std::size_t>(r)] << "\n";
    }
    write_file((dir / "tsne.csv").string(), tsne_csv.str());
  }

  std::ostringstream summary;
  summary << "paired real-vs-synthetic evaluation\n";
  summary << "variations (" << run.variations.size() << "):";
  for (const auto& s : run.variations) summary << ' ' << s.name;
  summary << "\nconsistency neighbors k=" << run.k << "\n\n";
  for (const auto& s : run.variations) {
    summary << s.name << ": rows real=" << s.real_size << " synth=" << s.synthetic_size
            << " exact_match_rate=" << format_metric(s.match_rate) << "\n";
    for (int side = 0; side < 2; ++side) {
      const BiasReport& r = (side == 0) ? s.real : s.synthetic;
      summary << "  " << (side == 0 ? "real     " : "synthetic") << " spd="
              << format_metric(r.stat_parity_diff) << " di=" << format_metric(r.disparate_impact)
              << " consistency=" << format_metric(r.consistency)
              << " base_rate=" << format_metric(r.base_rate) << " pos=" << r.num_pos
              << " neg=" << r.num_neg << "\n";
    }
  }
  summary << "\nreal metric vs its synthetic counterpart (pearson r over "
          << run.variations.size() << " variations):\n";
  for (int metric = 0; metric < 6; ++metric) {
    summary << "  " << kMetricNames[metric] << " r=" << format_metric(corr.r(metric, metric + 6));
    if (corr.excluded(metric, metric + 6) > 0) {
      summary << " (excluded " << corr.excluded(metric, metric + 6) << " non-finite pairs)";
    }
    summary << "\n";
  }
  summary << "\nnon-finite pairs excluded across all correlation cells: " << excluded_total << "\n";
  if (run.variations.size() < 10) {
    summary << "note: r is computed over only " << run.variations.size()
            << " variation points; treat values as indicative, not significant\n";
  }
  write_file((dir / "summary.txt").string(), summary.str());
}

}  // namespace tabsynth
