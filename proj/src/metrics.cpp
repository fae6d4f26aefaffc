#include "tabsynth/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "tabsynth/format.hpp"

namespace tabsynth {

namespace {

struct GroupCounts {
  Index b_total = 0, b_pos = 0;
  Index w_total = 0, w_pos = 0;
};

GroupCounts sensitive_group_counts(const Dataset& d) {
  Index s_col = d.sensitive_column();
  std::int32_t b = d.unprivileged_index();
  std::int32_t w = d.privileged_index();
  GroupCounts g;
  for (Index r = 0; r < d.size(); ++r) {
    std::int32_t s = d.rows(r, s_col);
    if (s == b) {
      ++g.b_total;
      g.b_pos += d.labels[r];
    } else if (s == w) {
      ++g.w_total;
      g.w_pos += d.labels[r];
    }
  }
  const auto& spec = *d.schema.sensitive;
  if (g.b_total == 0) throw DataError("sensitive group b ('" + spec.unprivileged + "') is empty");
  if (g.w_total == 0) throw DataError("sensitive group w ('" + spec.privileged + "') is empty");
  return g;
}

}  // namespace

double statistical_parity_difference(const Dataset& d) {
  GroupCounts g = sensitive_group_counts(d);
  double pb = static_cast<double>(g.b_pos) / static_cast<double>(g.b_total);
  double pw = static_cast<double>(g.w_pos) / static_cast<double>(g.w_total);
  return pb - pw;
}

double disparate_impact(const Dataset& d) {
  GroupCounts g = sensitive_group_counts(d);
  double pb = static_cast<double>(g.b_pos) / static_cast<double>(g.b_total);
  double pw = static_cast<double>(g.w_pos) / static_cast<double>(g.w_total);
  if (pw == 0.0) {
    if (pb > 0.0) return std::numeric_limits<double>::infinity();
    throw DataError("disparate impact is 0/0: neither group has positive outcomes");
  }
  return pb / pw;
}

double consistency(const Dataset& d, Index k, ConsistencyForm form) {
  const Index n = d.size();
  if (k <= 0) throw DataError("consistency: k must be positive");
  if (n <= k) {
    throw DataError("consistency: needs more than k=" + std::to_string(k) + " rows, got " +
                    std::to_string(n));
  }
  const Index a = d.attribute_count();

  // Squared Euclidean distance between one-hot rows is twice the number of
  // attribute disagreements, so ranking by disagreement count is identical.
  // Distances are integers in [0, a]; bucketing by distance and scanning
  // buckets in ascending row order realizes the (distance, row index)
  // tie-break without a sort.
  std::vector<std::vector<Index>> buckets(static_cast<std::size_t>(a) + 1);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (auto& bucket : buckets) bucket.clear();
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      Index diff = 0;
      for (Index c = 0; c < a; ++c) diff += (d.rows(i, c) != d.rows(j, c));
      buckets[static_cast<std::size_t>(diff)].push_back(j);
    }
    Index taken = 0;
    Index label_sum = 0;
    for (const auto& bucket : buckets) {
      for (Index j : bucket) {
        label_sum += d.labels[j];
        if (++taken == k) break;
      }
      if (taken == k) break;
    }
    double yi = static_cast<double>(d.labels[i]);
    if (form == ConsistencyForm::mean_of_neighbors) {
      total += std::abs(yi - static_cast<double>(label_sum) / static_cast<double>(k));
    } else {
      total += std::abs(yi - static_cast<double>(label_sum));
    }
  }
  double denom = (form == ConsistencyForm::mean_of_neighbors)
                     ? static_cast<double>(n)
                     : static_cast<double>(n) * static_cast<double>(k);
  return 1.0 - total / denom;
}

BaseCounts base_counts(const Dataset& d) {
  BaseCounts c;
  for (Index r = 0; r < d.size(); ++r) {
    if (d.labels[r] == 1) {
      ++c.num_pos;
    } else {
      ++c.num_neg;
    }
  }
  c.base_rate = static_cast<double>(c.num_pos) / static_cast<double>(d.size());
  return c;
}

BiasReport full_report(const Dataset& d, Index k) {
  auto wrap = [](const char* metric, auto&& fn) -> double {
    try {
      return fn();
    } catch (const DataError& e) {
      throw DataError(std::string(metric) + ": " + e.what());
    }
  };
  BiasReport r;
  r.k = k;
  r.stat_parity_diff = wrap("stat_parity_diff", [&] { return statistical_parity_difference(d); });
  r.disparate_impact = wrap("disparate_impact", [&] { return disparate_impact(d); });
  r.consistency = wrap("consistency", [&] { return consistency(d, k); });
  BaseCounts c = base_counts(d);
  r.base_rate = c.base_rate;
  r.num_pos = c.num_pos;
  r.num_neg = c.num_neg;
  return r;
}

std::string report_text(const BiasReport& r) {
  std::ostringstream out;
  out << "stat_parity_diff " << format_metric(r.stat_parity_diff) << "\n";
  out << "disparate_impact " << format_metric(r.disparate_impact) << "\n";
  out << "consistency " << format_metric(r.consistency) << "\n";
  out << "base_rate " << format_metric(r.base_rate) << "\n";
  out << "num_pos " << r.num_pos << "\n";
  out << "num_neg " << r.num_neg << "\n";
  out << "k " << r.k << "\n";
  return out.str();
}

}  // namespace tabsynth
