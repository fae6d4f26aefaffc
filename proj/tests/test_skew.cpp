#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <vector>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tabsynth/demo.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/skew.hpp"

using namespace tabsynth;

namespace {

// Source with the given number of rows per (group, label) cell. Group b is
// a0.v0, group w is a0.v1; a second column cycles to vary rows.
Dataset cell_source(Index bp, Index bn, Index wp, Index wn) {
  Schema s = fixtures::make_schema({2, 3});
  std::vector<std::vector<Index>> rows;
  std::vector<int> labels;
  auto add = [&](Index group, int label, Index count) {
    for (Index i = 0; i < count; ++i) {
      rows.push_back({group, i % 3});
      labels.push_back(label);
    }
  };
  add(0, 1, bp);
  add(0, 0, bn);
  add(1, 1, wp);
  add(1, 0, wn);
  return fixtures::make_dataset(s, rows, labels);
}

std::map<std::vector<Index>, int> row_multiset(const Dataset& d) {
  std::map<std::vector<Index>, int> m;
  for (Index i = 0; i < d.size(); ++i) {
    std::vector<Index> key;
    for (Index c = 0; c < d.attribute_count(); ++c) key.push_back(d.rows(i, c));
    key.push_back(d.labels(i));
    m[key]++;
  }
  return m;
}

bool contains(const std::map<std::vector<Index>, int>& sup,
              const std::map<std::vector<Index>, int>& sub) {
  for (const auto& [key, count] : sub) {
    auto it = sup.find(key);
    if (it == sup.end() || it->second < count) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("conditional counts enumerate the four cells") {
  Dataset d = cell_source(1, 1, 1, 1);
  CellCounts c = conditional_counts(d);
  CHECK(c.b_pos() == 1);
  CHECK(c.b_neg() == 1);
  CHECK(c.w_pos() == 1);
  CHECK(c.w_neg() == 1);
  CHECK(c.total() == 4);
}

TEST_CASE("conditional counts with an empty unprivileged group") {
  Dataset d = cell_source(0, 0, 3, 2);
  CellCounts c = conditional_counts(d);
  CHECK(c.b_pos() == 0);
  CHECK(c.b_neg() == 0);
  CHECK(c.w_pos() == 3);
  CHECK(c.w_neg() == 2);
}

TEST_CASE("conditional counts match the enumeration oracle on demo data") {
  Dataset d = generate_census_demo(200, 31);
  CellCounts c = conditional_counts(d);
  oracle::GroupTally t = oracle::tally(d);
  CHECK(c.b_pos() == t.bp);
  CHECK(c.b_neg() == t.bn);
  CHECK(c.w_pos() == t.wp);
  CHECK(c.w_neg() == t.wn);
  CHECK(c.total() == d.size());
}

TEST_CASE("full-selection skew returns the dataset unchanged") {
  Dataset d = cell_source(7, 5, 9, 6);
  CellCounts c = conditional_counts(d);
  SkewSpec spec{"full", {c.b_pos(), c.b_neg(), c.w_pos(), c.w_neg()}, 99};
  Dataset out = apply_skew(d, spec);
  CHECK(out.rows == d.rows);
  CHECK(out.labels == d.labels);
}

TEST_CASE("equal-cell spec forces base rate one half and zero parity gap") {
  Dataset d = cell_source(25, 13, 18, 40);
  SkewSpec spec{"eq", {10, 10, 10, 10}, 5};
  Dataset out = apply_skew(d, spec);
  CHECK(base_counts(out).base_rate == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(statistical_parity_difference(out) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(conditional_counts(out) == spec.as_counts());
}

TEST_CASE("thousandth-rate spec forces disparate impact 0.002") {
  Dataset d = cell_source(5, 1200, 700, 700);
  SkewSpec spec{"tiny", {1, 999, 500, 500}, 12};
  Dataset out = apply_skew(d, spec);
  CHECK(disparate_impact(out) == doctest::Approx(0.002).epsilon(1e-12));
}

TEST_CASE("skew is deterministic per seed and draws a true subset") {
  Dataset d = cell_source(30, 44, 52, 28);
  SkewSpec spec{"sub", {11, 20, 31, 9}, 77};
  Dataset a = apply_skew(d, spec);
  Dataset b = apply_skew(d, spec);
  CHECK(a.rows == b.rows);
  CHECK(a.labels == b.labels);
  CHECK(conditional_counts(a) == spec.as_counts());
  CHECK(contains(row_multiset(d), row_multiset(a)));

  SkewSpec other = spec;
  other.seed = 78;
  Dataset c = apply_skew(d, other);
  CHECK(conditional_counts(c) == spec.as_counts());
  CHECK(contains(row_multiset(d), row_multiset(c)));
}

TEST_CASE("infeasible specs name the deficient cell") {
  Dataset d = cell_source(3, 3, 3, 3);
  SkewSpec spec{"bad", {4, 3, 3, 3}, 1};
  CHECK_THROWS_WITH_AS(apply_skew(d, spec),
                       doctest::Contains("(b,1)"), DataError);
  SkewSpec wneg{"bad2", {3, 3, 3, 9}, 1};
  CHECK_THROWS_WITH_AS(apply_skew(d, wneg),
                       doctest::Contains("(w,0)"), DataError);
}

TEST_CASE("a spec must keep at least one row per group") {
  Dataset d = cell_source(3, 3, 3, 3);
  SkewSpec spec{"nob", {0, 0, 3, 3}, 1};
  CHECK_THROWS_AS(apply_skew(d, spec), DataError);
}

TEST_CASE("fit_positive_count maximizes the count under the rate cap") {
  CHECK(fit_positive_count(100, 0.5) == 100);
  CHECK(fit_positive_count(999, 0.001) == 1);
  CHECK(fit_positive_count(10, 0.0) == 0);
  CHECK(fit_positive_count(0, 0.9) == 0);  // no negatives: any p gives rate 1
  for (Index negs : {7, 50, 333}) {
    for (double rate : {0.01, 0.2, 0.47}) {
      Index p = fit_positive_count(negs, rate);
      CHECK(static_cast<double>(p) / static_cast<double>(p + negs) <= rate + 1e-15);
      double next = static_cast<double>(p + 1) / static_cast<double>(p + 1 + negs);
      CHECK(next > rate);
    }
  }
}

TEST_CASE("standard suite shapes") {
  Dataset d = generate_census_demo(1200, 17);
  CellCounts src = conditional_counts(d);
  std::vector<SkewSpec> specs = standard_variation_specs(src, 3);
  REQUIRE(specs.size() == 5);
  CHECK(specs[0].name == "full");
  CHECK(specs[1].name == "balanced");
  CHECK(specs[2].name == "half_rate");
  CHECK(specs[3].name == "extreme");
  CHECK(specs[4].name == "extreme_small");

  CHECK(specs[0].as_counts() == src);

  Index m = std::min({src.b_pos(), src.b_neg(), src.w_pos(), src.w_neg()});
  for (Index cell : specs[1].target) CHECK(cell == m);

  // The two extreme variations share cell ratios at half the size.
  for (int i = 0; i < 4; ++i) CHECK(specs[4].target[i] * 2 == specs[3].target[i]);

  // Extreme keeps the unprivileged positive rate at or below 0.1%.
  double ebp = static_cast<double>(specs[3].target[0]);
  double ebn = static_cast<double>(specs[3].target[1]);
  CHECK(ebp / (ebp + ebn) <= 0.001 + 1e-15);

  // Each spec is feasible against the source.
  for (const auto& spec : specs) validate_spec(spec, src);
}

TEST_CASE("standard suite datasets hit the cell targets exactly") {
  Dataset d = generate_census_demo(1500, 23);
  std::vector<SkewSpec> specs = standard_variation_specs(conditional_counts(d), 41);
  std::vector<NamedDataset> suite = standard_variation_suite(d, 41);
  REQUIRE(suite.size() == 5);
  CHECK(suite[0].data.rows == d.rows);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(suite[i].name == specs[i].name);
    CHECK(conditional_counts(suite[i].data) == specs[i].as_counts());
  }
  CHECK(disparate_impact(suite[1].data) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(statistical_parity_difference(suite[1].data) == doctest::Approx(0.0).epsilon(1e-13));

  double w_rate = static_cast<double>(conditional_counts(suite[2].data).w_pos()) /
                  static_cast<double>(conditional_counts(suite[2].data).w_pos() +
                                      conditional_counts(suite[2].data).w_neg());
  CellCounts half = conditional_counts(suite[2].data);
  double b_rate = static_cast<double>(half.b_pos()) /
                  static_cast<double>(half.b_pos() + half.b_neg());
  CHECK(b_rate <= w_rate / 2.0 + 1e-12);
}

TEST_CASE("skew spec text round trips, single and multi") {
  SkewSpec spec{"demo", {4, 3, 2, 1}, 123456789};
  SkewSpec back = parse_skew_spec_text(skew_spec_text(spec));
  CHECK(back.name == spec.name);
  CHECK(back.target == spec.target);
  CHECK(back.seed == spec.seed);

  std::string multi = skew_spec_text(spec) + skew_spec_text(SkewSpec{"other", {1, 1, 1, 1}, 9});
  std::vector<SkewSpec> specs = parse_skew_specs_text(multi);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].name == "demo");
  CHECK(specs[1].name == "other");
  CHECK(specs[1].seed == 9);
}

TEST_CASE("skew spec parsing rejects malformed documents") {
  CHECK_THROWS_AS(parse_skew_spec_text("counts 1 2 3 4\nname late\n"), DataError);
  CHECK_THROWS_AS(parse_skew_spec_text("name only\n"), DataError);           // counts missing
  CHECK_THROWS_AS(parse_skew_spec_text("name x\ncounts 1 2 3\n"), DataError);  // short counts
  CHECK_THROWS_AS(parse_skew_spec_text(""), DataError);
}
