#include "tabsynth/skew.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tabsynth/rng.hpp"

namespace tabsynth {

namespace {

constexpr const char* kCellNames[4] = {"n(b,1)", "n(b,0)", "n(w,1)", "n(w,0)"};
constexpr const char* kCellTags[4] = {"cell:b1", "cell:b0", "cell:w1", "cell:w0"};

Index even_floor(Index v) { return v - (v % 2); }

}  // namespace

CellCounts conditional_counts(const Dataset& d) {
  Index s_col = d.sensitive_column();
  std::int32_t b = d.unprivileged_index();
  std::int32_t w = d.privileged_index();
  CellCounts c;
  for (Index r = 0; r < d.size(); ++r) {
    std::int32_t s = d.rows(r, s_col);
    if (s != b && s != w) continue;
    std::size_t row = (s == b) ? 0 : 1;
    std::size_t col = (d.labels[r] == 1) ? 0 : 1;
    ++c.n[row][col];
  }
  return c;
}

CellCounts SkewSpec::as_counts() const {
  CellCounts c;
  c.n[0][0] = target[0];
  c.n[0][1] = target[1];
  c.n[1][0] = target[2];
  c.n[1][1] = target[3];
  return c;
}

void validate_spec(const SkewSpec& spec, const CellCounts& available) {
  for (int i = 0; i < 4; ++i) {
    if (spec.target[static_cast<std::size_t>(i)] < 0) {
      throw DataError("skew spec '" + spec.name + "': negative count for " + kCellNames[i]);
    }
  }
  if (spec.target[0] + spec.target[1] == 0) {
    throw DataError("skew spec '" + spec.name + "': group b would be empty");
  }
  if (spec.target[2] + spec.target[3] == 0) {
    throw DataError("skew spec '" + spec.name + "': group w would be empty");
  }
  const Index avail[4] = {available.n[0][0], available.n[0][1], available.n[1][0], available.n[1][1]};
  for (int i = 0; i < 4; ++i) {
    if (spec.target[static_cast<std::size_t>(i)] > avail[i]) {
      throw DataError("skew spec '" + spec.name + "': cell " + kCellNames[i] + " wants " +
                      std::to_string(spec.target[static_cast<std::size_t>(i)]) + " rows but only " +
                      std::to_string(avail[i]) + " available");
    }
  }
}

Dataset apply_skew(const Dataset& d, const SkewSpec& spec) {
  validate_spec(spec, conditional_counts(d));
  Index s_col = d.sensitive_column();
  std::int32_t b = d.unprivileged_index();
  std::int32_t w = d.privileged_index();

  std::array<std::vector<Index>, 4> cells;
  for (Index r = 0; r < d.size(); ++r) {
    std::int32_t s = d.rows(r, s_col);
    if (s != b && s != w) continue;
    std::size_t cell = ((s == b) ? 0u : 2u) + ((d.labels[r] == 1) ? 0u : 1u);
    cells[cell].push_back(r);
  }

  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(spec.as_counts().total()));
  for (std::size_t cell = 0; cell < 4; ++cell) {
    Rng rng(derive_seed(spec.seed, kCellTags[cell]));
    rng.shuffle(cells[cell]);
    Index take = spec.target[cell];
    picked.insert(picked.end(), cells[cell].begin(), cells[cell].begin() + take);
  }
  std::sort(picked.begin(), picked.end());
  return d.select(picked);
}

Index fit_positive_count(Index negatives, double rate) {
  if (rate < 0.0 || rate >= 1.0) throw DataError("fit_positive_count: rate must be in [0,1)");
  if (negatives < 0) throw DataError("fit_positive_count: negative count below zero");
  return static_cast<Index>(std::floor(rate * static_cast<double>(negatives) / (1.0 - rate)));
}

std::vector<SkewSpec> standard_variation_specs(const CellCounts& source, std::uint64_t seed) {
  const Index bp = source.b_pos(), bn = source.b_neg();
  const Index wp = source.w_pos(), wn = source.w_neg();
  if (bp + bn == 0 || wp + wn == 0) throw DataError("variation suite: source has an empty sensitive group");

  std::vector<SkewSpec> specs;
  auto add = [&](const std::string& name, Index a, Index b2, Index c, Index d2) {
    SkewSpec s;
    s.name = name;
    s.target = {a, b2, c, d2};
    s.seed = derive_seed(seed, "variation:" + name);
    specs.push_back(std::move(s));
  };

  add("full", bp, bn, wp, wn);

  Index m = std::min(std::min(bp, bn), std::min(wp, wn));
  if (m == 0) throw DataError("variation suite: balanced variation infeasible, a source cell is empty");
  add("balanced", m, m, m, m);

  if (wp + wn == 0) throw DataError("variation suite: group w empty");
  double w_rate = static_cast<double>(wp) / static_cast<double>(wp + wn);
  Index half_pos = std::min(bp, fit_positive_count(bn, w_rate / 2.0));
  add("half_rate", half_pos, bn, wp, wn);

  Index ext_pos = std::min(bp, fit_positive_count(bn, 0.001));
  Index ebp = even_floor(ext_pos);
  Index ebn = even_floor(bn);
  Index ewp = even_floor(wp);
  Index ewn = even_floor(wn);
  // Flooring the negatives can nudge the rate past the cap; back off if so.
  while (ebp > 0 && static_cast<double>(ebp) > 0.001 * static_cast<double>(ebp + ebn)) ebp -= 2;
  add("extreme", ebp, ebn, ewp, ewn);
  add("extreme_small", ebp / 2, ebn / 2, ewp / 2, ewn / 2);

  return specs;
}

std::vector<NamedDataset> standard_variation_suite(const Dataset& d, std::uint64_t seed) {
  CellCounts counts = conditional_counts(d);
  std::vector<SkewSpec> specs = standard_variation_specs(counts, seed);
  std::vector<NamedDataset> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    out.push_back({spec.name, apply_skew(d, spec)});
  }
  return out;
}

std::vector<SkewSpec> parse_skew_specs_text(const std::string& text) {
  std::vector<SkewSpec> specs;
  bool have_counts = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "name") {
      if (!specs.empty() && !have_counts) {
        throw DataError("skew spec '" + specs.back().name + "' has no 'counts' line");
      }
      SkewSpec spec;
      if (!(ls >> spec.name)) throw DataError("skew spec line " + std::to_string(line_no) + ": missing name value");
      specs.push_back(std::move(spec));
      have_counts = false;
    } else if (specs.empty()) {
      throw DataError("skew spec line " + std::to_string(line_no) + ": 'name' must come first");
    } else if (key == "seed") {
      if (!(ls >> specs.back().seed)) throw DataError("skew spec line " + std::to_string(line_no) + ": bad seed");
    } else if (key == "counts") {
      for (auto& t : specs.back().target) {
        long long v;
        if (!(ls >> v) || v < 0) throw DataError("skew spec line " + std::to_string(line_no) + ": counts needs four non-negative integers");
        t = static_cast<Index>(v);
      }
      have_counts = true;
    } else {
      throw DataError("skew spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (specs.empty()) throw DataError("skew spec: missing 'name' line");
  if (!have_counts) throw DataError("skew spec '" + specs.back().name + "' has no 'counts' line");
  return specs;
}

std::vector<SkewSpec> read_skew_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open skew spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_skew_specs_text(ss.str());
}

SkewSpec parse_skew_spec_text(const std::string& text) {
  std::vector<SkewSpec> specs = parse_skew_specs_text(text);
  if (specs.size() != 1) {
    throw DataError("expected exactly one skew spec, found " + std::to_string(specs.size()));
  }
  return specs.front();
}

SkewSpec read_skew_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open skew spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_skew_spec_text(ss.str());
}

std::string skew_spec_text(const SkewSpec& spec) {
  std::ostringstream out;
  out << "# conditional subsample: counts are n(b,1) n(b,0) n(w,1) n(w,0)\n";
  out << "name " << spec.name << "\n";
  out << "seed " << spec.seed << "\n";
  out << "counts " << spec.target[0] << " " << spec.target[1] << " " << spec.target[2] << " "
      << spec.target[3] << "\n";
  return out.str();
}

void write_skew_spec(const SkewSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write skew spec file: " + path);
  out << skew_spec_text(spec);
}

}  // namespace tabsynth
