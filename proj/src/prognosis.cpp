#include "cgrep/prognosis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgrep/common.hpp"
#include "cgrep/stats.hpp"

namespace cgrep::prognosis {

std::vector<double> compute_pi(const Coefficients& coefficients, const io::FeatureTable& table) {
  std::vector<double> pi(table.rows(), 0.0);
  for (const auto& [name, beta] : coefficients) {
    if (!table.find(name)) throw InputError("missing feature column " + name);
    const auto& col = table.column(name);
    for (std::size_t i = 0; i < pi.size(); ++i) {
      if (!std::isfinite(col[i])) {
        throw InputError("missing value in feature " + name + " for patient " +
                         table.patient_ids[i]);
      }
      pi[i] += beta * col[i];
    }
  }
  return pi;
}

const char* group_name(Group g) { return g == Group::kGood ? "good" : "bad"; }

std::size_t PrognosticGrouping::count(Group g) const {
  return static_cast<std::size_t>(std::count(group.begin(), group.end(), g));
}

PrognosticGrouping split_by_pi(std::span<const double> pi,
                               const std::vector<std::string>& patient_ids) {
  const std::size_t n = pi.size();
  if (n < 2) throw InputError("prognostic split needs at least 2 patients");
  if (!patient_ids.empty() && patient_ids.size() != n) {
    throw InputError("patient id count does not match PI length");
  }
  for (double v : pi) {
    if (!std::isfinite(v)) throw InputError("prognostic index has missing values");
  }
  const auto [lo, hi] = std::minmax_element(pi.begin(), pi.end());
  if (!(*hi > *lo)) throw InputError("degenerate split: all prognostic indices are equal");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pi[a] != pi[b]) return pi[a] < pi[b];
    return patient_ids.empty() ? a < b : patient_ids[a] < patient_ids[b];
  });
  PrognosticGrouping g;
  g.pi.assign(pi.begin(), pi.end());
  g.group.assign(n, Group::kBad);
  const std::size_t good = n / 2;
  for (std::size_t k = 0; k < good; ++k) g.group[order[k]] = Group::kGood;
  g.threshold = pi[order[good - 1]];
  return g;
}

double curve_distance(const StepSurvivalCurve& c1, const StepSurvivalCurve& c2) {
  const double end = std::min(c1.max_time(), c2.max_time());
  if (!(end > 0)) throw InputError("survival curves have no overlapping time span");
  std::vector<double> cuts{0.0, end};
  for (const auto* c : {&c1, &c2}) {
    for (const auto& p : c->points) {
      if (p.time > 0 && p.time < end) cuts.push_back(p.time);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::size_t i1 = 0, i2 = 0;
  double s1 = 1.0, s2 = 1.0, area = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t = cuts[k];
    while (i1 < c1.points.size() && c1.points[i1].time <= t) s1 = c1.points[i1++].survival;
    while (i2 < c2.points.size() && c2.points[i2].time <= t) s2 = c2.points[i2++].survival;
    area += std::abs(s1 - s2) * (cuts[k + 1] - t);
  }
  return std::clamp(area / end, 0.0, 1.0);
}

namespace {

survival::SurvivalRecords subset(const survival::SurvivalRecords& records,
                                 const std::vector<Group>& group, Group g) {
  survival::SurvivalRecords out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (group[i] == g) out.push_back(records[i]);
  }
  if (out.empty()) throw InputError("prognostic group is empty");
  return out;
}

double group_distance(const survival::SurvivalRecords& records, const std::vector<Group>& group,
                      double alpha) {
  return curve_distance(survival::cg_curve(subset(records, group, Group::kGood), alpha),
                        survival::cg_curve(subset(records, group, Group::kBad), alpha));
}

}  // namespace

std::array<StepSurvivalCurve, 2> group_curves(const survival::SurvivalRecords& records,
                                              const PrognosticGrouping& grouping, double alpha) {
  if (grouping.group.size() != records.size()) throw InputError("grouping does not match records");
  return {survival::cg_curve(subset(records, grouping.group, Group::kGood), alpha),
          survival::cg_curve(subset(records, grouping.group, Group::kBad), alpha)};
}

PermutationResult permutation_pvalue(const survival::SurvivalRecords& records,
                                     const PrognosticGrouping& grouping, double alpha, int b,
                                     std::uint64_t seed) {
  if (b < 1) throw ParameterError("number of permutations must be >= 1");
  if (grouping.group.size() != records.size()) throw InputError("grouping does not match records");
  PermutationResult res;
  res.replicates = b;
  res.d_observed = group_distance(records, grouping.group, alpha);
  std::vector<double> d(static_cast<std::size_t>(b));
  parallel_for(d.size(), [&](std::size_t r) {
    Rng rng = make_rng(seed, streams::kPermutation, r);
    std::vector<Group> shuffled = grouping.group;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    d[r] = group_distance(records, shuffled, alpha);
  });
  std::size_t ge = 0;
  for (double v : d) {
    if (v >= res.d_observed - 1e-12) ++ge;
  }
  res.p = static_cast<double>(1 + ge) / static_cast<double>(b + 1);
  return res;
}

GroupStats describe(std::span<const double> values) {
  GroupStats s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = stats::mean(values);
  s.sd = stats::stddev(values);
  s.se = s.sd / std::sqrt(static_cast<double>(s.n));
  s.median = stats::median(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

GroupComparison group_comparison(std::span<const double> values, std::span<const Group> groups) {
  if (values.size() != groups.size()) throw InputError("values and groups differ in length");
  std::array<std::vector<double>, 2> parts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    parts[static_cast<int>(groups[i])].push_back(values[i]);
  }
  if (parts[0].empty() || parts[1].empty()) throw InputError("group comparison needs two groups");
  GroupComparison out;
  out.groups = {describe(parts[0]), describe(parts[1])};
  const stats::GatedTest t = stats::normality_gated_test(parts[0], parts[1]);
  out.test = t.test;
  out.p = t.p;
  out.flagged = t.flagged;
  return out;
}

CrossTab cross_tab(const PrognosticGrouping& grouping, std::span<const int> rep_labels) {
  if (rep_labels.size() != grouping.group.size()) {
    throw InputError("REP labels do not match the grouping");
  }
  CrossTab t;
  for (std::size_t i = 0; i < rep_labels.size(); ++i) {
    if (rep_labels[i] != 0 && rep_labels[i] != 1) throw InputError("REP labels must be 0/1");
    ++t.counts[rep_labels[i]][static_cast<int>(grouping.group[i])];
  }
  for (int r = 0; r < 2; ++r) {
    const double total = static_cast<double>(t.counts[r][0] + t.counts[r][1]);
    t.row_defined[r] = total > 0;
    for (int g = 0; g < 2; ++g) {
      t.row_percent[r][g] = total > 0 ? 100.0 * static_cast<double>(t.counts[r][g]) / total
                                      : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return t;
}

}  // namespace cgrep::prognosis
