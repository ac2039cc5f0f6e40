#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cgrep/curve.hpp"
#include "cgrep/data_io.hpp"
#include "cgrep/survival.hpp"

namespace cgrep::prognosis {

using Coefficients = std::vector<std::pair<std::string, double>>;

/// PI_i = sum_j beta_j x_ij over the named columns.
std::vector<double> compute_pi(const Coefficients& coefficients, const io::FeatureTable& table);

enum class Group : int { kGood = 0, kBad = 1 };
const char* group_name(Group g);

struct PrognosticGrouping {
  std::vector<double> pi;
  std::vector<Group> group;
  double threshold = 0.0;  // largest PI in the good group

  std::size_t count(Group g) const;
};

/// Median split: the lower floor(n/2) PIs form the good group, the rest the
/// bad group. Equal PIs are ordered by patient id (or index when ids are empty).
PrognosticGrouping split_by_pi(std::span<const double> pi,
                               const std::vector<std::string>& patient_ids = {});

/// Mean absolute vertical distance between two step curves over
/// [0, min(max observed times)], computed exactly on the step partition.
double curve_distance(const StepSurvivalCurve& c1, const StepSurvivalCurve& c2);

struct PermutationResult {
  double d_observed = 0.0;
  double p = 1.0;
  int replicates = 0;
};

/// Copula-graphic curves per group at alpha; p = (1 + #{D_b >= D_obs}) / (B + 1)
/// over size-preserving label shuffles.
PermutationResult permutation_pvalue(const survival::SurvivalRecords& records,
                                     const PrognosticGrouping& grouping, double alpha, int b,
                                     std::uint64_t seed);

/// Curves of the good and bad groups.
std::array<StepSurvivalCurve, 2> group_curves(const survival::SurvivalRecords& records,
                                              const PrognosticGrouping& grouping, double alpha);

struct GroupStats {
  std::size_t n = 0;
  double mean = 0, sd = 0, se = 0, median = 0, min = 0, max = 0;
};

struct GroupComparison {
  std::array<GroupStats, 2> groups;
  std::string test;
  double p = 1.0;
  bool flagged = false;
  double distance = std::numeric_limits<double>::quiet_NaN();
};

GroupStats describe(std::span<const double> values);

/// Descriptive statistics per group plus the normality-gated two-group test.
GroupComparison group_comparison(std::span<const double> values, std::span<const Group> groups);

struct CrossTab {
  /// counts[rep][group]: rep 0 = non-REP, 1 = REP; group 0 = good, 1 = bad
  std::array<std::array<std::size_t, 2>, 2> counts{};
  /// Row percentages; NaN (undefined) for an empty row.
  std::array<std::array<double, 2>, 2> row_percent{};
  std::array<bool, 2> row_defined{};
};

CrossTab cross_tab(const PrognosticGrouping& grouping, std::span<const int> rep_labels);

}  // namespace cgrep::prognosis
