#pragma once

#include <span>
#include <string>
#include <vector>

namespace cgrep::stats {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double stddev(std::span<const double> x);
double median(std::span<const double> x);

struct ShapiroWilk {
  double w = 1.0;
  double p = 1.0;
};

/// Royston (1995) approximation, valid for 3 <= n <= 5000.
ShapiroWilk shapiro_wilk(std::span<const double> x);

struct RankSumTest {
  double u = 0.0;  // Mann-Whitney U of the first sample
  double p = 1.0;  // two-sided
  bool exact = false;
};

/// Exact null distribution when both samples are smaller than 50 and there
/// are no ties; otherwise normal approximation with tie and continuity correction.
RankSumTest wilcoxon_mann_whitney(std::span<const double> a, std::span<const double> b);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  double df_between = 0, df_within = 0;
};

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

inline constexpr const char* kTestAnova = "anova";
inline constexpr const char* kTestWilcoxon = "wilcoxon";

struct GatedTest {
  std::string test;
  double p = 1.0;
  bool flagged = false;  // normality could not be assessed (group < 3 or constant)
};

/// Shapiro-Wilk on both groups at `alpha`; both normal -> ANOVA, else Wilcoxon.
GatedTest normality_gated_test(std::span<const double> a, std::span<const double> b,
                               double alpha = 0.05);

/// Standard normal upper tail, two-sided p for a z statistic.
double two_sided_normal_p(double z);

}  // namespace cgrep::stats
