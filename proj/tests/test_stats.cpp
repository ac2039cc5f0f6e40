#include <doctest.h>

#include <cmath>
#include <random>

#include "cgrep/common.hpp"
#include "cgrep/stats.hpp"

using namespace cgrep;
using namespace cgrep::stats;

// Reference values computed with scipy.stats (shapiro, mannwhitneyu, f_oneway).

TEST_CASE("Shapiro-Wilk matches reference values") {
  const std::vector<double> a{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.9, 3.7, 2.2};
  auto r = shapiro_wilk(a);
  CHECK(r.w == doctest::Approx(0.9465216880726992).epsilon(1e-6));
  CHECK(r.p == doctest::Approx(0.6275681650888538).epsilon(1e-4));

  const std::vector<double> b{148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236};
  r = shapiro_wilk(b);
  CHECK(r.w == doctest::Approx(0.7888146948631716).epsilon(1e-6));
  CHECK(r.p == doctest::Approx(0.006703814061898823).epsilon(1e-3));

  r = shapiro_wilk(std::vector<double>{1, 2, 4});
  CHECK(r.w == doctest::Approx(0.9642857142857142).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(0.6368868450289689).epsilon(1e-4));

  const std::vector<double> z{
      0.12573,   -0.132105, 0.640423,  0.1049,    -0.535669, 0.361595,  1.304,     0.947081,
      -0.703735, -1.265421, -0.623274, 0.041326,  -2.325031, -0.218792, -1.245911, -0.732267,
      -0.544259, -0.3163,   0.411631,  1.042513,  -0.128535, 1.366463,  -0.665195, 0.35151,
      0.90347,   0.094012,  -0.743499, -0.921725, -0.457726, 0.220195,  -1.009618, -0.209176,
      -0.159225, 0.540846,  0.214659,  0.355373,  -0.653829, -0.129614, 0.783975,  1.493431,
      -1.259066, 1.513924,  1.345875,  0.781311,  0.264456,  -0.313923, 1.458021,  1.960258,
      1.801635,  1.315104,  0.35738,   -1.208319, -0.004454, 0.656475,  -1.288361, 0.395122,
      0.429864,  0.696043,  -1.184118, -0.661703};
  r = shapiro_wilk(z);
  CHECK(r.w == doctest::Approx(0.9855898566080709).epsilon(1e-6));
  CHECK(r.p == doctest::Approx(0.7007150816816172).epsilon(1e-3));

  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1, 2}), InputError);
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{3, 3, 3, 3}), NumericalError);
}

TEST_CASE("Wilcoxon-Mann-Whitney") {
  auto r = wilcoxon_mann_whitney(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
  CHECK(r.exact);
  CHECK(r.p == doctest::Approx(0.1).epsilon(1e-12));

  const std::vector<double> x{1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30};
  const std::vector<double> y{0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.07, 3.14, 1.28};
  r = wilcoxon_mann_whitney(x, y);
  CHECK(r.exact);
  CHECK(r.u == 58);
  CHECK(r.p == doctest::Approx(0.13591114767585355).epsilon(1e-12));

  const std::vector<double> p{1, 2, 2, 3, 4, 5, 5, 5, 6, 7};
  const std::vector<double> q{3, 4, 4, 5, 6, 8, 8, 9, 9, 10, 11};
  r = wilcoxon_mann_whitney(p, q);
  CHECK_FALSE(r.exact);
  CHECK(r.u == 22.5);
  CHECK(r.p == doctest::Approx(0.02336563279255183).epsilon(1e-9));

  std::vector<double> big1, big2;
  for (int i = 0; i < 60; ++i) big1.push_back(i);
  for (int i = 0; i < 55; ++i) big2.push_back(i + 20.5);
  r = wilcoxon_mann_whitney(big1, big2);
  CHECK_FALSE(r.exact);
  CHECK(r.p == doctest::Approx(1.1258207796772894e-06).epsilon(1e-6));

  const std::vector<double> same{1, 2, 3, 4, 5};
  CHECK(wilcoxon_mann_whitney(same, same).p == doctest::Approx(1.0));
}

TEST_CASE("one-way ANOVA") {
  const auto r = one_way_anova({{1, 2, 3, 4}, {2, 4, 6, 8, 10}, {5, 5, 6}});
  CHECK(r.f == doctest::Approx(2.8576642335766427).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.10942749806820971).epsilon(1e-10));
  CHECK(r.df_between == 2);
  CHECK(r.df_within == 9);
  CHECK(one_way_anova({{1, 1}, {1, 1}}).p == 1.0);
  CHECK(one_way_anova({{1, 1}, {2, 2}}).p == 0.0);
}

TEST_CASE("normality gating routes tests") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n;
  std::exponential_distribution<double> e(1.0);
  int anova = 0, wilcoxon = 0, significant = 0, strong = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(30), b(30), c(40), d(40), s(30);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng) + 1;
    for (auto& v : c) v = e(rng);
    for (auto& v : d) v = e(rng) + 0.5;
    for (auto& v : s) v = n(rng) + 2;
    strong += normality_gated_test(a, s).p < 0.001;
    const auto g = normality_gated_test(a, b);
    anova += g.test == kTestAnova;
    significant += g.p < 0.01;
    wilcoxon += normality_gated_test(c, d).test == kTestWilcoxon;
  }
  // both groups pass Shapiro-Wilk at 0.05 with probability 0.95^2
  CHECK(anova >= 82);
  // two-sided power of a unit shift at n = 30, alpha = 0.01 is about 0.89
  CHECK(significant >= 80);
  CHECK(strong >= 99);
  CHECK(wilcoxon >= 95);

  const auto small = normality_gated_test(std::vector<double>{1, 2}, std::vector<double>{3, 4, 5});
  CHECK(small.flagged);
  CHECK(small.test == kTestWilcoxon);
  const std::vector<double> same{1.5, 2.5, 0.5, 3.5, 2.0};
  CHECK(normality_gated_test(same, same).p == doctest::Approx(1.0));
}

TEST_CASE("descriptive helpers") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(mean(v) == 2.5);
  CHECK(median(v) == 2.5);
  CHECK(stddev(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(two_sided_normal_p(0) == doctest::Approx(1.0));
  CHECK(two_sided_normal_p(1.959963984540054) == doctest::Approx(0.05));
}
