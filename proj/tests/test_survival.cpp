#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cgrep/common.hpp"
#include "cgrep/survival.hpp"
#include "cgrep/synth.hpp"

using namespace cgrep;
using namespace cgrep::survival;

namespace {

SurvivalRecords records(std::initializer_list<std::pair<double, int>> rows) {
  SurvivalRecords r;
  for (const auto& [t, d] : rows) r.push_back({"P" + std::to_string(r.size()), t, d});
  return r;
}

// Breslow partial log-likelihood straight from its definition.
double oracle_loglik(const SurvivalRecords& r, const std::vector<double>& x, double beta) {
  double ll = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!r[i].delta) continue;
    double risk = 0;
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[j].t >= r[i].t) risk += std::exp(beta * x[j]);
    ll += beta * x[i] - std::log(risk);
  }
  return ll;
}

double oracle_c(const std::vector<double>& risk, const SurvivalRecords& r) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!(r[i].t < r[j].t && r[i].delta == 1)) continue;
      den += 1;
      num += risk[i] > risk[j] ? 1 : (risk[i] == risk[j] ? 0.5 : 0);
    }
  return num / den;
}

// Exponential survival with rate e^{beta x}, independent exponential censoring.
std::pair<SurvivalRecords, std::vector<double>> cox_data(std::size_t n, double beta,
                                                         double censor_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::exponential_distribution<double> c(censor_rate);
  SurvivalRecords r;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u(rng) * 2 - 1;
    std::exponential_distribution<double> e(std::exp(beta * x[i]));
    const double t = e(rng), cc = c(rng);
    r.push_back({"P" + std::to_string(i), std::min(t, cc), t <= cc ? 1 : 0});
  }
  return {r, x};
}

}  // namespace

TEST_CASE("time order and jitter") {
  const auto r = records({{2, 0}, {1, 1}, {2, 1}, {2, 0}});
  CHECK(time_order(r) == std::vector<std::size_t>{1, 2, 0, 3});
  const auto j = jittered_times(r);
  CHECK(j[1] == 1.0);
  CHECK(j[2] == 2.0 + 1e-9);
  CHECK(j[0] == 2.0 + 2e-9);
  CHECK(j[3] == 2.0 + 3e-9);
  CHECK_THROWS_AS(validate_records(records({{0, 1}})), InputError);
  CHECK_THROWS_AS(validate_records(records({{1, 2}})), InputError);
}

TEST_CASE("Clayton copula") {
  for (double a : {0.0, 0.5, 2.0, 18.0}) CHECK(clayton(0.37, 1.0, a) == doctest::Approx(0.37));
  CHECK(clayton(0.5, 0.5, 2) == doctest::Approx(1 / std::sqrt(7.0)).epsilon(1e-12));
  CHECK(clayton(0.3, 0.6, 0) == doctest::Approx(0.18).epsilon(1e-15));
  CHECK_THROWS_AS(clayton(0.0, 0.5, 1), ParameterError);
  CHECK_THROWS_AS(clayton(0.5, 1.5, 1), ParameterError);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-6, 1);
  std::uniform_real_distribution<double> ga(0, 20);
  for (int k = 0; k < 10000; ++k) {
    double u1 = u(rng), u2 = u(rng), v1 = u(rng), v2 = u(rng);
    if (u1 > u2) std::swap(u1, u2);
    if (v1 > v2) std::swap(v1, v2);
    const double a = ga(rng);
    const double vol = clayton(u2, v2, a) - clayton(u1, v2, a) - clayton(u2, v1, a) +
                       clayton(u1, v1, a);
    CHECK(vol >= -1e-12);
  }
}

TEST_CASE("Kendall tau mapping") {
  CHECK(tau_of_alpha(18) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(tau_of_alpha(0) == 0);
  CHECK(tau_of_alpha(2) == 0.5);
  CHECK_THROWS_AS(tau_of_alpha(-1), ParameterError);
  double prev = -1;
  for (double a = 0; a < 100; a += 0.5) {
    CHECK(tau_of_alpha(a) > prev);
    CHECK(tau_of_alpha(a) < 1);
    prev = tau_of_alpha(a);
  }
}

TEST_CASE("copula-graphic estimator") {
  const auto none = cg_curve(records({{1, 0}, {2, 0}, {3, 0}}), 3.0);
  for (const auto& p : none.points) CHECK(p.survival == 1.0);
  CHECK(none.censor_mark_count() == 3);

  const auto hand = cg_curve(records({{1, 1}, {2, 0}, {3, 1}}), 2.0);
  REQUIRE(hand.points.size() == 3);
  CHECK(hand.at(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(hand.at(2.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(hand.at(3.0) == 0.0);
  CHECK(hand.at(0.5) == 1.0);

  std::mt19937_64 rng(77);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> cens(0, 0.5);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 5 + rep % 196;
    const double frac = cens(rng);
    SurvivalRecords r;
    std::bernoulli_distribution censored(frac);
    for (std::size_t i = 0; i < n; ++i) r.push_back({"", e(rng), censored(rng) ? 0 : 1});
    const auto km = kaplan_meier(r);
    const auto cg = cg_curve(r, 1e-8);
    REQUIRE(km.points.size() == cg.points.size());
    double prev = 1.0;
    for (std::size_t k = 0; k < km.points.size(); ++k) {
      worst = std::max(worst, std::abs(km.points[k].survival - cg.points[k].survival));
      CHECK(cg.points[k].survival <= prev);
      prev = cg.points[k].survival;
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Kaplan-Meier hand case") {
  const auto km = kaplan_meier(records({{1, 1}, {2, 0}, {3, 1}, {4, 1}}));
  CHECK(km.at(1) == doctest::Approx(0.75));
  CHECK(km.at(3) == doctest::Approx(0.375));
  CHECK(km.at(4) == 0.0);
}

TEST_CASE("univariate Cox") {
  const auto [r, x] = cox_data(200, 0.8, 0.5, 123);
  const auto est = cox_univariate(r, x);
  REQUIRE(est.converged);
  CHECK(std::abs(est.beta - 0.8) < 0.2);
  CHECK(std::abs(est.score) < 1e-6);
  double best = -3, best_ll = -1e300;
  for (int k = 0; k <= 6000; ++k) {
    const double b = -3 + 1e-3 * k;
    const double ll = oracle_loglik(r, x, b);
    if (ll > best_ll) {
      best_ll = ll;
      best = b;
    }
  }
  CHECK(std::abs(est.beta - best) <= 1e-3);
  CHECK(cox_partial_loglik(r, x, est.beta) ==
        doctest::Approx(oracle_loglik(r, x, est.beta)).epsilon(1e-12));
  CHECK(cox_partial_loglik(r, x, est.beta) >= cox_partial_loglik(r, x, est.beta + 0.01));
  CHECK(cox_partial_loglik(r, x, est.beta) >= cox_partial_loglik(r, x, est.beta - 0.01));
  CHECK(est.se > 0);
  CHECK(est.wald_p > 0);
  CHECK(est.wald_p <= 1);

  CHECK_THROWS_AS(cox_univariate(r, std::vector<double>(r.size(), 1.0)), InputError);
  CHECK_THROWS_AS(cox_univariate(records({{1, 1}, {2, 0}, {3, 0}}), std::vector<double>{1, 2, 3}),
                  InputError);
}

TEST_CASE("univariate Cox Wald p is uniform under the null") {
  std::vector<double> ps;
  for (int rep = 0; rep < 200; ++rep) {
    auto [r, x] = cox_data(80, 0.0, 0.3, 1000 + rep);
    ps.push_back(cox_univariate(r, x).wald_p);
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ks = std::max({ks, std::abs(ps[i] - double(i) / ps.size()),
                   std::abs(ps[i] - double(i + 1) / ps.size())});
  }
  CHECK(ks < 0.1);
}

TEST_CASE("Harrell's c") {
  const auto r = records({{1, 1}, {2, 1}, {3, 0}, {4, 1}, {5, 0}});
  CHECK(harrell_c(std::vector<double>{5, 4, 3, 2, 1}, r) == 1.0);
  CHECK(harrell_c(std::vector<double>(5, 0.3), r) == 0.5);
  const std::vector<double> risk{0.2, 0.9, 0.1, 0.4, 0.4};
  CHECK(harrell_c(risk, r) == doctest::Approx(oracle_c(risk, r)).epsilon(1e-15));
  std::vector<double> cubed;
  for (double v : risk) cubed.push_back(v * v * v + 4);
  CHECK(harrell_c(cubed, r) == harrell_c(risk, r));
  CHECK_THROWS_AS(harrell_c(std::vector<double>{1, 2}, records({{1, 0}, {2, 0}})), InputError);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 20; ++rep) {
    SurvivalRecords rr;
    std::vector<double> rk;
    for (int i = 0; i < 30; ++i) {
      rr.push_back({"", std::round(u(rng) * 10) + 1, u(rng) < 0.7});
      rk.push_back(std::round(u(rng) * 5));
    }
    CHECK(harrell_c(rk, rr) == doctest::Approx(oracle_c(rk, rr)).epsilon(1e-14));
  }
}

TEST_CASE("min-max scaling") {
  io::FeatureTable t;
  t.patient_ids = {"a", "b", "c"};
  t.add_column("x", {2, 4, 6});
  t.add_column("k", {3, 3, 3});
  t.add_column("m", {1, std::nan(""), 3});
  const auto s = minmax_scaled(t);
  CHECK(s.column("x") == std::vector<double>{0, 0.5, 1});
  CHECK(s.column("k") == std::vector<double>{0, 0, 0});
  CHECK(std::isnan(s.column("m")[1]));
  CHECK(s.column("m")[2] == 1);
}

TEST_CASE("alpha selection and dependent feature selection plumbing") {
  synth::SimSpec spec;
  spec.n = 120;
  spec.alpha = 2;
  spec.beta = {1.5, 0.0};
  spec.gamma = {0.5, 0.0};
  spec.lambda_u = 1.25;
  spec.seed = 5;
  const auto data = synth::simulate_dependent(spec);
  const auto sel = select_alpha(data.records, data.table, {"x1", "x2"}, {2.0}, 5, 1);
  CHECK(sel.alpha_hat == 2.0);
  CHECK(sel.tau_hat == 0.5);
  REQUIRE(sel.cv_cindex.size() == 1);
  CHECK(sel.cv_cindex[0] > 0.5);
  CHECK(sel.cv_cindex[0] <= 1.0);

  const auto grid = select_alpha(data.records, data.table, {"x1", "x2"}, {0, 1, 4}, 4, 1);
  CHECK(std::find(grid.grid.begin(), grid.grid.end(), grid.alpha_hat) != grid.grid.end());
  CHECK(grid.tau_hat == tau_of_alpha(grid.alpha_hat));
  CHECK(select_alpha(data.records, data.table, {"x1", "x2"}, {0, 1, 4}, 4, 1).cv_cindex ==
        grid.cv_cindex);

  CHECK(select_features_dependent(data.records, data.table, 2.0, 0.0).empty());
  const auto chosen = select_features_dependent(data.records, data.table, 2.0, 0.05);
  REQUIRE_FALSE(chosen.empty());
  CHECK(chosen.front().name == "x1");
  for (std::size_t k = 1; k < chosen.size(); ++k) CHECK(chosen[k - 1].p_value <= chosen[k].p_value);
  CHECK_THROWS_AS(select_alpha(data.records, data.table, {"x1"}, {}, 5, 1), ParameterError);
}
