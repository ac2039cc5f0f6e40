#include "cgrep/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cgrep/common.hpp"
#include "cgrep/stats.hpp"

namespace cgrep::survival {

SurvivalRecords records_from_table(const io::FeatureTable& table) {
  if (!table.time_days || !table.event) {
    throw InputError("feature table lacks time_days/event columns");
  }
  SurvivalRecords out;
  out.reserve(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const double t = (*table.time_days)[i];
    const double e = (*table.event)[i];
    if (!std::isfinite(t) || !std::isfinite(e)) {
      throw InputError("missing survival data for patient " + table.patient_ids[i]);
    }
    out.push_back({table.patient_ids[i], t, static_cast<int>(e)});
  }
  validate_records(out);
  return out;
}

void validate_records(const SurvivalRecords& records) {
  if (records.empty()) throw InputError("no survival records");
  for (const auto& r : records) {
    if (!(r.t > 0) || !std::isfinite(r.t)) throw InputError("survival time must be > 0");
    if (r.delta != 0 && r.delta != 1) throw InputError("event indicator must be 0 or 1");
  }
}

std::vector<std::size_t> time_order(const SurvivalRecords& records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].t != records[b].t) return records[a].t < records[b].t;
    return records[a].delta > records[b].delta;
  });
  return order;
}

std::vector<double> jittered_times(const SurvivalRecords& records) {
  const auto order = time_order(records);
  std::vector<double> out(records.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const bool tied = (k > 0 && records[order[k - 1]].t == records[i].t) ||
                      (k + 1 < order.size() && records[order[k + 1]].t == records[i].t);
    out[i] = records[i].t + (tied ? 1e-9 * static_cast<double>(k) : 0.0);
  }
  return out;
}

namespace {

void check_covariate(const SurvivalRecords& records, std::span<const double> x) {
  if (x.size() != records.size()) throw InputError("covariate length does not match records");
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("covariate has missing values");
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*hi > *lo)) throw InputError("covariate is constant");
}

struct CoxState {
  double loglik = 0, score = 0, info = 0;
};

/// Breslow partial likelihood with centred covariate, processed from the
/// latest time backwards so the risk-set sums accumulate.
CoxState cox_state(const SurvivalRecords& r, std::span<const double> xc,
                   const std::vector<std::size_t>& order, double beta) {
  CoxState s;
  double s0 = 0, s1 = 0, s2 = 0;
  std::size_t k = order.size();
  while (k > 0) {
    std::size_t j = k;  // group [j, k) shares one time
    while (j > 0 && r[order[j - 1]].t == r[order[k - 1]].t) --j;
    double dx = 0, d = 0;
    for (std::size_t m = j; m < k; ++m) {
      const std::size_t i = order[m];
      const double w = std::exp(beta * xc[i]);
      s0 += w;
      s1 += w * xc[i];
      s2 += w * xc[i] * xc[i];
      if (r[i].delta == 1) {
        dx += xc[i];
        d += 1;
      }
    }
    if (d > 0) {
      const double mu = s1 / s0;
      s.loglik += beta * dx - d * std::log(s0);
      s.score += dx - d * mu;
      s.info += d * (s2 / s0 - mu * mu);
    }
    k = j;
  }
  return s;
}

std::vector<double> centred(std::span<const double> x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= m;
  return out;
}

}  // namespace

double cox_partial_loglik(const SurvivalRecords& records, std::span<const double> x,
                          double beta) {
  validate_records(records);
  if (x.size() != records.size()) throw InputError("covariate length does not match records");
  // centring leaves the partial likelihood unchanged
  return cox_state(records, centred(x), time_order(records), beta).loglik;
}

CoxEstimate cox_univariate(const SurvivalRecords& records, std::span<const double> x) {
  validate_records(records);
  check_covariate(records, x);
  int events = 0;
  for (const auto& r : records) events += r.delta;
  if (events < 2) throw InputError("Cox regression needs at least 2 events");

  const auto xc = centred(x);
  const auto order = time_order(records);
  CoxEstimate est;
  double beta = 0.0;
  CoxState s = cox_state(records, xc, order, beta);
  for (int it = 0; it < 100; ++it) {
    if (std::abs(s.score) < 1e-8) {
      est.converged = true;
      break;
    }
    if (!(s.info > 0)) break;
    double step = s.score / s.info;
    CoxState next;
    double trial = beta;
    for (int h = 0; h < 40; ++h) {
      trial = beta + step;
      next = cox_state(records, xc, order, trial);
      if (std::isfinite(next.loglik) && next.loglik >= s.loglik - 1e-12 * std::abs(s.loglik)) break;
      step *= 0.5;
    }
    beta = trial;
    s = next;
    est.iterations = it + 1;
  }
  if (!est.converged && std::abs(s.score) < 1e-8) est.converged = true;
  est.beta = beta;
  est.score = s.score;
  est.loglik = s.loglik;
  est.se = s.info > 0 ? 1.0 / std::sqrt(s.info) : std::numeric_limits<double>::quiet_NaN();
  est.wald_p = s.info > 0 ? stats::two_sided_normal_p(beta / est.se) : 1.0;
  if (est.wald_p <= 0) est.wald_p = std::numeric_limits<double>::min();
  return est;
}

double clayton(double u, double v, double alpha) {
  if (!(u > 0 && u <= 1) || !(v > 0 && v <= 1)) {
    throw ParameterError("copula arguments must lie in (0,1]");
  }
  if (!(alpha >= 0)) throw ParameterError("Clayton alpha must be >= 0");
  if (alpha == 0) return u * v;
  // u^-a + v^-a - 1 = 1 + expm1(-a log u) + expm1(-a log v)
  const double s = std::expm1(-alpha * std::log(u)) + std::expm1(-alpha * std::log(v));
  return std::exp(-std::log1p(s) / alpha);
}

double tau_of_alpha(double alpha) {
  if (!(alpha >= 0)) throw ParameterError("alpha must be >= 0");
  if (std::isinf(alpha)) return 1.0;
  return alpha / (alpha + 2.0);
}

StepSurvivalCurve kaplan_meier(const SurvivalRecords& records) { return cg_curve(records, 0.0); }

StepSurvivalCurve cg_curve(const SurvivalRecords& records, double alpha) {
  validate_records(records);
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw ParameterError("alpha must be finite and >= 0");
  const auto order = time_order(records);
  const std::size_t n = records.size();
  const double dn = static_cast<double>(n);
  StepSurvivalCurve curve;
  curve.points.reserve(n);
  double s = 1.0, sum = 0.0;
  bool dropped = false;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = records[order[k]];
    const std::size_t at_risk = n - k;
    if (r.delta == 1 && !dropped) {
      if (at_risk == 1) {
        dropped = true;
        s = 0.0;
      } else if (alpha == 0.0) {
        s *= static_cast<double>(at_risk - 1) / static_cast<double>(at_risk);
      } else {
        const double lo = std::log(static_cast<double>(at_risk - 1) / dn);
        const double hi = std::log(static_cast<double>(at_risk) / dn);
        sum += std::expm1(-alpha * lo) - std::expm1(-alpha * hi);
        s = std::exp(-std::log1p(sum) / alpha);
      }
    }
    curve.points.push_back({r.t, s, static_cast<int>(at_risk), r.delta == 0});
  }
  return curve;
}

double CumulativeHazard::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double harrell_c(std::span<const double> risk, const SurvivalRecords& records) {
  if (risk.size() != records.size()) throw InputError("risk length does not match records");
  double usable = 0, score = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].delta != 1) continue;
    for (std::size_t j = 0; j < records.size(); ++j) {
      if (!(records[i].t < records[j].t)) continue;
      usable += 1;
      if (risk[i] > risk[j]) {
        score += 1;
      } else if (risk[i] == risk[j]) {
        score += 0.5;
      }
    }
  }
  if (usable == 0) throw InputError("no usable pairs for the concordance index");
  return score / usable;
}

io::FeatureTable minmax_scaled(const io::FeatureTable& table) {
  io::FeatureTable out = table;
  for (auto& col : out.columns) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : col) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    for (double& v : col) {
      if (!std::isfinite(v)) continue;
      v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }
  }
  return out;
}

namespace {

std::vector<double> column_of(const io::FeatureTable& table, const std::string& name) {
  const auto& col = table.column(name);
  for (double v : col) {
    if (!std::isfinite(v)) throw InputError("missing value in feature " + name);
  }
  return col;
}

}  // namespace

AlphaSelection select_alpha(const SurvivalRecords& records, const io::FeatureTable& table,
                            const std::vector<std::string>& candidates,
                            const std::vector<double>& grid, int folds, std::uint64_t seed) {
  validate_records(records);
  if (grid.empty()) throw ParameterError("alpha grid is empty");
  for (double a : grid) {
    if (!(a >= 0) || !std::isfinite(a)) throw ParameterError("alpha grid values must be >= 0");
  }
  if (folds < 2) throw ParameterError("folds must be >= 2");
  if (candidates.empty()) throw InputError("no candidate features for alpha selection");
  if (table.rows() != records.size()) throw InputError("table rows do not match records");

  const io::FeatureTable scaled = minmax_scaled(table);
  std::vector<std::vector<double>> cols;
  for (const auto& name : candidates) cols.push_back(column_of(scaled, name));

  // stratify on the event indicator
  Rng rng = make_rng(seed, streams::kCvFolds);
  std::vector<std::size_t> ev, ce;
  for (std::size_t i = 0; i < records.size(); ++i) (records[i].delta ? ev : ce).push_back(i);
  std::shuffle(ev.begin(), ev.end(), rng);
  std::shuffle(ce.begin(), ce.end(), rng);
  const std::size_t nf = static_cast<std::size_t>(folds);
  std::vector<int> fold_of(records.size());
  for (std::size_t k = 0; k < ev.size(); ++k) fold_of[ev[k]] = static_cast<int>(k % nf);
  for (std::size_t k = 0; k < ce.size(); ++k) fold_of[ce[k]] = static_cast<int>((ev.size() + k) % nf);
  if (ev.size() < nf) throw InputError("fold with no events");

  const std::size_t cells = grid.size() * nf;
  std::vector<std::vector<double>> risk(grid.size(), std::vector<double>(records.size(), 0.0));
  DependentCoxOptions opt;
  opt.compute_se = false;
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ai = cell / nf;
    const int f = static_cast<int>(cell % nf);
    SurvivalRecords train;
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (fold_of[i] == f) {
        test_idx.push_back(i);
      } else {
        train_idx.push_back(i);
        train.push_back(records[i]);
      }
    }
    std::vector<double> x(train_idx.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (std::size_t k = 0; k < train_idx.size(); ++k) x[k] = cols[j][train_idx[k]];
      const double b = dependent_cox(train, x, grid[ai], opt).beta;
      for (auto i : test_idx) risk[ai][i] += b * cols[j][i];
    }
  });

  AlphaSelection sel;
  sel.grid = grid;
  for (std::size_t a = 0; a < grid.size(); ++a) sel.cv_cindex.push_back(harrell_c(risk[a], records));
  std::size_t best = 0;
  for (std::size_t a = 1; a < grid.size(); ++a) {
    const double c = sel.cv_cindex[a], cb = sel.cv_cindex[best];
    if (c > cb || (c == cb && grid[a] < grid[best])) best = a;
  }
  sel.alpha_hat = grid[best];
  sel.tau_hat = tau_of_alpha(sel.alpha_hat);
  return sel;
}

std::vector<SelectedFeature> select_features_dependent(const SurvivalRecords& records,
                                                       const io::FeatureTable& table,
                                                       double alpha, double p_threshold,
                                                       const std::vector<std::string>& candidates) {
  validate_records(records);
  if (table.rows() != records.size()) throw InputError("table rows do not match records");
  const std::vector<std::string>& names = candidates.empty() ? table.feature_names : candidates;
  const io::FeatureTable scaled = minmax_scaled(table);
  std::vector<std::vector<double>> cols;
  for (const auto& name : names) cols.push_back(column_of(scaled, name));

  std::vector<DependentCoxEstimate> fits(names.size());
  parallel_for(names.size(), [&](std::size_t j) { fits[j] = dependent_cox(records, cols[j], alpha); });

  std::vector<SelectedFeature> out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (fits[j].wald_p < p_threshold) out.push_back({names[j], fits[j].beta, fits[j].wald_p});
  }
  std::stable_sort(out.begin(), out.end(), [](const SelectedFeature& a, const SelectedFeature& b) {
    return a.p_value < b.p_value;
  });
  return out;
}

}  // namespace cgrep::survival
