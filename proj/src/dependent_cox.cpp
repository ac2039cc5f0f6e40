#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cgrep/common.hpp"
#include "cgrep/stats.hpp"
#include "cgrep/survival.hpp"

namespace cgrep::survival {

namespace {

/// Per-subject term h(A, B) = delta*a + (1-delta)*b - (1/alpha + 1) log(e^a + e^b - 1)
/// with a = alpha*A, b = alpha*B, and its derivatives in A and B.
struct HTerms {
  double h = 0, ha = 0, hb = 0, haa = 0, hab = 0, hbb = 0;
};

HTerms h_terms(double alpha, int delta, double big_a, double big_b) {
  HTerms r;
  if (alpha == 0.0) {
    r.h = -big_a - big_b;
    r.ha = -1.0;
    r.hb = -1.0;
    return r;
  }
  const double a = alpha * big_a, b = alpha * big_b;
  const double m = std::max(a, b);
  double log_e;
  if (m > 1.0) {
    log_e = m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
  } else {
    log_e = std::log1p(std::expm1(a) + std::expm1(b));
  }
  const double wa = std::exp(a - log_e), wb = std::exp(b - log_e);
  r.h = (delta ? a : b) - (1.0 / alpha + 1.0) * log_e;
  r.ha = (delta ? alpha : 0.0) - (1.0 + alpha) * wa;
  r.hb = (delta ? 0.0 : alpha) - (1.0 + alpha) * wb;
  const double c = (1.0 + alpha) * alpha;
  r.haa = -c * wa * (1.0 - wa);
  r.hab = c * wa * wb;
  r.hbb = -c * wb * (1.0 - wb);
  return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

DependentCoxLikelihood::DependentCoxLikelihood(const SurvivalRecords& records,
                                               std::span<const double> x, double alpha)
    : n_(records.size()), alpha_(alpha) {
  validate_records(records);
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw ParameterError("alpha must be finite and >= 0");
  if (x.size() != records.size()) throw InputError("covariate length does not match records");
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("covariate has missing values");
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*hi > *lo)) throw InputError("covariate is constant");
  int events = 0;
  for (const auto& r : records) events += r.delta;
  if (events < 2 || static_cast<std::size_t>(events) + 2 > n_) {
    throw InputError("dependent Cox needs at least 2 events and 2 censorings");
  }
  const auto order = time_order(records);
  const auto jt = jittered_times(records);
  for (auto i : order) {
    t_.push_back(jt[i]);
    x_.push_back(x[i]);
    d_.push_back(records[i].delta);
  }
}

std::vector<double> DependentCoxLikelihood::initial_point(double beta, double gamma) const {
  std::vector<double> theta(n_ + 2);
  theta[0] = beta;
  theta[1] = gamma;
  for (std::size_t k = 0; k < n_; ++k) theta[k + 2] = -std::log(static_cast<double>(n_ - k));
  return theta;
}

double DependentCoxLikelihood::value(const std::vector<double>& theta) const {
  const double beta = theta[0], gamma = theta[1];
  double lam_cum = 0, gam_cum = 0, ll = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double phi = theta[i + 2];
    (d_[i] ? lam_cum : gam_cum) += std::exp(phi);
    const double big_a = std::exp(beta * x_[i]) * lam_cum;
    const double big_b = std::exp(gamma * x_[i]) * gam_cum;
    ll += phi + (d_[i] ? beta : gamma) * x_[i] + h_terms(alpha_, d_[i], big_a, big_b).h;
  }
  return ll;
}

double DependentCoxLikelihood::evaluate(const std::vector<double>& theta) {
  theta_ = theta;
  const double beta = theta[0], gamma = theta[1];
  lam_.resize(n_);
  e_.resize(n_);
  f_.resize(n_);
  a_.resize(n_);
  b_.resize(n_);
  ha_.resize(n_);
  hb_.resize(n_);
  haa_.resize(n_);
  hab_.resize(n_);
  hbb_.resize(n_);
  double lam_cum = 0, gam_cum = 0, ll = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double phi = theta[i + 2];
    lam_[i] = std::exp(phi);
    (d_[i] ? lam_cum : gam_cum) += lam_[i];
    e_[i] = std::exp(beta * x_[i]);
    f_[i] = std::exp(gamma * x_[i]);
    a_[i] = e_[i] * lam_cum;
    b_[i] = f_[i] * gam_cum;
    const HTerms h = h_terms(alpha_, d_[i], a_[i], b_[i]);
    ha_[i] = h.ha;
    hb_[i] = h.hb;
    haa_[i] = h.haa;
    hab_[i] = h.hab;
    hbb_[i] = h.hbb;
    ll += phi + (d_[i] ? beta : gamma) * x_[i] + h.h;
  }
  return ll;
}

std::vector<double> DependentCoxLikelihood::gradient() const {
  std::vector<double> g(n_ + 2, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    if (d_[i]) {
      g[0] += x_[i];
    } else {
      g[1] += x_[i];
    }
    g[0] += ha_[i] * a_[i] * x_[i];
    g[1] += hb_[i] * b_[i] * x_[i];
  }
  double sa = 0, sb = 0;
  for (std::size_t k = n_; k-- > 0;) {
    sa += ha_[k] * e_[k];
    sb += hb_[k] * f_[k];
    g[k + 2] = 1.0 + lam_[k] * (d_[k] ? sa : sb);
  }
  return g;
}

std::vector<double> DependentCoxLikelihood::hessian_times(const std::vector<double>& v) const {
  std::vector<double> out(n_ + 2, 0.0);
  std::vector<double> qa(n_), qb(n_);
  double pl = 0, pg = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    (d_[i] ? pl : pg) += lam_[i] * v[i + 2];
    const double da = a_[i] * x_[i] * v[0] + e_[i] * pl;
    const double db = b_[i] * x_[i] * v[1] + f_[i] * pg;
    qa[i] = haa_[i] * da + hab_[i] * db;
    qb[i] = hab_[i] * da + hbb_[i] * db;
    out[0] += qa[i] * a_[i] * x_[i] + ha_[i] * da * x_[i];
    out[1] += qb[i] * b_[i] * x_[i] + hb_[i] * db * x_[i];
  }
  double sa = 0, sb = 0, ra = 0, rb = 0;
  for (std::size_t k = n_; k-- > 0;) {
    sa += ha_[k] * e_[k];
    sb += hb_[k] * f_[k];
    ra += qa[k] * e_[k] + ha_[k] * e_[k] * x_[k] * v[0];
    rb += qb[k] * f_[k] + hb_[k] * f_[k] * x_[k] * v[1];
    out[k + 2] = d_[k] ? v[k + 2] * lam_[k] * sa + lam_[k] * ra
                       : v[k + 2] * lam_[k] * sb + lam_[k] * rb;
  }
  return out;
}

std::vector<double> DependentCoxLikelihood::hessian_diagonal() const {
  std::vector<double> out(n_ + 2, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double x2 = x_[i] * x_[i];
    out[0] += (haa_[i] * a_[i] * a_[i] + ha_[i] * a_[i]) * x2;
    out[1] += (hbb_[i] * b_[i] * b_[i] + hb_[i] * b_[i]) * x2;
  }
  double sa = 0, sb = 0, saa = 0, sbb = 0;
  for (std::size_t k = n_; k-- > 0;) {
    sa += ha_[k] * e_[k];
    sb += hb_[k] * f_[k];
    saa += haa_[k] * e_[k] * e_[k];
    sbb += hbb_[k] * f_[k] * f_[k];
    const double l = lam_[k];
    out[k + 2] = d_[k] ? l * sa + l * l * saa : l * sb + l * l * sbb;
  }
  return out;
}

namespace {

struct NewtonResult {
  std::vector<double> theta;
  double loglik = -std::numeric_limits<double>::infinity();
  double max_gradient = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Line-search truncated Newton (preconditioned conjugate gradients) on -loglik.
NewtonResult maximize(DependentCoxLikelihood& lik, std::vector<double> theta,
                      const DependentCoxOptions& opt) {
  const std::size_t dim = lik.dimension();
  NewtonResult res;
  double f = -lik.evaluate(theta);
  std::vector<double> g = lik.gradient();
  for (double& v : g) v = -v;

  std::vector<double> p(dim), r(dim), z(dim), d(dim), prec(dim), trial(dim);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    res.max_gradient = max_abs(g);
    if (!std::isfinite(f)) break;
    if (res.max_gradient < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    const auto diag = lik.hessian_diagonal();
    for (std::size_t i = 0; i < dim; ++i) {
      const double h = -diag[i];
      prec[i] = h > 1e-12 ? h : 1.0;
    }
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      r[i] = -g[i];
      z[i] = r[i] / prec[i];
    }
    d = z;
    double rz = dot(r, z);
    const double gnorm = std::sqrt(dot(g, g));
    const double eta = std::min(0.5, std::sqrt(gnorm));
    for (std::size_t cg = 0; cg < dim; ++cg) {
      std::vector<double> hd = lik.hessian_times(d);
      for (double& v : hd) v = -v;
      const double dhd = dot(d, hd);
      if (!(dhd > 1e-14 * dot(d, d))) {
        if (cg == 0) {
          for (std::size_t i = 0; i < dim; ++i) p[i] = -g[i] / prec[i];
        }
        break;
      }
      const double step = rz / dhd;
      for (std::size_t i = 0; i < dim; ++i) {
        p[i] += step * d[i];
        r[i] -= step * hd[i];
      }
      if (std::sqrt(dot(r, r)) <= eta * gnorm) break;
      for (std::size_t i = 0; i < dim; ++i) z[i] = r[i] / prec[i];
      const double rz_new = dot(r, z);
      const double ratio = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < dim; ++i) d[i] = z[i] + ratio * d[i];
    }
    double slope = dot(g, p);
    if (!(slope < 0)) {
      for (std::size_t i = 0; i < dim; ++i) p[i] = -g[i] / prec[i];
      slope = dot(g, p);
    }
    // keep log-jumps and coefficients from leaping into overflow
    const double pmax = max_abs(p);
    if (pmax > 5.0) {
      for (double& v : p) v *= 5.0 / pmax;
      slope *= 5.0 / pmax;
    }
    double t = 1.0;
    bool accepted = false;
    double ft = f;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < dim; ++i) trial[i] = theta[i] + t * p[i];
      ft = -lik.value(trial);
      if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope + 1e-13 * std::abs(f)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    theta.swap(trial);
    f = -lik.evaluate(theta);
    g = lik.gradient();
    for (double& v : g) v = -v;
  }
  res.max_gradient = max_abs(g);
  if (!res.converged && res.max_gradient < opt.gradient_tolerance) res.converged = true;
  res.theta = std::move(theta);
  res.loglik = -f;
  res.iterations = it;
  return res;
}

}  // namespace

DependentCoxEstimate dependent_cox(const SurvivalRecords& records, std::span<const double> x,
                                   double alpha, const DependentCoxOptions& options) {
  DependentCoxLikelihood lik(records, x, alpha);
  NewtonResult best = maximize(lik, lik.initial_point(0.0, 0.0), options);
  if (!best.converged) {
    for (double b0 : {-0.5, 0.5}) {
      for (double g0 : {-0.5, 0.0, 0.5}) {
        NewtonResult r = maximize(lik, lik.initial_point(b0, g0), options);
        if ((r.converged && !best.converged) ||
            (r.converged == best.converged && r.loglik > best.loglik)) {
          best = std::move(r);
        }
      }
    }
  }

  DependentCoxEstimate est;
  est.alpha = alpha;
  est.beta = best.theta[0];
  est.gamma = best.theta[1];
  est.loglik = best.loglik;
  est.max_gradient = best.max_gradient;
  est.converged = best.converged;
  est.iterations = best.iterations;

  const auto& t = lik.sorted_times();
  const auto& d = lik.sorted_delta();
  double lc = 0, gc = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double jump = std::exp(best.theta[k + 2]);
    if (d[k]) {
      lc += jump;
      est.lambda0.times.push_back(t[k]);
      est.lambda0.values.push_back(lc);
    } else {
      gc += jump;
      est.gamma0.times.push_back(t[k]);
      est.gamma0.values.push_back(gc);
    }
  }

  est.se_beta = std::numeric_limits<double>::quiet_NaN();
  est.wald_p = 1.0;
  if (options.compute_se) {
    lik.evaluate(best.theta);
    const std::size_t dim = lik.dimension();
    Eigen::MatrixXd info(dim, dim);
    std::vector<double> unit(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      unit[j] = 1.0;
      const auto col = lik.hessian_times(unit);
      unit[j] = 0.0;
      for (std::size_t i = 0; i < dim; ++i) info(i, j) = -col[i];
    }
    info = 0.5 * (info + info.transpose()).eval();
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(dim);
    e0(0) = 1.0;
    const Eigen::VectorXd sol = info.partialPivLu().solve(e0);
    if (sol.allFinite() && sol(0) > 0) {
      est.se_beta = std::sqrt(sol(0));
      est.wald_p = stats::two_sided_normal_p(est.beta / est.se_beta);
      if (est.wald_p <= 0) est.wald_p = std::numeric_limits<double>::min();
    } else {
      est.converged = false;
    }
  }
  return est;
}

}  // namespace cgrep::survival
