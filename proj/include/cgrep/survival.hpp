#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgrep/curve.hpp"
#include "cgrep/data_io.hpp"

namespace cgrep::survival {

struct SurvivalRecord {
  std::string patient_id;
  double t = 0.0;  // observed time, > 0
  int delta = 0;   // 1 = death observed, 0 = censored
};

using SurvivalRecords = std::vector<SurvivalRecord>;

/// Records from the time_days/event columns; throws when either is absent.
SurvivalRecords records_from_table(const io::FeatureTable& table);
void validate_records(const SurvivalRecords& records);

/// Processing order: ascending time, events before censorings at equal times,
/// then input order. Position k in this order is the tie-breaking rank.
std::vector<std::size_t> time_order(const SurvivalRecords& records);
/// Observed times made unique by adding 1e-9 * rank to tied values.
std::vector<double> jittered_times(const SurvivalRecords& records);

struct CoxEstimate {
  double beta = 0.0;
  double se = 0.0;
  double wald_p = 1.0;
  double score = 0.0;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Breslow partial log-likelihood of a single covariate.
double cox_partial_loglik(const SurvivalRecords& records, std::span<const double> x, double beta);

/// Newton-Raphson on the Breslow partial likelihood to |score| < 1e-8 or 100
/// iterations; non-convergence is flagged, not thrown.
CoxEstimate cox_univariate(const SurvivalRecords& records, std::span<const double> x);

/// Clayton copula; u * v at alpha = 0.
double clayton(double u, double v, double alpha);
/// Kendall's tau of the Clayton copula, alpha / (alpha + 2).
double tau_of_alpha(double alpha);

StepSurvivalCurve kaplan_meier(const SurvivalRecords& records);
/// Copula-graphic estimate of the survival function under a Clayton copula
/// between death and censoring; Kaplan-Meier at alpha = 0. When the last
/// subject at risk dies the curve drops to 0.
StepSurvivalCurve cg_curve(const SurvivalRecords& records, double alpha);

/// Baseline cumulative hazard as a right-continuous step function.
struct CumulativeHazard {
  std::vector<double> times;
  std::vector<double> values;

  double at(double t) const;
};

struct DependentCoxEstimate {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double se_beta = 0.0;
  double wald_p = 1.0;
  double loglik = 0.0;
  double max_gradient = 0.0;
  bool converged = false;
  int iterations = 0;
  CumulativeHazard lambda0;  // death
  CumulativeHazard gamma0;   // censoring
};

struct DependentCoxOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  bool compute_se = true;
};

/// Semiparametric maximum likelihood of a Cox model for death and a Cox model
/// for censoring joined by a Clayton copula with known alpha.
DependentCoxEstimate dependent_cox(const SurvivalRecords& records, std::span<const double> x,
                                   double alpha, const DependentCoxOptions& options = {});

/// Log-likelihood, gradient and Hessian-vector products of the model above in
/// the parameterization (beta, gamma, log jump per subject in time order).
/// Exposed for derivative checks.
class DependentCoxLikelihood {
 public:
  DependentCoxLikelihood(const SurvivalRecords& records, std::span<const double> x, double alpha);

  std::size_t dimension() const { return n_ + 2; }
  double value(const std::vector<double>& theta) const;
  /// Evaluates at theta and caches the state used by gradient/hessian_times.
  double evaluate(const std::vector<double>& theta);
  std::vector<double> gradient() const;
  std::vector<double> hessian_times(const std::vector<double>& v) const;
  std::vector<double> hessian_diagonal() const;
  std::vector<double> initial_point(double beta, double gamma) const;
  const std::vector<double>& sorted_times() const { return t_; }
  const std::vector<int>& sorted_delta() const { return d_; }

 private:
  std::size_t n_;
  double alpha_;
  std::vector<double> t_, x_;
  std::vector<int> d_;
  // cached at the evaluation point
  std::vector<double> theta_, lam_, e_, f_, a_, b_, ha_, hb_, haa_, hab_, hbb_;
};

/// Harrell's concordance over usable pairs (shorter time is a death);
/// higher risk should fail first, risk ties count one half.
double harrell_c(std::span<const double> risk, const SurvivalRecords& records);

/// Per-column min-max scaling to [0,1]; constant columns become 0.
io::FeatureTable minmax_scaled(const io::FeatureTable& table);

struct AlphaSelection {
  std::vector<double> grid;
  std::vector<double> cv_cindex;
  double alpha_hat = 0.0;
  double tau_hat = 0.0;
};

/// Cross-validated c-index of the compound score sum_j beta_j(alpha) x_j for
/// every alpha; the argmax (smallest alpha on ties) is chosen. Columns are
/// min-max scaled first.
AlphaSelection select_alpha(const SurvivalRecords& records, const io::FeatureTable& table,
                            const std::vector<std::string>& candidates,
                            const std::vector<double>& grid, int folds, std::uint64_t seed);

struct SelectedFeature {
  std::string name;
  double coefficient = 0.0;
  double p_value = 1.0;
};

/// Per-feature dependent Cox fits at alpha, keeping wald_p < p_threshold,
/// ascending by p. An empty candidate list means every feature column.
std::vector<SelectedFeature> select_features_dependent(
    const SurvivalRecords& records, const io::FeatureTable& table, double alpha,
    double p_threshold, const std::vector<std::string>& candidates = {});

}  // namespace cgrep::survival
