#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgrep/data_io.hpp"
#include "cgrep/learners.hpp"

namespace cgrep::resample {

struct ResamplingPlan {
  int iterations = 1000;
  int folds = 5;
  /// Majority rows drawn per iteration; 0 means "as many as the minority".
  int majority_sample = 20;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Row indices of one balanced iteration split into stratified folds.
struct IterationSplit {
  std::vector<std::size_t> rows;                  // all sampled rows, ascending
  std::vector<std::vector<std::size_t>> test;     // per fold, ascending
  std::vector<std::vector<std::size_t>> train;    // per fold, ascending
};

/// All minority rows plus `m` majority rows drawn without replacement, then
/// stratified into folds. `stream` separates the ranking and evaluation draws.
IterationSplit balanced_split(const learn::Labels& labels, const ResamplingPlan& plan,
                              std::uint64_t stream, std::size_t iteration);

struct RankingReport {
  std::vector<std::string> features;
  std::vector<double> mean_f1;
  std::vector<std::vector<double>> history;  // [feature][iteration * folds + fold]
};

RankingReport rank_features(const io::FeatureTable& table, const learn::Labels& labels,
                            const ResamplingPlan& plan, const learn::TreeParams& tree = {});

/// Names with mean F1 >= theta (inclusive) or > theta, by score descending
/// (ties by table order).
std::vector<std::string> threshold_select(const RankingReport& report, double theta,
                                          bool inclusive = true);

struct SignificanceResult {
  std::string feature;
  std::string test;
  double p = 1.0;
  bool flagged = false;
  bool selected = false;
};

/// Normality-gated two-group test per candidate; selected when p < p_threshold.
std::vector<SignificanceResult> significance_filter(const io::FeatureTable& table,
                                                    const learn::Labels& labels,
                                                    const std::vector<std::string>& candidates,
                                                    double p_threshold = 0.05);

struct MetricDistribution {
  std::vector<int> iteration;
  std::vector<int> fold;
  std::vector<double> auc, accuracy, ppv, fpr, f1;

  std::size_t size() const { return auc.size(); }
};

struct Summary {
  double mean = 0, sd = 0;
};
Summary summarize(const std::vector<double>& values);

MetricDistribution evaluate_model(const io::FeatureTable& table, const learn::Labels& labels,
                                  const std::vector<std::string>& selected,
                                  const ResamplingPlan& plan,
                                  const learn::BoostParams& boost = {});

/// Feature matrix of the named columns over the given rows; throws on NaN.
learn::Matrix gather(const io::FeatureTable& table, const std::vector<std::size_t>& columns,
                     const std::vector<std::size_t>& rows);

}  // namespace cgrep::resample
