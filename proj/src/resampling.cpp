#include "cgrep/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgrep/common.hpp"
#include "cgrep/stats.hpp"

namespace cgrep::resample {

void ResamplingPlan::validate() const {
  if (iterations < 1) throw ParameterError("iterations must be >= 1");
  if (folds < 2) throw ParameterError("folds must be >= 2");
  if (majority_sample < 0) throw ParameterError("majority sample size must be >= 0");
}

IterationSplit balanced_split(const learn::Labels& labels, const ResamplingPlan& plan,
                              std::uint64_t stream, std::size_t iteration) {
  plan.validate();
  learn::require_two_classes(labels);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const bool pos_minor = pos.size() <= neg.size();
  const std::vector<std::size_t>& minority = pos_minor ? pos : neg;
  std::vector<std::size_t> majority = pos_minor ? neg : pos;

  const std::size_t folds = static_cast<std::size_t>(plan.folds);
  const std::size_t m = plan.majority_sample == 0 ? minority.size()
                                                  : static_cast<std::size_t>(plan.majority_sample);
  if (m > majority.size()) {
    throw InputError("majority sample size " + std::to_string(m) + " exceeds majority count " +
                     std::to_string(majority.size()));
  }
  if (minority.size() < folds || m < folds) {
    throw InputError("each class needs at least as many sampled rows as folds");
  }

  Rng rng = make_rng(plan.seed, stream, iteration);
  std::shuffle(majority.begin(), majority.end(), rng);
  majority.resize(m);
  std::vector<std::size_t> minor_sh = minority;
  std::shuffle(minor_sh.begin(), minor_sh.end(), rng);

  IterationSplit split;
  split.test.assign(folds, {});
  split.train.assign(folds, {});
  for (const auto* cls : {&minor_sh, &majority}) {
    for (std::size_t k = 0; k < cls->size(); ++k) split.test[k % folds].push_back((*cls)[k]);
  }
  split.rows.insert(split.rows.end(), minor_sh.begin(), minor_sh.end());
  split.rows.insert(split.rows.end(), majority.begin(), majority.end());
  std::sort(split.rows.begin(), split.rows.end());
  for (std::size_t f = 0; f < folds; ++f) {
    std::sort(split.test[f].begin(), split.test[f].end());
    std::set_difference(split.rows.begin(), split.rows.end(), split.test[f].begin(),
                        split.test[f].end(), std::back_inserter(split.train[f]));
  }
  return split;
}

learn::Matrix gather(const io::FeatureTable& table, const std::vector<std::size_t>& columns,
                     const std::vector<std::size_t>& rows) {
  learn::Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = table.columns[columns[c]];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double v = col[rows[r]];
      if (!std::isfinite(v)) {
        throw InputError("missing value in feature " + table.feature_names[columns[c]] +
                         " for patient " + table.patient_ids[rows[r]]);
      }
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return x;
}

namespace {

learn::Labels pick(const learn::Labels& labels, const std::vector<std::size_t>& rows) {
  learn::Labels out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

void check_inputs(const io::FeatureTable& table, const learn::Labels& labels,
                  const ResamplingPlan& plan) {
  plan.validate();
  if (labels.size() != table.rows()) throw InputError("label count does not match table rows");
  learn::require_two_classes(labels);
}

}  // namespace

RankingReport rank_features(const io::FeatureTable& table, const learn::Labels& labels,
                            const ResamplingPlan& plan, const learn::TreeParams& tree) {
  check_inputs(table, labels, plan);
  const std::size_t p = table.feature_names.size();
  const std::size_t folds = static_cast<std::size_t>(plan.folds);
  const std::size_t iters = static_cast<std::size_t>(plan.iterations);
  RankingReport report;
  report.features = table.feature_names;
  report.history.assign(p, std::vector<double>(iters * folds, 0.0));

  parallel_for(iters, [&](std::size_t it) {
    const IterationSplit split = balanced_split(labels, plan, streams::kRankIteration, it);
    for (std::size_t f = 0; f < folds; ++f) {
      const learn::Labels ytr = pick(labels, split.train[f]);
      const learn::Labels yte = pick(labels, split.test[f]);
      std::vector<double> scores(yte.size());
      for (std::size_t j = 0; j < p; ++j) {
        const learn::Matrix xtr = gather(table, {j}, split.train[f]);
        const learn::Matrix xte = gather(table, {j}, split.test[f]);
        const learn::DecisionTree t = learn::tree_fit(xtr, ytr, tree);
        for (Eigen::Index r = 0; r < xte.rows(); ++r) scores[r] = t.predict_proba(xte.row(r));
        report.history[j][it * folds + f] =
            learn::classification_metrics(yte, scores, false).f1;
      }
    }
  });

  report.mean_f1.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    report.mean_f1[j] = std::accumulate(report.history[j].begin(), report.history[j].end(), 0.0) /
                        static_cast<double>(report.history[j].size());
  }
  return report;
}

std::vector<std::string> threshold_select(const RankingReport& report, double theta,
                                          bool inclusive) {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < report.features.size(); ++j) {
    const double s = report.mean_f1[j];
    if (inclusive ? s >= theta : s > theta) keep.push_back(j);
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return report.mean_f1[a] > report.mean_f1[b];
  });
  std::vector<std::string> out;
  for (auto j : keep) out.push_back(report.features[j]);
  return out;
}

std::vector<SignificanceResult> significance_filter(const io::FeatureTable& table,
                                                    const learn::Labels& labels,
                                                    const std::vector<std::string>& candidates,
                                                    double p_threshold) {
  if (labels.size() != table.rows()) throw InputError("label count does not match table rows");
  learn::require_two_classes(labels);
  std::vector<SignificanceResult> out;
  for (const auto& name : candidates) {
    const auto& col = table.column(name);
    std::vector<double> g0, g1;
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!std::isfinite(col[i])) throw InputError("missing value in feature " + name);
      (labels[i] == 1 ? g1 : g0).push_back(col[i]);
    }
    const stats::GatedTest t = stats::normality_gated_test(g0, g1);
    out.push_back({name, t.test, t.p, t.flagged, t.p < p_threshold});
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) return {};
  return {stats::mean(values), stats::stddev(values)};
}

MetricDistribution evaluate_model(const io::FeatureTable& table, const learn::Labels& labels,
                                  const std::vector<std::string>& selected,
                                  const ResamplingPlan& plan, const learn::BoostParams& boost) {
  check_inputs(table, labels, plan);
  if (selected.empty()) throw InputError("no features selected for evaluation");
  std::vector<std::size_t> cols;
  for (const auto& name : selected) {
    const auto j = table.find(name);
    if (!j) throw InputError("unknown feature " + name);
    cols.push_back(*j);
  }
  const std::size_t folds = static_cast<std::size_t>(plan.folds);
  const std::size_t iters = static_cast<std::size_t>(plan.iterations);
  const std::size_t total = iters * folds;
  MetricDistribution d;
  d.iteration.resize(total);
  d.fold.resize(total);
  d.auc.resize(total);
  d.accuracy.resize(total);
  d.ppv.resize(total);
  d.fpr.resize(total);
  d.f1.resize(total);

  parallel_for(iters, [&](std::size_t it) {
    const IterationSplit split = balanced_split(labels, plan, streams::kEvalIteration, it);
    for (std::size_t f = 0; f < folds; ++f) {
      const learn::Matrix xtr = gather(table, cols, split.train[f]);
      const learn::Matrix xte = gather(table, cols, split.test[f]);
      const learn::BoostedEnsemble model = learn::boost_fit(xtr, pick(labels, split.train[f]), boost);
      const auto scores = model.predict_proba_rows(xte);
      const auto m = learn::classification_metrics(pick(labels, split.test[f]), scores);
      const std::size_t k = it * folds + f;
      d.iteration[k] = static_cast<int>(it);
      d.fold[k] = static_cast<int>(f);
      d.auc[k] = m.auc;
      d.accuracy[k] = m.accuracy;
      d.ppv[k] = m.ppv;
      d.fpr[k] = m.fpr;
      d.f1[k] = m.f1;
    }
  });
  return d;
}

}  // namespace cgrep::resample
