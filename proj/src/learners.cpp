#include "cgrep/learners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "cgrep/common.hpp"

namespace cgrep::learn {

namespace {

enum class Criterion { kGini, kSquaredError };

/// Node impurity times node size, from count, sum and sum of squares.
double weighted_impurity(Criterion c, double n, double s1, double s2) {
  if (n <= 0) return 0.0;
  if (c == Criterion::kGini) return 2.0 * s1 * (n - s1) / n;
  return std::max(0.0, s2 - s1 * s1 / n);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

Split find_split(const Matrix& x, const std::vector<double>& t, Criterion crit,
                 const std::vector<std::size_t>& idx, int min_leaf) {
  Split best;
  const std::size_t m = idx.size();
  std::vector<std::size_t> order(idx);
  std::vector<double> ps1(m + 1), ps2(m + 1);
  for (int f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    ps1[0] = ps2[0] = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double v = t[order[k]];
      ps1[k + 1] = ps1[k] + v;
      ps2[k + 1] = ps2[k] + v * v;
    }
    for (std::size_t k = 1; k < m; ++k) {
      const double lo = x(order[k - 1], f), hi = x(order[k], f);
      if (!(lo < hi)) continue;
      if (k < static_cast<std::size_t>(min_leaf) || m - k < static_cast<std::size_t>(min_leaf)) {
        continue;
      }
      const double left = weighted_impurity(crit, static_cast<double>(k), ps1[k], ps2[k]);
      const double right = weighted_impurity(crit, static_cast<double>(m - k), ps1[m] - ps1[k],
                                             ps2[m] - ps2[k]);
      const double imp = left + right;
      if (imp < best.impurity) {
        double thr = lo + 0.5 * (hi - lo);
        if (!(thr < hi)) thr = lo;
        best = {f, thr, imp};
      }
    }
  }
  return best;
}

class Builder {
 public:
  using LeafValue = std::function<double(const std::vector<std::size_t>&)>;

  Builder(const Matrix& x, const std::vector<double>& t, Criterion crit, TreeParams params,
          LeafValue leaf)
      : x_(x), t_(t), crit_(crit), leaf_(std::move(leaf)) {
    tree_.params = params;
  }

  DecisionTree run() {
    std::vector<std::size_t> all(static_cast<std::size_t>(x_.rows()));
    std::iota(all.begin(), all.end(), std::size_t{0});
    build(all, 0);
    return std::move(tree_);
  }

 private:
  int build(const std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].samples = idx.size();

    double s1 = 0, s2 = 0;
    for (auto i : idx) {
      s1 += t_[i];
      s2 += t_[i] * t_[i];
    }
    const double parent = weighted_impurity(crit_, static_cast<double>(idx.size()), s1, s2);
    const bool can_split = depth < tree_.params.max_depth &&
                           idx.size() >= 2 * static_cast<std::size_t>(tree_.params.min_leaf) &&
                           parent > 0.0;
    Split split;
    if (can_split) split = find_split(x_, t_, crit_, idx, tree_.params.min_leaf);
    if (split.feature < 0 || !(split.impurity < parent - 1e-12 * std::max(1.0, parent))) {
      tree_.nodes[id].value = leaf_(idx);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto i : idx) (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const Matrix& x_;
  const std::vector<double>& t_;
  Criterion crit_;
  LeafValue leaf_;
  DecisionTree tree_;
};

void check_xy(const Matrix& x, std::size_t n) {
  if (x.rows() == 0 || x.cols() == 0) throw InputError("empty feature matrix");
  if (static_cast<std::size_t>(x.rows()) != n) throw InputError("feature/label length mismatch");
  if (!x.allFinite()) throw InputError("feature matrix contains missing or non-finite values");
}

double sigmoid(double f) { return 1.0 / (1.0 + std::exp(-f)); }

/// log(1 + e^f) - y f, evaluated without overflow.
double logistic_loss(double f, int y) {
  const double softplus = f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
  return softplus - y * f;
}

}  // namespace

double DecisionTree::predict_value(RowRef row) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = row(nodes[id].feature) <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].value;
}

int DecisionTree::depth() const {
  std::function<int(int)> rec = [&](int id) -> int {
    if (nodes[id].feature < 0) return 0;
    return 1 + std::max(rec(nodes[id].left), rec(nodes[id].right));
  };
  return nodes.empty() ? 0 : rec(0);
}

void require_two_classes(const Labels& y) {
  bool zero = false, one = false;
  for (int v : y) {
    if (v == 0) {
      zero = true;
    } else if (v == 1) {
      one = true;
    } else {
      throw InputError("labels must be 0/1");
    }
  }
  if (!(zero && one)) throw InputError("single-class target");
}

DecisionTree tree_fit(const Matrix& x, const Labels& y, const TreeParams& params) {
  check_xy(x, y.size());
  if (y.size() < 2) throw InputError("tree_fit needs at least 2 samples");
  require_two_classes(y);
  if (params.max_depth < 1 || params.min_leaf < 1) throw ParameterError("invalid tree parameters");
  const std::vector<double> t(y.begin(), y.end());
  Builder b(x, t, Criterion::kGini, params, [&](const std::vector<std::size_t>& idx) {
    double pos = 0;
    for (auto i : idx) pos += t[i];
    return pos / static_cast<double>(idx.size());
  });
  return b.run();
}

double best_split_impurity(const Matrix& x, const Labels& y, int* feature, double* threshold) {
  check_xy(x, y.size());
  const std::vector<double> t(y.begin(), y.end());
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Split s = find_split(x, t, Criterion::kGini, all, 1);
  if (feature) *feature = s.feature;
  if (threshold) *threshold = s.threshold;
  return s.impurity;
}

double BoostedEnsemble::decision(RowRef row) const {
  double f = init_log_odds;
  for (std::size_t k = 0; k < trees.size(); ++k) {
    f += learning_rate * tree_weights[k] * trees[k].predict_value(row);
  }
  return f;
}

double BoostedEnsemble::predict_proba(RowRef row) const {
  return sigmoid(decision(row));
}

std::vector<double> BoostedEnsemble::predict_proba_rows(const Matrix& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_proba(x.row(i));
  return out;
}

BoostedEnsemble boost_fit(const Matrix& x, const Labels& y, const BoostParams& params) {
  if (params.n_trees < 1) throw ParameterError("n_trees must be >= 1");
  if (params.depth < 1 || params.depth > 3) throw ParameterError("boosting depth must be in [1,3]");
  if (!(params.learning_rate > 0)) throw ParameterError("learning rate must be positive");
  check_xy(x, y.size());
  require_two_classes(y);

  const std::size_t n = y.size();
  BoostedEnsemble model;
  model.learning_rate = params.learning_rate;
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double prior = pos / static_cast<double>(n);
  model.init_log_odds = std::log(prior / (1.0 - prior));

  std::vector<double> f(n, model.init_log_odds), resid(n), hess(n), step(n), trial(n);
  auto loss_of = [&](const std::vector<double>& ff) {
    double l = 0;
    for (std::size_t i = 0; i < n; ++i) l += logistic_loss(ff[i], y[i]);
    return l / static_cast<double>(n);
  };
  double loss = loss_of(f);
  const TreeParams tp{params.depth, params.min_leaf};

  for (int round = 0; round < params.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      resid[i] = y[i] - p;
      hess[i] = p * (1.0 - p);
    }
    Builder b(x, resid, Criterion::kSquaredError, tp, [&](const std::vector<std::size_t>& idx) {
      double g = 0, h = 0;
      for (auto i : idx) {
        g += resid[i];
        h += hess[i];
      }
      return g / std::max(h, 1e-12);
    });
    DecisionTree tree = b.run();
    for (std::size_t i = 0; i < n; ++i) step[i] = params.learning_rate * tree.predict_value(x.row(i));

    double weight = 1.0, trial_loss = loss;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = f[i] + weight * step[i];
      trial_loss = loss_of(trial);
      if (trial_loss <= loss) break;
      weight *= 0.5;
    }
    if (trial_loss > loss) {
      weight = 0.0;
      trial_loss = loss;
    } else {
      f.swap(trial);
    }
    loss = trial_loss;
    model.trees.push_back(std::move(tree));
    model.tree_weights.push_back(weight);
    model.training_loss.push_back(loss);
  }
  return model;
}

double auc(const Labels& y, std::span<const double> scores) {
  if (y.size() != scores.size()) throw InputError("label/score length mismatch");
  require_two_classes(y);
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (y[order[k]] == 1) rank_sum_pos += mid_rank;
    }
    i = j + 1;
  }
  const double n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double n0 = static_cast<double>(n) - n1;
  return (rank_sum_pos - n1 * (n1 + 1) / 2.0) / (n1 * n0);
}

ClassificationMetrics classification_metrics(const Labels& y, std::span<const double> scores,
                                             bool require_auc) {
  if (y.size() != scores.size()) throw InputError("label/score length mismatch");
  if (y.empty()) throw InputError("no samples to score");
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("scores must lie in [0,1]");
  }
  ClassificationMetrics m;
  bool zero = false, one = false;
  for (int v : y) (v == 1 ? one : zero) = true;
  if (zero && one) {
    m.auc = auc(y, scores);
  } else if (require_auc) {
    throw InputError("single-class target");
  } else {
    m.auc = std::numeric_limits<double>::quiet_NaN();
  }
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool pred = scores[i] >= kDecisionThreshold;
    if (y[i] == 1) {
      (pred ? tp : fn) += 1;
    } else {
      (pred ? fp : tn) += 1;
    }
  }
  m.accuracy = (tp + tn) / static_cast<double>(y.size());
  m.ppv = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.fpr = fp + tn > 0 ? fp / (fp + tn) : 0.0;
  m.f1 = tp > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  return m;
}

}  // namespace cgrep::learn
