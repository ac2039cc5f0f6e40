#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cgrep::learn {

/// Samples in rows, features in columns.
using Matrix = Eigen::MatrixXd;
using Labels = std::vector<int>;
/// A matrix row without copying (column-major rows are strided).
using RowRef = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

struct TreeParams {
  int max_depth = 3;
  int min_leaf = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: P(y = 1) for classifiers, output for regressors
  std::size_t samples = 0;
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  TreeParams params;

  double predict_value(RowRef row) const;
  double predict_proba(RowRef row) const {
    return predict_value(row);
  }
  int predict(RowRef row) const {
    return predict_value(row) >= 0.5 ? 1 : 0;
  }
  int depth() const;
};

/// Greedy Gini-impurity CART. Ties between candidate splits go to the lowest
/// feature index, then the lowest threshold (midpoints between distinct values).
DecisionTree tree_fit(const Matrix& x, const Labels& y, const TreeParams& params = {});

/// Weighted Gini impurity sum n_left*G_left + n_right*G_right of the best
/// root split, as chosen by tree_fit; infinity when no split exists.
double best_split_impurity(const Matrix& x, const Labels& y, int* feature = nullptr,
                           double* threshold = nullptr);

struct BoostParams {
  int n_trees = 100;
  int depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 1;
};

class BoostedEnsemble {
 public:
  double init_log_odds = 0.0;
  double learning_rate = 0.1;
  std::vector<DecisionTree> trees;
  std::vector<double> tree_weights;     // step-halving factor per round
  std::vector<double> training_loss;    // mean logistic loss after each round

  double decision(RowRef row) const;
  double predict_proba(RowRef row) const;
  std::vector<double> predict_proba_rows(const Matrix& x) const;
};

/// Logistic-loss gradient boosting with Newton leaf values. A round whose full
/// step would raise the training loss is shrunk by halving until it does not.
BoostedEnsemble boost_fit(const Matrix& x, const Labels& y, const BoostParams& params = {});

struct ClassificationMetrics {
  double auc = 0, accuracy = 0, ppv = 0, fpr = 0, f1 = 0;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Mann-Whitney AUC with half credit for ties; PPV, FPR, accuracy and F1 at
/// score >= 0.5. Undefined ratios (no predicted positives, no negatives) are 0.
/// A single-class y throws unless `require_auc` is false, in which case auc is NaN.
ClassificationMetrics classification_metrics(const Labels& y, std::span<const double> scores,
                                             bool require_auc = true);

double auc(const Labels& y, std::span<const double> scores);

/// Throws InputError("single-class target") unless both 0 and 1 occur.
void require_two_classes(const Labels& y);

}  // namespace cgrep::learn
