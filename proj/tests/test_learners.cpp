#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cgrep/common.hpp"
#include "cgrep/learners.hpp"
#include "cgrep/synth.hpp"

using namespace cgrep;
using namespace cgrep::learn;

namespace {

double gini(double pos, double n) {
  if (n == 0) return 0;
  const double p = pos / n;
  return 2 * p * (1 - p);
}

// Exhaustive scan over all features and every midpoint between sorted
// distinct values.
double oracle_root_impurity(const Matrix& x, const Labels& y) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> v(x.col(j).data(), x.col(j).data() + x.rows());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      const double thr = 0.5 * (v[k] + v[k + 1]);
      double nl = 0, pl = 0, nr = 0, pr = 0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (x(i, j) <= thr) {
          nl += 1;
          pl += y[i];
        } else {
          nr += 1;
          pr += y[i];
        }
      }
      best = std::min(best, nl * gini(pl, nl) + nr * gini(pr, nr));
    }
  }
  return best;
}

double brute_auc(const Labels& y, const std::vector<double>& s) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        den += 1;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return num / den;
}

Matrix to_matrix(const io::FeatureTable& t) {
  Matrix x(t.rows(), t.feature_names.size());
  for (std::size_t j = 0; j < t.feature_names.size(); ++j)
    for (std::size_t i = 0; i < t.rows(); ++i) x(i, j) = t.columns[j][i];
  return x;
}

}  // namespace

TEST_CASE("tree on a separable line") {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  const Labels y{0, 0, 1, 1};
  const auto t = tree_fit(x, y);
  REQUIRE(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold > 1);
  CHECK(t.nodes[0].threshold < 2);
  for (int i = 0; i < 4; ++i) CHECK(t.predict(x.row(i)) == y[i]);
  CHECK(t.depth() == 1);
  CHECK_THROWS_AS(tree_fit(x, Labels{0, 0, 0, 0}), InputError);
  CHECK_THROWS_AS(tree_fit(Matrix(0, 1), Labels{}), InputError);
}

TEST_CASE("root split equals exhaustive scan") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix x(50, 5);
    Labels y(50);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 5; ++j) x(i, j) = std::round(n(rng) * 4) / 4;
      y[i] = (x(i, rep % 5) + n(rng) > 0) ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(best_split_impurity(x, y) == doctest::Approx(oracle_root_impurity(x, y)).epsilon(1e-12));
    const auto a = tree_fit(x, y);
    const auto b = tree_fit(x, y);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t k = 0; k < a.nodes.size(); ++k) {
      CHECK(a.nodes[k].feature == b.nodes[k].feature);
      CHECK(a.nodes[k].threshold == b.nodes[k].threshold);
    }
    for (const auto& node : a.nodes) {
      if (node.feature < 0) {
        CHECK(node.value >= 0);
        CHECK(node.value <= 1);
      }
    }
  }
}

TEST_CASE("tie break prefers the lowest feature") {
  Matrix x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3;
  const auto t = tree_fit(x, Labels{0, 0, 1, 1});
  CHECK(t.nodes[0].feature == 0);
}

TEST_CASE("boosting fits separable blobs with monotone loss") {
  const auto data = synth::simulate_classification(200, 2, 0, 4.0, 5);
  const Matrix x = to_matrix(data.table);
  const auto model = boost_fit(x, data.labels, {50, 2, 0.1, 1});
  const auto scores = model.predict_proba_rows(x);
  CHECK(auc(data.labels, scores) >= 0.99);
  REQUIRE(model.training_loss.size() == 50);
  for (std::size_t k = 1; k < model.training_loss.size(); ++k) {
    CHECK(model.training_loss[k] <= model.training_loss[k - 1] + 1e-15);
  }
  for (double s : scores) {
    CHECK(s > 0);
    CHECK(s < 1);
  }
  CHECK_THROWS_AS(boost_fit(x, data.labels, {0, 2, 0.1, 1}), ParameterError);
  CHECK_THROWS_AS(boost_fit(x, data.labels, {10, 4, 0.1, 1}), ParameterError);
}

TEST_CASE("boosting on shuffled labels is near chance out of fold") {
  const auto data = synth::simulate_classification(400, 3, 2, 2.0, 9);
  const Matrix x = to_matrix(data.table);
  Labels y = data.labels;
  std::mt19937_64 rng(4);
  std::shuffle(y.begin(), y.end(), rng);
  double total = 0;
  for (int f = 0; f < 5; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (Eigen::Index i = 0; i < x.rows(); ++i) (i % 5 == f ? te : tr).push_back(i);
    Matrix xtr(tr.size(), x.cols()), xte(te.size(), x.cols());
    Labels ytr, yte;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      xtr.row(k) = x.row(tr[k]);
      ytr.push_back(y[tr[k]]);
    }
    for (std::size_t k = 0; k < te.size(); ++k) {
      xte.row(k) = x.row(te[k]);
      yte.push_back(y[te[k]]);
    }
    total += auc(yte, boost_fit(xtr, ytr).predict_proba_rows(xte));
  }
  const double mean_auc = total / 5;
  CHECK(mean_auc >= 0.40);
  CHECK(mean_auc <= 0.60);
}

TEST_CASE("classification metrics") {
  const auto m = classification_metrics({0, 1}, std::vector<double>{0.1, 0.9});
  CHECK(m.auc == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(auc({0, 1, 0, 1}, std::vector<double>{0.5, 0.5, 0.5, 0.5}) == 0.5);
  CHECK(auc({0, 0, 1, 1}, std::vector<double>{0.2, 0.6, 0.4, 0.8}) == 0.75);
  CHECK_THROWS_AS(classification_metrics({1, 1}, std::vector<double>{0.2, 0.7}), InputError);
  const auto one = classification_metrics({1, 1}, std::vector<double>{0.2, 0.7}, false);
  CHECK(std::isnan(one.auc));
  CHECK(one.accuracy == 0.5);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 50; ++rep) {
    Labels y(30);
    std::vector<double> s(30), t(30);
    for (int i = 0; i < 30; ++i) {
      y[i] = i % 3 == 0;
      s[i] = std::round(u(rng) * 10) / 10;
      t[i] = std::pow(s[i], 3) * 0.5 + 0.1;
    }
    CHECK(auc(y, s) == doctest::Approx(brute_auc(y, s)).epsilon(1e-14));
    CHECK(auc(y, s) == auc(y, t));
    const auto mm = classification_metrics(y, s);
    for (double v : {mm.auc, mm.accuracy, mm.ppv, mm.fpr, mm.f1}) {
      CHECK(v >= 0);
      CHECK(v <= 1);
    }
  }
}
