#include "cgrep/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgrep/common.hpp"

namespace cgrep::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw InputError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::span<const double> x) {
  if (x.empty()) throw InputError("median of empty sample");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const std::size_t h = s.size() / 2;
  return s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

namespace {

double poly(std::initializer_list<double> c, double x) {
  double r = 0, p = 1;
  for (double v : c) {
    r += v * p;
    p *= x;
  }
  return r;
}

const boost::math::normal kStdNormal;

}  // namespace

ShapiroWilk shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw InputError("Shapiro-Wilk needs at least 3 values");
  if (n > 5000) throw InputError("Shapiro-Wilk is limited to 5000 values");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (!(x.back() - x.front() > 0)) throw NumericalError("Shapiro-Wilk on constant sample");

  const std::size_t nn2 = n / 2;
  const double an = static_cast<double>(n);
  std::vector<double> a(nn2 + 1);  // 1-based
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    std::vector<double> m(nn2 + 1);
    double summ2 = 0;
    for (std::size_t i = 1; i <= nn2; ++i) {
      m[i] = boost::math::quantile(kStdNormal, (static_cast<double>(i) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 =
        poly({0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056}, rsn) - m[1] / ssumm2;
    std::size_t i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double a2 =
          -m[2] / ssumm2 + poly({0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633}, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = i1; i <= nn2; ++i) a[i] = -m[i] / fac;
  }

  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / an;
  double ss = 0;
  for (double v : x) ss += (v - mu) * (v - mu);
  double num = 0;
  for (std::size_t i = 1; i <= nn2; ++i) num += a[i] * (x[n - i] - x[i - 1]);
  ShapiroWilk r;
  r.w = std::min(1.0, num * num / ss);

  if (n == 3) {
    const double pi6 = 6.0 / M_PI, stqr = M_PI / 3.0;
    r.p = std::max(0.0, pi6 * (std::asin(std::sqrt(r.w)) - stqr));
    return r;
  }
  double y = std::log1p(-r.w);
  const double lxx = std::log(an);
  double m, s;
  if (n <= 11) {
    const double gamma = poly({-2.273, 0.459}, an);
    if (y >= gamma) {
      r.p = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    m = poly({0.544, -0.39978, 0.025054, -6.714e-4}, an);
    s = std::exp(poly({1.3822, -0.77857, 0.062767, -0.0020322}, an));
  } else {
    m = poly({-1.5861, -0.31082, -0.083751, 0.0038915}, lxx);
    s = std::exp(poly({-0.4803, -0.082676, 0.0030302}, lxx));
  }
  r.p = boost::math::cdf(boost::math::complement(boost::math::normal(m, s), y));
  return r;
}

RankSumTest wilcoxon_mann_whitney(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size(), n2 = b.size();
  if (n1 == 0 || n2 == 0) throw InputError("rank-sum test needs two non-empty samples");
  const std::size_t n = n1 + n2;
  std::vector<std::pair<double, int>> all;
  all.reserve(n);
  for (double v : a) all.emplace_back(v, 0);
  for (double v : b) all.emplace_back(v, 1);
  for (const auto& [v, g] : all) {
    if (!std::isfinite(v)) throw InputError("rank-sum test on non-finite value");
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  double r1 = 0, tie_term = 0;
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && all[j + 1].first == all[i].first) ++j;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (all[k].second == 0) r1 += mid;
    }
    i = j + 1;
  }
  RankSumTest res;
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  res.u = r1 - dn1 * (dn1 + 1) / 2.0;

  if (n1 < 50 && n2 < 50 && !ties) {
    // counts[k][s]: subsets of size k of ranks seen so far with sum s
    const std::size_t max_sum = n1 * n;
    std::vector<std::vector<double>> counts(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    counts[0][0] = 1.0;
    for (std::size_t r = 1; r <= n; ++r) {
      for (std::size_t k = std::min(r, n1); k >= 1; --k) {
        for (std::size_t s = max_sum; s >= r; --s) counts[k][s] += counts[k - 1][s - r];
      }
    }
    const std::size_t offset = n1 * (n1 + 1) / 2;
    const auto u = static_cast<std::size_t>(std::llround(res.u));
    double total = 0, le = 0, ge = 0;
    for (std::size_t s = offset; s <= max_sum; ++s) {
      const double c = counts[n1][s];
      total += c;
      if (s - offset <= u) le += c;
      if (s - offset >= u) ge += c;
    }
    res.p = std::min(1.0, 2.0 * std::min(le, ge) / total);
    res.exact = true;
    return res;
  }

  const double mu = dn1 * dn2 / 2.0;
  const double dn = static_cast<double>(n);
  const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0)) {
    res.p = 1.0;
    return res;
  }
  const double z = (std::abs(res.u - mu) - 0.5) / std::sqrt(var);
  res.p = z <= 0 ? 1.0 : std::min(1.0, two_sided_normal_p(z));
  return res;
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw InputError("ANOVA needs at least two groups");
  std::size_t total_n = 0;
  double grand = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw InputError("ANOVA group is empty");
    total_n += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double k = static_cast<double>(groups.size());
  const double n = static_cast<double>(total_n);
  if (total_n <= groups.size()) throw InputError("ANOVA needs more values than groups");
  grand /= n;
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  AnovaResult r;
  r.df_between = k - 1;
  r.df_within = n - k;
  if (!(ssw > 0)) {
    r.f = ssb > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.p = ssb > 0 ? 0.0 : 1.0;
    return r;
  }
  r.f = (ssb / r.df_between) / (ssw / r.df_within);
  const boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p = boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

GatedTest normality_gated_test(std::span<const double> a, std::span<const double> b,
                               double alpha) {
  GatedTest out;
  bool normal = true;
  for (auto g : {a, b}) {
    if (g.size() < 3) {
      out.flagged = true;
      normal = false;
      continue;
    }
    try {
      if (shapiro_wilk(g).p < alpha) normal = false;
    } catch (const NumericalError&) {
      out.flagged = true;
      normal = false;
    }
  }
  if (normal) {
    out.test = kTestAnova;
    out.p = one_way_anova({std::vector<double>(a.begin(), a.end()),
                           std::vector<double>(b.begin(), b.end())})
                .p;
  } else {
    out.test = kTestWilcoxon;
    out.p = wilcoxon_mann_whitney(a, b).p;
  }
  return out;
}

}  // namespace cgrep::stats
