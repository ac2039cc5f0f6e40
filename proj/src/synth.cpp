#include "cgrep/synth.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>

#include "cgrep/common.hpp"

namespace cgrep::synth {

namespace {

/// Uniform draw on the open interval (0, 1).
double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = 0.0;
  while (v <= 0.0) v = u(rng);
  return v;
}

std::string patient_id(std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(n).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%0*zu", width, i + 1);
  return buf;
}

// The FFTW planner is not thread safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void SimSpec::validate() const {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw ParameterError("alpha must be >= 0");
  if (!(lambda_t > 0) || !(lambda_u > 0)) throw ParameterError("baseline rates must be > 0");
  if (beta.empty() || beta.size() != gamma.size()) {
    throw ParameterError("beta and gamma need one entry per feature");
  }
}

namespace {

/// (log V1, log V2); the conditional inverse is evaluated in logs so that
/// large alpha does not overflow V1^-alpha.
std::pair<double, double> clayton_log_pair(double alpha, Rng& rng) {
  const double v1 = open_uniform(rng);
  const double w = open_uniform(rng);
  if (alpha == 0.0) return {std::log(v1), std::log(w)};
  // log V2 = -(1/alpha) log(1 + (W^{-alpha/(1+alpha)} - 1) V1^{-alpha})
  const double p = std::expm1(-alpha / (1.0 + alpha) * std::log(w));
  const double lp = std::log(p) - alpha * std::log(v1);
  const double l = lp > 30.0 ? lp : std::log1p(std::exp(lp));
  return {std::log(v1), -l / alpha};
}

}  // namespace

std::pair<double, double> clayton_pair(double alpha, Rng& rng) {
  const auto [l1, l2] = clayton_log_pair(alpha, rng);
  return {std::exp(l1), std::exp(l2)};
}

SimDataset simulate_dependent(const SimSpec& spec) {
  spec.validate();
  const std::size_t p = spec.beta.size();
  SimDataset out;
  std::vector<std::vector<double>> cols(p, std::vector<double>(spec.n));
  out.latent_t.resize(spec.n);
  out.latent_u.resize(spec.n);
  parallel_for(spec.n, [&](std::size_t i) {
    Rng rng = make_rng(spec.seed, streams::kSimulation, i);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double lin_t = 0, lin_u = 0;
    for (std::size_t j = 0; j < p; ++j) {
      cols[j][i] = unif(rng);
      lin_t += spec.beta[j] * cols[j][i];
      lin_u += spec.gamma[j] * cols[j][i];
    }
    const auto [log_v1, log_v2] = clayton_log_pair(spec.alpha, rng);
    out.latent_t[i] = -log_v1 / (spec.lambda_t * std::exp(lin_t));
    out.latent_u[i] = -log_v2 / (spec.lambda_u * std::exp(lin_u));
  });

  auto& t = out.table;
  t.time_days.emplace(spec.n);
  t.event.emplace(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    t.patient_ids.push_back(patient_id(i, spec.n));
    const double tt = out.latent_t[i], uu = out.latent_u[i];
    const int delta = tt <= uu ? 1 : 0;
    (*t.time_days)[i] = std::min(tt, uu);
    (*t.event)[i] = delta;
    out.records.push_back({t.patient_ids[i], std::min(tt, uu), delta});
  }
  for (std::size_t j = 0; j < p; ++j) t.add_column("x" + std::to_string(j + 1), std::move(cols[j]));
  return out;
}

ClassificationData simulate_classification(std::size_t n, std::size_t n_informative,
                                           std::size_t n_noise, double separation,
                                           std::uint64_t seed) {
  if (n < 4) throw ParameterError("classification simulation needs n >= 4");
  if (n_informative + n_noise == 0) throw ParameterError("no features requested");
  ClassificationData out;
  const std::size_t p = n_informative + n_noise;
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[i] = static_cast<int>(i % 2);
    Rng rng = make_rng(seed, streams::kSimulation, i);
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
      cols[j][i] = z(rng) + (j < n_informative ? out.labels[i] * separation : 0.0);
    }
  }
  auto& t = out.table;
  for (std::size_t i = 0; i < n; ++i) t.patient_ids.push_back(patient_id(i, n));
  t.rep_label.emplace(out.labels.begin(), out.labels.end());
  for (std::size_t j = 0; j < p; ++j) {
    const std::string name = j < n_informative ? "inf" + std::to_string(j + 1)
                                               : "noise" + std::to_string(j - n_informative + 1);
    t.add_column(name, std::move(cols[j]));
  }
  return out;
}

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "constant") return PhantomKind::kConstant;
  if (name == "checkerboard") return PhantomKind::kCheckerboard;
  if (name == "ramp") return PhantomKind::kRamp;
  if (name == "fbm") return PhantomKind::kFbm;
  throw ParameterError("unknown phantom kind: " + name);
}

io::RegionMask standard_mask(const io::Dims& d) {
  std::vector<std::uint8_t> labels(d.size(), 0);
  const std::array<double, 3> n{static_cast<double>(d.nx), static_cast<double>(d.ny),
                                static_cast<double>(d.nz)};
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::array<double, 3> c{static_cast<double>(x), static_cast<double>(y),
                                      static_cast<double>(z)};
        double rho2 = 0;
        for (int a = 0; a < 3; ++a) {
          if (n[a] < 2) continue;
          const double u = (c[a] - (n[a] - 1) / 2.0) / (n[a] / 2.0);
          rho2 += u * u;
        }
        const double rho = std::sqrt(rho2);
        std::uint8_t l = 0;
        if (rho < 0.25) {
          l = static_cast<std::uint8_t>(io::Label::kNecrosis);
        } else if (rho < 0.45) {
          l = static_cast<std::uint8_t>(io::Label::kEnhancing);
        } else if (rho < 0.7) {
          l = static_cast<std::uint8_t>(io::Label::kEdema);
        } else if (rho < 1.0) {
          l = static_cast<std::uint8_t>(io::Label::kBrain);
        }
        labels[d.index(x, y, z)] = l;
      }
    }
  }
  return io::RegionMask(d, std::move(labels));
}

namespace {
constexpr int kAliasImages = 3;
}  // namespace

io::VoxelGrid fbm_field(const io::Dims& d, double hurst, std::uint64_t seed) {
  if (!(hurst > 0 && hurst < 1)) throw ParameterError("Hurst exponent must lie in (0,1)");
  if (d.nx < 8 || d.ny < 8 || (d.nz != 1 && d.nz < 8)) {
    throw ParameterError("fbm phantom needs at least 8 voxels per axis");
  }
  const int dim = d.nz == 1 ? 2 : 3;
  const std::size_t nxc = d.nx / 2 + 1;
  const std::size_t csize = nxc * d.ny * d.nz;
  std::vector<double> field(d.size());
  Rng rng = make_rng(seed, streams::kPhantom);
  std::normal_distribution<double> z(0.0, 1.0);
  for (double& v : field) v = z(rng);

  fftw_complex* spec = fftw_alloc_complex(csize);
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c_3d(static_cast<int>(d.nz), static_cast<int>(d.ny),
                               static_cast<int>(d.nx), field.data(), spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_3d(static_cast<int>(d.nz), static_cast<int>(d.ny),
                               static_cast<int>(d.nx), spec, field.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  const double exponent = -(2.0 * hurst + dim) / 2.0;
  auto freq = [](std::size_t k, std::size_t n) {
    const double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - n;
    return kk / static_cast<double>(n);
  };
  // Power of the sampled continuous field: the spectrum summed over its aliased
  // images. Without the images the lattice field is too smooth at short lags.
  const int mz = dim == 3 ? kAliasImages : 0;
  for (std::size_t kz = 0; kz < d.nz; ++kz) {
    for (std::size_t ky = 0; ky < d.ny; ++ky) {
      for (std::size_t kx = 0; kx < nxc; ++kx) {
        const std::size_t idx = kx + nxc * (ky + d.ny * kz);
        const double fx = static_cast<double>(kx) / static_cast<double>(d.nx);
        const double fy = freq(ky, d.ny), fz = dim == 3 ? freq(kz, d.nz) : 0.0;
        double power = 0.0;
        if (fx != 0 || fy != 0 || fz != 0) {
          for (int ax = -kAliasImages; ax <= kAliasImages; ++ax) {
            for (int ay = -kAliasImages; ay <= kAliasImages; ++ay) {
              for (int az = -mz; az <= mz; ++az) {
                const double f2 = (fx + ax) * (fx + ax) + (fy + ay) * (fy + ay) + (fz + az) * (fz + az);
                power += std::pow(f2, exponent);
              }
            }
          }
        }
        const double gain = std::sqrt(power);
        spec[idx][0] *= gain;
        spec[idx][1] *= gain;
      }
    }
  }
  fftw_execute(inv);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(spec);

  const double n = static_cast<double>(field.size());
  const double mean = std::accumulate(field.begin(), field.end(), 0.0) / n;
  double ss = 0;
  for (double v : field) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  for (double& v : field) v = (v - mean) / sd;
  return io::VoxelGrid(d, {1.0, 1.0, 1.0}, std::move(field));
}

Phantom simulate_phantom(PhantomKind kind, const io::Dims& d, double hurst, std::uint64_t seed) {
  if (d.size() == 0) throw ParameterError("phantom dims must be positive");
  std::vector<double> v(d.size());
  switch (kind) {
    case PhantomKind::kConstant:
      std::fill(v.begin(), v.end(), 100.0);
      break;
    case PhantomKind::kCheckerboard:
    case PhantomKind::kRamp:
      for (std::size_t z = 0; z < d.nz; ++z) {
        for (std::size_t y = 0; y < d.ny; ++y) {
          for (std::size_t x = 0; x < d.nx; ++x) {
            v[d.index(x, y, z)] = kind == PhantomKind::kRamp
                                      ? static_cast<double>(x)
                                      : static_cast<double>(1 + x % 2 + 2 * (y % 2) + 4 * (z % 2));
          }
        }
      }
      break;
    case PhantomKind::kFbm: {
      const auto f = fbm_field(d, hurst, seed);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1000.0 + 100.0 * f.data()[i];
      break;
    }
  }
  return {io::VoxelGrid(d, {1.0, 1.0, 1.0}, std::move(v)), standard_mask(d)};
}

}  // namespace cgrep::synth
