#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgrep/common.hpp"
#include "cgrep/data_io.hpp"
#include "cgrep/learners.hpp"
#include "cgrep/survival.hpp"

namespace cgrep::synth {

/// Generative model: covariates x_j ~ U(0,1); latent death time T and
/// censoring time U with exponential-baseline Cox marginals
/// S_T = exp(-lambda_t t e^{beta'x}), S_U = exp(-lambda_u u e^{gamma'x}),
/// coupled by a Clayton copula with parameter alpha.
struct SimSpec {
  std::size_t n = 300;
  double alpha = 0.0;
  std::vector<double> beta{1.0};
  std::vector<double> gamma{0.5};
  double lambda_t = 1.0;
  double lambda_u = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SimDataset {
  io::FeatureTable table;  // x1..xp plus time_days/event
  survival::SurvivalRecords records;
  std::vector<double> latent_t;
  std::vector<double> latent_u;
};

SimDataset simulate_dependent(const SimSpec& spec);

/// Draws (V1, V2) from the Clayton copula by conditional inversion.
std::pair<double, double> clayton_pair(double alpha, Rng& rng);

struct ClassificationData {
  io::FeatureTable table;  // inf1.. then noise1.., rep_label set
  learn::Labels labels;
};

/// Balanced labels (alternating); informative = label * separation + N(0,1),
/// noise = N(0,1).
ClassificationData simulate_classification(std::size_t n, std::size_t n_informative,
                                           std::size_t n_noise, double separation,
                                           std::uint64_t seed);

enum class PhantomKind { kConstant, kCheckerboard, kRamp, kFbm };

PhantomKind parse_phantom_kind(const std::string& name);

struct Phantom {
  io::VoxelGrid grid;
  io::RegionMask mask;
};

/// Standard 4-region mask of concentric ellipsoids: necrosis core, enhancing
/// shell, edema shell and surrounding brain.
io::RegionMask standard_mask(const io::Dims& dims);

/// constant (100), checkerboard (8-colour voxel parity, values 1..8, so no two
/// 26-neighbours share a level), ramp (I = x) or fbm (1000 + 100 * fbm_field;
/// the amplitude keeps prism heights well above the cell size).
Phantom simulate_phantom(PhantomKind kind, const io::Dims& dims, double hurst, std::uint64_t seed);

/// Zero-mean, unit-variance fBm by spectral synthesis with power |f|^-(2H+d)
/// summed over aliased images; d = 2 when nz == 1, else 3.
io::VoxelGrid fbm_field(const io::Dims& dims, double hurst, std::uint64_t seed);

}  // namespace cgrep::synth
