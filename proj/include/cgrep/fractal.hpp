#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgrep/data_io.hpp"
#include "cgrep/texture.hpp"

namespace cgrep::fractal {

enum class MapKind { kPtpsa, kMbm, kGmbm };

/// Feature-name token of a map kind: "ptpsa", "mBm", "GmBm".
const char* map_token(MapKind kind);

/// Per-voxel local fractal dimension (ptpsa, in [2,3]) or Hölder exponent
/// (mbm/gmbm, in [0,1]). Voxels outside the region of interest hold the
/// lower end of the range and are marked not computed.
struct FractalMap {
  MapKind kind = MapKind::kPtpsa;
  io::VoxelGrid values;
  std::vector<std::uint8_t> computed;
  std::vector<std::uint8_t> flagged;  // zero-variance window: smooth convention applied

  std::size_t flagged_count() const;
};

/// Least-squares line through (log scale, log measure).
struct ScalingFit {
  std::vector<double> log_scale;
  std::vector<double> log_measure;
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

ScalingFit fit_scaling(std::span<const double> scales, std::span<const double> measures);

struct FractalOptions {
  int window = 11;
  std::vector<int> scales{1, 2, 4};
};

/// Optional region of interest: nonzero entries are computed; empty = all.
using Roi = std::vector<std::uint8_t>;

/// Slice-wise (axial) triangular-prism surface area dimension.
FractalMap ptpsa_map(const io::VoxelGrid& grid, const FractalOptions& options,
                     const Roi& roi = {});
/// Hölder exponent from the scaling of mean absolute increments in the window.
FractalMap mbm_map(const io::VoxelGrid& grid, const FractalOptions& options,
                   const Roi& roi = {});
/// Pointwise Hölder exponent from the scaling of local oscillation
/// (max - min over the cube of radius r, r in scales).
FractalMap gmbm_map(const io::VoxelGrid& grid, const FractalOptions& options,
                    const Roi& roi = {});

FractalMap compute_map(MapKind kind, const io::VoxelGrid& grid, const FractalOptions& options,
                       const Roi& roi = {});

/// Triangular-prism surface area of one window at one scale, normalized by the
/// covered planar area. `heights` is window x window, row-major (y, x).
double prism_area(std::span<const double> heights, int window, int scale);

/// Texture families of the three fractal maps restricted to each tumor region:
/// `T1C_<map>_<family>_<feature>` for the whole tumor and
/// `T1C_<map>_<region>_<family>_<feature>` for sub-regions.
texture::FeatureMap extract_fractal(const io::VoxelGrid& grid, const io::RegionMask& mask,
                                    const FractalOptions& fractal,
                                    const texture::TextureOptions& texture,
                                    std::vector<FractalMap>* maps_out = nullptr);

}  // namespace cgrep::fractal
