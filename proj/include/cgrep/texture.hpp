#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cgrep/data_io.hpp"

namespace cgrep::texture {

/// Ordered (name, value) list; order is part of the output contract.
using FeatureMap = std::vector<std::pair<std::string, double>>;

double lookup(const FeatureMap& features, const std::string& name);

/// Set of mask labels forming one analysis region.
struct Region {
  std::string name;
  std::uint8_t label_bits = 0;  // bit l set <=> label l belongs to the region

  bool contains(std::uint8_t label) const { return (label_bits >> label) & 1u; }
};

Region region_of(std::initializer_list<io::Label> labels, std::string name);
/// wt (1,2,3), ed (1), et (2), nec (3), in that order.
const std::vector<Region>& tumor_regions();
/// Every non-background label.
const Region& brain_region();

using Offset = std::array<int, 3>;

/// The 13 unique 3D directions (first nonzero component positive), sorted
/// lexicographically by (dx, dy, dz).
const std::array<Offset, 13>& canonical_directions();
/// Direction table indexed 1..13*distances.size(): index k = 13*(d-1) + j + 1
/// for distance index d (1-based) and direction j (0-based).
std::vector<Offset> direction_table(const std::vector<int>& distances);

/// Min-max quantized region, stored densely over its bounding box.
class QuantizedRegion {
 public:
  QuantizedRegion(int levels, io::Dims box, std::array<std::size_t, 3> origin,
                  std::vector<int> box_levels);

  int levels() const { return levels_; }
  const io::Dims& box() const { return box_; }
  const std::array<std::size_t, 3>& origin() const { return origin_; }
  std::size_t voxel_count() const { return count_; }
  /// Level at box-local coordinates; 0 outside the box or the region.
  int at(long x, long y, long z) const {
    if (x < 0 || y < 0 || z < 0 || x >= static_cast<long>(box_.nx) ||
        y >= static_cast<long>(box_.ny) || z >= static_cast<long>(box_.nz)) {
      return 0;
    }
    return levels_at_[box_.index(x, y, z)];
  }
  const std::vector<int>& box_levels() const { return levels_at_; }

 private:
  int levels_;
  io::Dims box_;
  std::array<std::size_t, 3> origin_;
  std::vector<int> levels_at_;
  std::size_t count_ = 0;
};

/// level = min(L, 1 + floor(L (I - min) / (max - min))); constant regions map to 1.
int quantize_value(double value, double lo, double hi, int levels);

QuantizedRegion quantize(const io::VoxelGrid& grid, const io::RegionMask& mask,
                         const Region& region, int levels);

struct CooccurrenceMatrix {
  int levels = 0;
  Offset offset{};
  std::vector<double> p;  // row-major levels x levels, index (i-1)*L + (j-1)

  double operator()(int i, int j) const { return p[(i - 1) * levels + (j - 1)]; }
};

/// Symmetric, normalized co-occurrence over in-region voxel pairs at offset.
CooccurrenceMatrix cooccurrence(const QuantizedRegion& q, const Offset& offset);
/// Autocorrelation, Contrast, Energy, Entropy, Homogeneity, Correlation.
FeatureMap gtsdm_features(const CooccurrenceMatrix& m);
FeatureMap gtsdm_features(const QuantizedRegion& q, const Offset& offset);

struct NeighborhoodDifferenceTable {
  std::vector<double> s;      // per level 1..L (index level-1)
  std::vector<double> n;      // voxel counts per level
  std::vector<double> p;      // n / N
  double total = 0.0;         // N, voxels with at least one in-region neighbour
};

/// 26-neighbourhood, partial neighbourhoods at region borders.
NeighborhoodDifferenceTable ngtdm_table(const QuantizedRegion& q);
/// Coarseness, Contrast, Busyness, Complexity, Strength.
FeatureMap ngtdm_features(const NeighborhoodDifferenceTable& t);
FeatureMap ngtdm_features(const QuantizedRegion& q);

inline constexpr double kNgtdmEpsilon = 1e-6;

struct ZoneSizeMatrix {
  int levels = 0;
  std::size_t max_zone = 0;
  std::vector<std::vector<std::size_t>> counts;  // [level-1][size-1]
  std::size_t zones = 0;
  std::size_t voxels = 0;
};

/// 26-connected constant-level zones.
ZoneSizeMatrix zone_size_matrix(const QuantizedRegion& q);
FeatureMap glzsm_features(const ZoneSizeMatrix& z);
FeatureMap glzsm_features(const QuantizedRegion& q);

struct HistogramSummary {
  double mean = 0, variance = 0, skewness = 0, kurtosis = 0, energy = 1, entropy = 0;
  bool degenerate = false;  // zero variance; skewness/kurtosis set to 0
};

/// Moments of raw values (excess kurtosis); energy/entropy on an L-bin
/// min-max histogram.
HistogramSummary histogram_summary(const std::vector<double>& values, int levels);
HistogramSummary histogram_features(const io::VoxelGrid& grid, const io::RegionMask& mask,
                                    const Region& region, int levels);
FeatureMap to_feature_map(const HistogramSummary& h);

struct ShapeSummary {
  std::size_t voxels = 0;
  double volume = 0;        // mm^3
  double volume_ratio = 0;  // region volume / brain volume
  std::array<double, 3> axis_length{};    // mm, descending
  double eccentricity = 0;
  std::array<double, 3> orientation{};    // radians, principal axis k vs coordinate axis k
  double extent = 0;
  std::array<std::size_t, 3> bbox_min{};  // voxel indices
  std::array<std::size_t, 3> bbox_max{};
  bool degenerate = false;
};

ShapeSummary shape_features(const io::RegionMask& mask, const Region& region,
                            const Region& brain, const std::array<double, 3>& spacing);
FeatureMap to_feature_map(const ShapeSummary& s);

struct TextureOptions {
  int levels = 32;
  std::vector<int> distances{1, 2, 3};
  bool per_offset = true;  // emit the _d<k> variants of GTSDM features
};

/// GTSDM (direction mean and, optionally, each offset), NGTDM, GLZSM and
/// histogram features of `image` within `region`, names prefixed by `prefix`.
/// A missing region yields NaN for every name.
FeatureMap texture_families(const io::VoxelGrid& image, const io::RegionMask& mask,
                            const Region& region, const std::string& prefix,
                            const TextureOptions& options);

/// Conventional feature row: `T1C_<region>_<family>_<feature>[_d<k>]` for the
/// regions wt, ed, et, nec, plus shape descriptors.
FeatureMap extract_conventional(const io::VoxelGrid& grid, const io::RegionMask& mask,
                                const TextureOptions& options);

/// Name -> definition text for the feature dictionary.
std::vector<std::pair<std::string, std::string>> feature_definitions();

}  // namespace cgrep::texture
