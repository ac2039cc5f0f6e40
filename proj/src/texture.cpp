#include "cgrep/texture.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cgrep/common.hpp"

namespace cgrep::texture {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> region_indices(const io::RegionMask& mask, const Region& region) {
  std::vector<std::size_t> out;
  const auto labels = mask.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (region.contains(labels[i])) out.push_back(i);
  }
  return out;
}

std::array<std::size_t, 3> coords_of(const io::Dims& d, std::size_t idx) {
  return {idx % d.nx, (idx / d.nx) % d.ny, idx / (d.nx * d.ny)};
}

}  // namespace

double lookup(const FeatureMap& features, const std::string& name) {
  for (const auto& [k, v] : features) {
    if (k == name) return v;
  }
  throw InputError("feature '" + name + "' not present");
}

Region region_of(std::initializer_list<io::Label> labels, std::string name) {
  Region r{std::move(name), 0};
  for (auto l : labels) r.label_bits |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(l));
  return r;
}

const std::vector<Region>& tumor_regions() {
  using io::Label;
  static const std::vector<Region> regions{
      region_of({Label::kEdema, Label::kEnhancing, Label::kNecrosis}, "wt"),
      region_of({Label::kEdema}, "ed"),
      region_of({Label::kEnhancing}, "et"),
      region_of({Label::kNecrosis}, "nec"),
  };
  return regions;
}

const Region& brain_region() {
  using io::Label;
  static const Region brain = region_of(
      {Label::kEdema, Label::kEnhancing, Label::kNecrosis, Label::kBrain}, "brain");
  return brain;
}

const std::array<Offset, 13>& canonical_directions() {
  static const std::array<Offset, 13> dirs = [] {
    std::array<Offset, 13> out{};
    std::size_t k = 0;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const bool positive = dx > 0 || (dx == 0 && dy > 0) || (dx == 0 && dy == 0 && dz > 0);
          if (positive) out[k++] = {dx, dy, dz};
        }
      }
    }
    return out;
  }();
  return dirs;
}

std::vector<Offset> direction_table(const std::vector<int>& distances) {
  std::vector<Offset> table;
  for (int d : distances) {
    if (d < 1) throw ParameterError("offset distances must be >= 1");
    for (const auto& dir : canonical_directions()) {
      table.push_back({dir[0] * d, dir[1] * d, dir[2] * d});
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

QuantizedRegion::QuantizedRegion(int levels, io::Dims box, std::array<std::size_t, 3> origin,
                                 std::vector<int> box_levels)
    : levels_(levels), box_(box), origin_(origin), levels_at_(std::move(box_levels)) {
  if (levels_ < 2) throw ParameterError("quantization needs at least 2 levels");
  if (levels_at_.size() != box_.size()) throw InputError("quantized box size mismatch");
  for (int l : levels_at_) {
    if (l < 0 || l > levels_) throw InputError("quantized level out of range");
    if (l > 0) ++count_;
  }
  if (count_ == 0) throw InputError("empty region");
}

int quantize_value(double value, double lo, double hi, int levels) {
  if (!(hi > lo)) return 1;
  const double scaled = std::floor(levels * (value - lo) / (hi - lo));
  return std::clamp(1 + static_cast<int>(scaled), 1, levels);
}

QuantizedRegion quantize(const io::VoxelGrid& grid, const io::RegionMask& mask,
                         const Region& region, int levels) {
  if (levels < 2) throw ParameterError("quantization needs at least 2 levels");
  if (!(grid.dims() == mask.dims())) throw InputError("mask does not align with grid");
  const auto idx = region_indices(mask, region);
  if (idx.empty()) throw InputError("empty region '" + region.name + "'");
  const auto data = grid.data();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::array<std::size_t, 3> bmin{grid.dims().nx, grid.dims().ny, grid.dims().nz};
  std::array<std::size_t, 3> bmax{0, 0, 0};
  for (auto i : idx) {
    const double v = data[i];
    if (!std::isfinite(v)) throw InputError("non-finite intensity in region");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    const auto c = coords_of(grid.dims(), i);
    for (int a = 0; a < 3; ++a) {
      bmin[a] = std::min(bmin[a], c[a]);
      bmax[a] = std::max(bmax[a], c[a]);
    }
  }
  const io::Dims box{bmax[0] - bmin[0] + 1, bmax[1] - bmin[1] + 1, bmax[2] - bmin[2] + 1};
  std::vector<int> levels_at(box.size(), 0);
  for (auto i : idx) {
    const auto c = coords_of(grid.dims(), i);
    levels_at[box.index(c[0] - bmin[0], c[1] - bmin[1], c[2] - bmin[2])] =
        quantize_value(data[i], lo, hi, levels);
  }
  return QuantizedRegion(levels, box, bmin, std::move(levels_at));
}

// ---------------------------------------------------------------------------
// Grey-tone spatial dependence

CooccurrenceMatrix cooccurrence(const QuantizedRegion& q, const Offset& offset) {
  if (offset == Offset{0, 0, 0}) throw ParameterError("offset must be nonzero");
  const int L = q.levels();
  CooccurrenceMatrix m;
  m.levels = L;
  m.offset = offset;
  m.p.assign(static_cast<std::size_t>(L) * L, 0.0);
  const auto& box = q.box();
  double total = 0.0;
  for (std::size_t z = 0; z < box.nz; ++z) {
    for (std::size_t y = 0; y < box.ny; ++y) {
      for (std::size_t x = 0; x < box.nx; ++x) {
        const int i = q.at(x, y, z);
        if (i == 0) continue;
        const int j = q.at(static_cast<long>(x) + offset[0], static_cast<long>(y) + offset[1],
                           static_cast<long>(z) + offset[2]);
        if (j == 0) continue;
        m.p[(i - 1) * L + (j - 1)] += 1.0;
        m.p[(j - 1) * L + (i - 1)] += 1.0;
        total += 2.0;
      }
    }
  }
  if (total == 0.0) throw InputError("no in-region voxel pairs at offset");
  for (auto& v : m.p) v /= total;
  return m;
}

FeatureMap gtsdm_features(const CooccurrenceMatrix& m) {
  const int L = m.levels;
  double autocorr = 0, contrast = 0, energy = 0, entropy = 0, homogeneity = 0;
  std::vector<double> marginal(L, 0.0);
  for (int i = 1; i <= L; ++i) {
    for (int j = 1; j <= L; ++j) {
      const double p = m(i, j);
      if (p == 0.0) continue;
      const double d = i - j;
      autocorr += i * j * p;
      contrast += d * d * p;
      energy += p * p;
      entropy -= p * std::log2(p);
      homogeneity += p / (1.0 + d * d);
      marginal[i - 1] += p;
    }
  }
  double mu = 0;
  for (int i = 1; i <= L; ++i) mu += i * marginal[i - 1];
  double var = 0;
  for (int i = 1; i <= L; ++i) var += (i - mu) * (i - mu) * marginal[i - 1];
  const double correlation = var > 1e-15 ? (autocorr - mu * mu) / var : 1.0;
  return {{"Autocorrelation", autocorr}, {"Contrast", contrast},       {"Energy", energy},
          {"Entropy", entropy},          {"Homogeneity", homogeneity}, {"Correlation", correlation}};
}

FeatureMap gtsdm_features(const QuantizedRegion& q, const Offset& offset) {
  return gtsdm_features(cooccurrence(q, offset));
}

// ---------------------------------------------------------------------------
// Neighbourhood grey-tone difference

NeighborhoodDifferenceTable ngtdm_table(const QuantizedRegion& q) {
  const int L = q.levels();
  NeighborhoodDifferenceTable t;
  t.s.assign(L, 0.0);
  t.n.assign(L, 0.0);
  t.p.assign(L, 0.0);
  const auto& box = q.box();
  for (long z = 0; z < static_cast<long>(box.nz); ++z) {
    for (long y = 0; y < static_cast<long>(box.ny); ++y) {
      for (long x = 0; x < static_cast<long>(box.nx); ++x) {
        const int i = q.at(x, y, z);
        if (i == 0) continue;
        double sum = 0;
        int count = 0;
        for (int dz = -1; dz <= 1; ++dz) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              const int j = q.at(x + dx, y + dy, z + dz);
              if (j == 0) continue;
              sum += j;
              ++count;
            }
          }
        }
        if (count == 0) continue;
        t.s[i - 1] += std::abs(i - sum / count);
        t.n[i - 1] += 1.0;
        t.total += 1.0;
      }
    }
  }
  if (t.total > 0) {
    for (int i = 0; i < L; ++i) t.p[i] = t.n[i] / t.total;
  }
  return t;
}

FeatureMap ngtdm_features(const NeighborhoodDifferenceTable& t) {
  const int L = static_cast<int>(t.s.size());
  std::vector<int> occupied;
  for (int i = 1; i <= L; ++i) {
    if (t.p[i - 1] > 0) occupied.push_back(i);
  }
  const double Ng = static_cast<double>(occupied.size());
  double sum_ps = 0, sum_s = 0;
  for (int i : occupied) {
    sum_ps += t.p[i - 1] * t.s[i - 1];
    sum_s += t.s[i - 1];
  }
  double pair_contrast = 0, busy_den = 0, complexity = 0, strength_num = 0;
  for (int i : occupied) {
    const double pi = t.p[i - 1], si = t.s[i - 1];
    for (int j : occupied) {
      const double pj = t.p[j - 1], sj = t.s[j - 1];
      const double d = i - j;
      pair_contrast += pi * pj * d * d;
      busy_den += std::abs(i * pi - j * pj);
      complexity += std::abs(d) * (pi * si + pj * sj) / (pi + pj);
      strength_num += (pi + pj) * d * d;
    }
  }
  const double coarseness = 1.0 / (kNgtdmEpsilon + sum_ps);
  const double contrast =
      (Ng > 1 && t.total > 0) ? pair_contrast / (Ng * (Ng - 1)) * (sum_s / t.total) : 0.0;
  const double busyness = (Ng > 1 && busy_den > 0) ? sum_ps / busy_den : 0.0;
  const double cplx = t.total > 0 ? complexity / t.total : 0.0;
  const double strength = strength_num / (kNgtdmEpsilon + sum_s);
  return {{"Coarseness", coarseness},
          {"Contrast", contrast},
          {"Busyness", busyness},
          {"Complexity", cplx},
          {"Strength", strength}};
}

FeatureMap ngtdm_features(const QuantizedRegion& q) { return ngtdm_features(ngtdm_table(q)); }

// ---------------------------------------------------------------------------
// Grey-level size zones

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent, size;
  explicit DisjointSet(std::size_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

ZoneSizeMatrix zone_size_matrix(const QuantizedRegion& q) {
  const auto& box = q.box();
  DisjointSet sets(box.size());
  for (long z = 0; z < static_cast<long>(box.nz); ++z) {
    for (long y = 0; y < static_cast<long>(box.ny); ++y) {
      for (long x = 0; x < static_cast<long>(box.nx); ++x) {
        const int level = q.at(x, y, z);
        if (level == 0) continue;
        for (const auto& d : canonical_directions()) {
          const long nx = x + d[0], ny = y + d[1], nz = z + d[2];
          if (q.at(nx, ny, nz) == level) {
            sets.unite(box.index(x, y, z), box.index(nx, ny, nz));
          }
        }
      }
    }
  }
  ZoneSizeMatrix zm;
  zm.levels = q.levels();
  zm.voxels = q.voxel_count();
  std::vector<std::pair<int, std::size_t>> zones;  // (level, size)
  for (std::size_t i = 0; i < box.size(); ++i) {
    const int level = q.box_levels()[i];
    if (level == 0 || sets.find(i) != i) continue;
    zones.emplace_back(level, sets.size[i]);
    zm.max_zone = std::max(zm.max_zone, sets.size[i]);
  }
  zm.counts.assign(zm.levels, std::vector<std::size_t>(zm.max_zone, 0));
  for (const auto& [level, size] : zones) ++zm.counts[level - 1][size - 1];
  zm.zones = zones.size();
  return zm;
}

FeatureMap glzsm_features(const ZoneSizeMatrix& zm) {
  double sze = 0, lze = 0, lglze = 0, hglze = 0, szlge = 0, szhge = 0, lzlge = 0, lzhge = 0;
  std::vector<double> per_level(zm.levels, 0.0), per_size(zm.max_zone, 0.0);
  for (int g = 1; g <= zm.levels; ++g) {
    for (std::size_t s = 1; s <= zm.max_zone; ++s) {
      const double c = static_cast<double>(zm.counts[g - 1][s - 1]);
      if (c == 0) continue;
      const double s2 = static_cast<double>(s) * static_cast<double>(s);
      const double g2 = static_cast<double>(g) * g;
      sze += c / s2;
      lze += c * s2;
      lglze += c / g2;
      hglze += c * g2;
      szlge += c / (s2 * g2);
      szhge += c * g2 / s2;
      lzlge += c * s2 / g2;
      lzhge += c * s2 * g2;
      per_level[g - 1] += c;
      per_size[s - 1] += c;
    }
  }
  double gln = 0, zsn = 0;
  for (double v : per_level) gln += v * v;
  for (double v : per_size) zsn += v * v;
  const double Z = static_cast<double>(zm.zones);
  return {{"SmallZoneEmphasis", sze / Z},
          {"LargeZoneEmphasis", lze / Z},
          {"LowGrayLevelZoneEmphasis", lglze / Z},
          {"HighGrayLevelZoneEmphasis", hglze / Z},
          {"SmallZoneLowGrayEmphasis", szlge / Z},
          {"SmallZoneHighGrayEmphasis", szhge / Z},
          {"LargeZoneLowGrayEmphasis", lzlge / Z},
          {"LargeZoneHighGrayEmphasis", lzhge / Z},
          {"GrayLevelNonUniformity", gln / Z},
          {"ZoneSizeNonUniformity", zsn / Z},
          {"ZonePercentage", Z / static_cast<double>(zm.voxels)}};
}

FeatureMap glzsm_features(const QuantizedRegion& q) { return glzsm_features(zone_size_matrix(q)); }

// ---------------------------------------------------------------------------
// Histogram

HistogramSummary histogram_summary(const std::vector<double>& values, int levels) {
  if (values.empty()) throw InputError("empty region");
  if (levels < 2) throw ParameterError("histogram needs at least 2 bins");
  const double n = static_cast<double>(values.size());
  double lo = values[0], hi = values[0], sum = 0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  HistogramSummary h;
  h.mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : values) {
    const double d = v - h.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (hi == lo || m2 <= 1e-24 * scale * scale) {
    h.variance = 0;
    h.skewness = 0;
    h.kurtosis = 0;
    h.degenerate = true;
  } else {
    h.variance = m2;
    h.skewness = m3 / std::pow(m2, 1.5);
    h.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  std::vector<double> bins(levels, 0.0);
  for (double v : values) bins[quantize_value(v, lo, hi, levels) - 1] += 1.0;
  h.energy = 0;
  h.entropy = 0;
  for (double c : bins) {
    if (c == 0) continue;
    const double p = c / n;
    h.energy += p * p;
    h.entropy -= p * std::log2(p);
  }
  return h;
}

HistogramSummary histogram_features(const io::VoxelGrid& grid, const io::RegionMask& mask,
                                    const Region& region, int levels) {
  if (!(grid.dims() == mask.dims())) throw InputError("mask does not align with grid");
  std::vector<double> values;
  const auto data = grid.data();
  for (auto i : region_indices(mask, region)) values.push_back(data[i]);
  if (values.empty()) throw InputError("empty region '" + region.name + "'");
  return histogram_summary(values, levels);
}

FeatureMap to_feature_map(const HistogramSummary& h) {
  return {{"Mean", h.mean},         {"Variance", h.variance}, {"Skewness", h.skewness},
          {"Kurtosis", h.kurtosis}, {"Energy", h.energy},     {"Entropy", h.entropy}};
}

// ---------------------------------------------------------------------------
// Shape

ShapeSummary shape_features(const io::RegionMask& mask, const Region& region,
                            const Region& brain, const std::array<double, 3>& spacing) {
  const auto idx = region_indices(mask, region);
  if (idx.empty()) throw InputError("empty region '" + region.name + "'");
  const auto& dims = mask.dims();
  ShapeSummary s;
  s.voxels = idx.size();
  s.volume = static_cast<double>(idx.size()) * spacing[0] * spacing[1] * spacing[2];
  const auto brain_voxels = region_indices(mask, brain).size();
  s.volume_ratio = brain_voxels > 0
                       ? static_cast<double>(idx.size()) / static_cast<double>(brain_voxels)
                       : kNaN;

  s.bbox_min = {dims.nx, dims.ny, dims.nz};
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (auto i : idx) {
    const auto c = coords_of(dims, i);
    for (int a = 0; a < 3; ++a) {
      s.bbox_min[a] = std::min(s.bbox_min[a], c[a]);
      s.bbox_max[a] = std::max(s.bbox_max[a], c[a]);
      mean[a] += static_cast<double>(c[a]) * spacing[a];
    }
  }
  mean /= static_cast<double>(idx.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto i : idx) {
    const auto c = coords_of(dims, i);
    Eigen::Vector3d p(c[0] * spacing[0], c[1] * spacing[1], c[2] * spacing[2]);
    p -= mean;
    cov += p * p.transpose();
  }
  cov /= static_cast<double>(idx.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
  const Eigen::Matrix3d evecs = solver.eigenvectors();
  for (int k = 0; k < 3; ++k) {
    const double lambda = std::max(0.0, evals[2 - k]);
    s.axis_length[k] = 4.0 * std::sqrt(lambda);
    const double cosine = std::min(1.0, std::abs(evecs(k, 2 - k)));
    s.orientation[k] = std::acos(cosine);
  }
  const double l1 = std::max(0.0, evals[2]);
  const double l2 = std::max(0.0, evals[1]);
  if (l1 <= 0.0) {
    s.eccentricity = 0.0;
    s.degenerate = true;
  } else if (l2 <= 1e-12 * l1) {
    s.eccentricity = 1.0;
    s.degenerate = true;
  } else {
    s.eccentricity = std::sqrt(std::max(0.0, 1.0 - l2 / l1));
  }
  double box_voxels = 1.0;
  for (int a = 0; a < 3; ++a) box_voxels *= static_cast<double>(s.bbox_max[a] - s.bbox_min[a] + 1);
  s.extent = static_cast<double>(idx.size()) / box_voxels;
  return s;
}

FeatureMap to_feature_map(const ShapeSummary& s) {
  auto d = [](std::size_t v) { return static_cast<double>(v); };
  return {{"Volume", s.volume},
          {"VolumeRatio", s.volume_ratio},
          {"MajorAxisLength", s.axis_length[0]},
          {"SecondAxisLength", s.axis_length[1]},
          {"ThirdAxisLength", s.axis_length[2]},
          {"Eccentricity", s.eccentricity},
          {"L1_Orientation", s.orientation[0]},
          {"L2_Orientation", s.orientation[1]},
          {"L3_Orientation", s.orientation[2]},
          {"Extent", s.extent},
          {"up_left_x", d(s.bbox_min[0])},
          {"up_left_y", d(s.bbox_min[1])},
          {"up_left_z", d(s.bbox_min[2])},
          {"low_right_x", d(s.bbox_max[0])},
          {"low_right_y", d(s.bbox_max[1])},
          {"low_right_z", d(s.bbox_max[2])}};
}

// ---------------------------------------------------------------------------
// Row assembly

namespace {

const char* const kGtsdmNames[] = {"Autocorrelation", "Contrast",    "Energy",
                                   "Entropy",         "Homogeneity", "Correlation"};
const char* const kNgtdmNames[] = {"Coarseness", "Contrast", "Busyness", "Complexity",
                                   "Strength"};
const char* const kGlzsmNames[] = {
    "SmallZoneEmphasis",        "LargeZoneEmphasis",         "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis", "SmallZoneLowGrayEmphasis", "SmallZoneHighGrayEmphasis",
    "LargeZoneLowGrayEmphasis", "LargeZoneHighGrayEmphasis", "GrayLevelNonUniformity",
    "ZoneSizeNonUniformity",    "ZonePercentage"};
const char* const kHistogramNames[] = {"Mean",     "Variance", "Skewness",
                                       "Kurtosis", "Energy",   "Entropy"};
const char* const kShapeNames[] = {
    "Volume",         "VolumeRatio",    "MajorAxisLength", "SecondAxisLength",
    "ThirdAxisLength", "Eccentricity",  "L1_Orientation",  "L2_Orientation",
    "L3_Orientation", "Extent",         "up_left_x",       "up_left_y",
    "up_left_z",      "low_right_x",    "low_right_y",     "low_right_z"};

void append(FeatureMap& out, const std::string& prefix, const FeatureMap& part,
            const std::string& suffix = {}) {
  for (const auto& [k, v] : part) out.emplace_back(prefix + k + suffix, v);
}

template <std::size_t N>
void append_missing(FeatureMap& out, const std::string& prefix, const char* const (&names)[N],
                    const std::string& suffix = {}) {
  for (const char* n : names) out.emplace_back(prefix + n + suffix, kNaN);
}

bool region_present(const io::RegionMask& mask, const Region& region) {
  const auto labels = mask.labels();
  return std::any_of(labels.begin(), labels.end(),
                     [&](std::uint8_t l) { return region.contains(l); });
}

}  // namespace

FeatureMap texture_families(const io::VoxelGrid& image, const io::RegionMask& mask,
                            const Region& region, const std::string& prefix,
                            const TextureOptions& options) {
  FeatureMap out;
  const auto offsets = direction_table(options.distances);
  const std::string gp = prefix + "_GTSDM_";
  if (!region_present(mask, region)) {
    append_missing(out, gp, kGtsdmNames);
    if (options.per_offset) {
      for (std::size_t k = 1; k <= offsets.size(); ++k) {
        append_missing(out, gp, kGtsdmNames, "_d" + std::to_string(k));
      }
    }
    append_missing(out, prefix + "_NGTDM_", kNgtdmNames);
    append_missing(out, prefix + "_GLZSM_", kGlzsmNames);
    append_missing(out, prefix + "_Histogram_", kHistogramNames);
    return out;
  }

  const QuantizedRegion q = quantize(image, mask, region, options.levels);
  std::vector<FeatureMap> per_offset;
  per_offset.reserve(offsets.size());
  std::vector<double> mean(std::size(kGtsdmNames), 0.0);
  int valid = 0;
  for (const auto& off : offsets) {
    FeatureMap f;
    try {
      f = gtsdm_features(q, off);
      for (std::size_t k = 0; k < f.size(); ++k) mean[k] += f[k].second;
      ++valid;
    } catch (const InputError&) {
      for (const char* n : kGtsdmNames) f.emplace_back(n, kNaN);
    }
    per_offset.push_back(std::move(f));
  }
  for (std::size_t k = 0; k < mean.size(); ++k) {
    out.emplace_back(gp + kGtsdmNames[k], valid > 0 ? mean[k] / valid : kNaN);
  }
  if (options.per_offset) {
    for (std::size_t k = 0; k < per_offset.size(); ++k) {
      append(out, gp, per_offset[k], "_d" + std::to_string(k + 1));
    }
  }
  append(out, prefix + "_NGTDM_", ngtdm_features(q));
  append(out, prefix + "_GLZSM_", glzsm_features(q));
  append(out, prefix + "_Histogram_",
         to_feature_map(histogram_features(image, mask, region, options.levels)));
  return out;
}

FeatureMap extract_conventional(const io::VoxelGrid& grid, const io::RegionMask& mask,
                                const TextureOptions& options) {
  if (!(grid.dims() == mask.dims())) throw InputError("mask does not align with grid");
  FeatureMap row;
  for (const auto& region : tumor_regions()) {
    const std::string prefix = "T1C_" + region.name;
    append(row, "", texture_families(grid, mask, region, prefix, options));
    if (region_present(mask, region)) {
      append(row, prefix + "_Shape_",
             to_feature_map(shape_features(mask, region, brain_region(), grid.spacing())));
    } else {
      append_missing(row, prefix + "_Shape_", kShapeNames);
    }
  }
  return row;
}

std::vector<std::pair<std::string, std::string>> feature_definitions() {
  return {
      {"GTSDM_Autocorrelation", "sum_ij i*j*p(i,j) of the symmetric normalized co-occurrence matrix"},
      {"GTSDM_Contrast", "sum_ij (i-j)^2 p(i,j)"},
      {"GTSDM_Energy", "sum_ij p(i,j)^2"},
      {"GTSDM_Entropy", "-sum_ij p(i,j) log2 p(i,j)"},
      {"GTSDM_Homogeneity", "sum_ij p(i,j)/(1+(i-j)^2)"},
      {"GTSDM_Correlation", "(sum_ij i*j*p(i,j) - mu^2)/sigma^2 of the marginal; 1 when sigma=0"},
      {"NGTDM_Coarseness", "1/(eps + sum_i p_i s_i), eps=1e-6"},
      {"NGTDM_Contrast", "[sum_ij p_i p_j (i-j)^2 / (Ng(Ng-1))] * sum_i s_i / N"},
      {"NGTDM_Busyness", "sum_i p_i s_i / sum_ij |i p_i - j p_j|"},
      {"NGTDM_Complexity", "sum_ij |i-j| (p_i s_i + p_j s_j)/(p_i + p_j) / N"},
      {"NGTDM_Strength", "sum_ij (p_i + p_j)(i-j)^2 / (eps + sum_i s_i), eps=1e-6"},
      {"GLZSM_SmallZoneEmphasis", "(1/Z) sum Z(g,s)/s^2"},
      {"GLZSM_LargeZoneEmphasis", "(1/Z) sum Z(g,s) s^2"},
      {"GLZSM_LowGrayLevelZoneEmphasis", "(1/Z) sum Z(g,s)/g^2"},
      {"GLZSM_HighGrayLevelZoneEmphasis", "(1/Z) sum Z(g,s) g^2"},
      {"GLZSM_SmallZoneLowGrayEmphasis", "(1/Z) sum Z(g,s)/(s^2 g^2)"},
      {"GLZSM_SmallZoneHighGrayEmphasis", "(1/Z) sum Z(g,s) g^2/s^2"},
      {"GLZSM_LargeZoneLowGrayEmphasis", "(1/Z) sum Z(g,s) s^2/g^2"},
      {"GLZSM_LargeZoneHighGrayEmphasis", "(1/Z) sum Z(g,s) s^2 g^2"},
      {"GLZSM_GrayLevelNonUniformity", "(1/Z) sum_g (sum_s Z(g,s))^2"},
      {"GLZSM_ZoneSizeNonUniformity", "(1/Z) sum_s (sum_g Z(g,s))^2"},
      {"GLZSM_ZonePercentage", "Z / region voxel count"},
      {"Histogram_Mean", "mean of raw region values"},
      {"Histogram_Variance", "population variance of raw region values"},
      {"Histogram_Skewness", "third standardized moment (0 for zero variance)"},
      {"Histogram_Kurtosis", "excess kurtosis (0 for zero variance)"},
      {"Histogram_Energy", "sum_k p_k^2 over the L-bin min-max histogram"},
      {"Histogram_Entropy", "-sum_k p_k log2 p_k over the L-bin min-max histogram"},
      {"Shape_Volume", "voxel count times voxel volume (mm^3)"},
      {"Shape_VolumeRatio", "region voxel count / brain voxel count"},
      {"Shape_MajorAxisLength", "4 sqrt(largest eigenvalue of coordinate covariance), mm"},
      {"Shape_SecondAxisLength", "4 sqrt(second eigenvalue), mm"},
      {"Shape_ThirdAxisLength", "4 sqrt(smallest eigenvalue), mm"},
      {"Shape_Eccentricity", "sqrt(1 - lambda2/lambda1)"},
      {"Shape_L1_Orientation", "angle (rad) between first principal axis and x axis"},
      {"Shape_L2_Orientation", "angle (rad) between second principal axis and y axis"},
      {"Shape_L3_Orientation", "angle (rad) between third principal axis and z axis"},
      {"Shape_Extent", "region voxels / bounding-box voxels"},
      {"Shape_up_left_x", "minimum x voxel index"},
      {"Shape_up_left_y", "minimum y voxel index"},
      {"Shape_up_left_z", "minimum z voxel index"},
      {"Shape_low_right_x", "maximum x voxel index"},
      {"Shape_low_right_y", "maximum y voxel index"},
      {"Shape_low_right_z", "maximum z voxel index"},
  };
}

}  // namespace cgrep::texture
