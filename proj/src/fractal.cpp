#include "cgrep/fractal.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <cmath>
#include <numeric>

#include "cgrep/common.hpp"

namespace cgrep::fractal {

const char* map_token(MapKind kind) {
  switch (kind) {
    case MapKind::kPtpsa: return "ptpsa";
    case MapKind::kMbm: return "mBm";
    case MapKind::kGmbm: return "GmBm";
  }
  return "";
}

std::size_t FractalMap::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), std::uint8_t{1}));
}

ScalingFit fit_scaling(std::span<const double> scales, std::span<const double> measures) {
  if (scales.size() != measures.size()) throw ParameterError("scale/measure length mismatch");
  if (scales.size() < 3) throw ParameterError("scaling fit needs at least 3 scale points");
  ScalingFit fit;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0) || !(measures[i] > 0)) {
      throw NumericalError("scaling fit needs positive scales and measures");
    }
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw ParameterError("scales must be strictly increasing");
    }
    fit.log_scale.push_back(std::log(scales[i]));
    fit.log_measure.push_back(std::log(measures[i]));
  }
  const double n = static_cast<double>(scales.size());
  const double mx = std::accumulate(fit.log_scale.begin(), fit.log_scale.end(), 0.0) / n;
  const double my = std::accumulate(fit.log_measure.begin(), fit.log_measure.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double dx = fit.log_scale[i] - mx, dy = fit.log_measure[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

namespace {

void check_options(const io::VoxelGrid& grid, const FractalOptions& opt) {
  if (opt.window < 5 || opt.window % 2 == 0) {
    throw ParameterError("fractal window must be odd and >= 5");
  }
  if (static_cast<std::size_t>(opt.window) > grid.dims().nx ||
      static_cast<std::size_t>(opt.window) > grid.dims().ny) {
    throw ParameterError("fractal window larger than slice");
  }
  if (opt.scales.size() < 3) throw ParameterError("fewer than 3 usable scales");
  for (std::size_t i = 0; i < opt.scales.size(); ++i) {
    if (opt.scales[i] < 1) throw ParameterError("scales must be positive");
    if (i > 0 && opt.scales[i] <= opt.scales[i - 1]) {
      throw ParameterError("scales must be strictly increasing");
    }
  }
}

FractalMap blank_map(MapKind kind, const io::VoxelGrid& grid, double fill) {
  FractalMap m;
  m.kind = kind;
  m.values = io::VoxelGrid(grid.dims(), grid.spacing(),
                           std::vector<double>(grid.dims().size(), fill));
  m.computed.assign(grid.dims().size(), 0);
  m.flagged.assign(grid.dims().size(), 0);
  return m;
}

bool in_roi(const Roi& roi, std::size_t i) { return roi.empty() || roi[i] != 0; }

/// Axis-aligned sub-box [lo, hi] (inclusive) of a grid.
struct Box {
  std::array<std::size_t, 3> lo{}, hi{};
  io::Dims dims() const { return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1}; }
};

/// Bounding box of the ROI expanded by `margin`, clipped to the grid.
std::optional<Box> working_box(const io::Dims& d, const Roi& roi, std::size_t margin) {
  Box b;
  b.lo = {d.nx, d.ny, d.nz};
  bool any = false;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        if (!in_roi(roi, d.index(x, y, z))) continue;
        any = true;
        const std::array<std::size_t, 3> c{x, y, z};
        for (int a = 0; a < 3; ++a) {
          b.lo[a] = std::min(b.lo[a], c[a]);
          b.hi[a] = std::max(b.hi[a], c[a]);
        }
      }
    }
  }
  if (!any) return std::nullopt;
  const std::array<std::size_t, 3> extent{d.nx, d.ny, d.nz};
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = b.lo[a] > margin ? b.lo[a] - margin : 0;
    b.hi[a] = std::min(extent[a] - 1, b.hi[a] + margin);
  }
  return b;
}

std::vector<double> crop(const io::VoxelGrid& grid, const Box& b) {
  const auto bd = b.dims();
  std::vector<double> out(bd.size());
  for (std::size_t z = 0; z < bd.nz; ++z) {
    for (std::size_t y = 0; y < bd.ny; ++y) {
      for (std::size_t x = 0; x < bd.nx; ++x) {
        out[bd.index(x, y, z)] = grid.at(x + b.lo[0], y + b.lo[1], z + b.lo[2]);
      }
    }
  }
  return out;
}

/// 3D summed-area table with a zero border: S(x,y,z) = sum over [0,x) x [0,y) x [0,z).
class SummedVolume {
 public:
  SummedVolume(const io::Dims& d, const std::vector<double>& v)
      : nx_(d.nx + 1), ny_(d.ny + 1), sum_((d.nx + 1) * (d.ny + 1) * (d.nz + 1), 0.0) {
    for (std::size_t z = 0; z < d.nz; ++z) {
      for (std::size_t y = 0; y < d.ny; ++y) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          sum_[idx(x + 1, y + 1, z + 1)] =
              v[d.index(x, y, z)] + sum_[idx(x, y + 1, z + 1)] + sum_[idx(x + 1, y, z + 1)] +
              sum_[idx(x + 1, y + 1, z)] - sum_[idx(x, y, z + 1)] - sum_[idx(x, y + 1, z)] -
              sum_[idx(x + 1, y, z)] + sum_[idx(x, y, z)];
        }
      }
    }
  }
  /// Sum over the inclusive box [x0,x1] x [y0,y1] x [z0,z1].
  double box(std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1, std::size_t z0,
             std::size_t z1) const {
    ++x1, ++y1, ++z1;
    return sum_[idx(x1, y1, z1)] - sum_[idx(x0, y1, z1)] - sum_[idx(x1, y0, z1)] -
           sum_[idx(x1, y1, z0)] + sum_[idx(x0, y0, z1)] + sum_[idx(x0, y1, z0)] +
           sum_[idx(x1, y0, z0)] - sum_[idx(x0, y0, z0)];
  }

 private:
  std::size_t idx(std::size_t x, std::size_t y, std::size_t z) const {
    return x + nx_ * (y + ny_ * z);
  }
  std::size_t nx_, ny_;
  std::vector<double> sum_;
};

struct Range {
  std::size_t lo, hi;  // inclusive
};

Range clipped(std::size_t c, std::size_t half, std::size_t n) {
  return {c > half ? c - half : 0, std::min(n - 1, c + half)};
}

}  // namespace

double prism_area(std::span<const double> heights, int window, int scale) {
  const int span = window - 1;
  const int cells = span / scale;
  if (cells < 1) throw ParameterError("scale larger than window");
  auto h = [&](int x, int y) { return heights[static_cast<std::size_t>(y) * window + x]; };
  const double s = scale;
  const double half = 0.5 * s;
  double area = 0;
  auto tri = [](double ax, double ay, double az, double bx, double by, double bz, double cx,
                double cy, double cz) {
    const double ux = bx - ax, uy = by - ay, uz = bz - az;
    const double vx = cx - ax, vy = cy - ay, vz = cz - az;
    const double px = uy * vz - uz * vy, py = uz * vx - ux * vz, pz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(px * px + py * py + pz * pz);
  };
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      const int x0 = cx * scale, y0 = cy * scale;
      const double a = h(x0, y0), b = h(x0 + scale, y0), c = h(x0 + scale, y0 + scale),
                   d = h(x0, y0 + scale);
      const double e = 0.25 * (a + b + c + d);
      // corners in cell-local coordinates, centre at (s/2, s/2)
      area += tri(0, 0, a, s, 0, b, half, half, e);
      area += tri(s, 0, b, s, s, c, half, half, e);
      area += tri(s, s, c, 0, s, d, half, half, e);
      area += tri(0, s, d, 0, 0, a, half, half, e);
    }
  }
  const double covered = (cells * s) * (cells * s);
  return area / covered;
}

FractalMap ptpsa_map(const io::VoxelGrid& grid, const FractalOptions& options, const Roi& roi) {
  check_options(grid, options);
  const int w = options.window;
  std::vector<int> usable;
  for (int s : options.scales) {
    if (s <= w - 1) usable.push_back(s);
  }
  if (usable.size() < 3) throw ParameterError("fewer than 3 usable scales for the window");
  const std::vector<double> scales(usable.begin(), usable.end());

  const auto& d = grid.dims();
  FractalMap map = blank_map(MapKind::kPtpsa, grid, 2.0);
  std::vector<double> values(d.size(), 2.0);
  parallel_for(d.nz, [&](std::size_t z) {
    std::vector<double> heights(static_cast<std::size_t>(w) * w);
    std::vector<double> areas(usable.size());
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = d.index(x, y, z);
        if (!in_roi(roi, i)) continue;
        const std::size_t half = static_cast<std::size_t>(w / 2);
        const std::size_t ox = std::min(x > half ? x - half : 0, d.nx - w);
        const std::size_t oy = std::min(y > half ? y - half : 0, d.ny - w);
        for (int v = 0; v < w; ++v) {
          for (int u = 0; u < w; ++u) heights[v * w + u] = grid.at(ox + u, oy + v, z);
        }
        for (std::size_t k = 0; k < usable.size(); ++k) {
          areas[k] = prism_area(heights, w, usable[k]);
        }
        const ScalingFit fit = fit_scaling(scales, areas);
        values[i] = std::clamp(2.0 - fit.slope, 2.0, 3.0);
        map.computed[i] = 1;
      }
    }
  });
  map.values = io::VoxelGrid(d, grid.spacing(), std::move(values));
  return map;
}

FractalMap mbm_map(const io::VoxelGrid& grid, const FractalOptions& options, const Roi& roi) {
  check_options(grid, options);
  const auto& d = grid.dims();
  FractalMap map = blank_map(MapKind::kMbm, grid, 0.0);
  const std::size_t half = static_cast<std::size_t>(options.window / 2);
  const std::size_t smax = static_cast<std::size_t>(options.scales.back());
  const auto box = working_box(d, roi, half + smax);
  if (!box) return map;
  const io::Dims bd = box->dims();
  const std::vector<double> sub = crop(grid, *box);

  std::vector<SummedVolume> inc_sums, count_sums;
  for (int s : options.scales) {
    std::vector<double> inc(bd.size(), 0.0), cnt(bd.size(), 0.0);
    const std::size_t us = static_cast<std::size_t>(s);
    for (std::size_t z = 0; z < bd.nz; ++z) {
      for (std::size_t y = 0; y < bd.ny; ++y) {
        for (std::size_t x = 0; x < bd.nx; ++x) {
          const std::size_t i = bd.index(x, y, z);
          const double v = sub[i];
          if (x + us < bd.nx) {
            inc[i] += std::abs(sub[bd.index(x + us, y, z)] - v);
            cnt[i] += 1;
          }
          if (y + us < bd.ny) {
            inc[i] += std::abs(sub[bd.index(x, y + us, z)] - v);
            cnt[i] += 1;
          }
          if (z + us < bd.nz) {
            inc[i] += std::abs(sub[bd.index(x, y, z + us)] - v);
            cnt[i] += 1;
          }
        }
      }
    }
    inc_sums.emplace_back(bd, inc);
    count_sums.emplace_back(bd, cnt);
  }

  std::vector<double> values(d.size(), 0.0);
  const std::vector<double> scales(options.scales.begin(), options.scales.end());
  parallel_for(bd.nz, [&](std::size_t bz) {
    std::vector<double> measures(scales.size());
    for (std::size_t by = 0; by < bd.ny; ++by) {
      for (std::size_t bx = 0; bx < bd.nx; ++bx) {
        const std::size_t gx = bx + box->lo[0], gy = by + box->lo[1], gz = bz + box->lo[2];
        const std::size_t gi = d.index(gx, gy, gz);
        if (!in_roi(roi, gi)) continue;
        const Range rx = clipped(bx, half, bd.nx), ry = clipped(by, half, bd.ny),
                    rz = clipped(bz, half, bd.nz);
        bool smooth = false;
        for (std::size_t k = 0; k < scales.size(); ++k) {
          const double c = count_sums[k].box(rx.lo, rx.hi, ry.lo, ry.hi, rz.lo, rz.hi);
          const double s = inc_sums[k].box(rx.lo, rx.hi, ry.lo, ry.hi, rz.lo, rz.hi);
          if (c < 0.5) throw ParameterError("scale exceeds the grid extent");
          measures[k] = s / c;
          // summed-area differences leave rounding residue on flat windows
          if (!(measures[k] > 1e-12)) smooth = true;
        }
        double h = 1.0;
        if (smooth) {
          map.flagged[gi] = 1;
        } else {
          h = fit_scaling(scales, measures).slope;
        }
        values[gi] = std::clamp(h, 0.0, 1.0);
        map.computed[gi] = 1;
      }
    }
  });
  map.values = io::VoxelGrid(d, grid.spacing(), std::move(values));
  return map;
}

namespace {

/// Running max and min of radius r along one axis of a box-shaped volume.
void extremum_filter(const io::Dims& d, int axis, std::size_t r, std::vector<double>& mx,
                     std::vector<double>& mn) {
  std::vector<double> out_max(mx.size()), out_min(mn.size());
  const std::array<std::size_t, 3> n{d.nx, d.ny, d.nz};
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        std::array<std::size_t, 3> c{x, y, z};
        const Range rg = clipped(c[axis], r, n[axis]);
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t t = rg.lo; t <= rg.hi; ++t) {
          c[axis] = t;
          const std::size_t j = d.index(c[0], c[1], c[2]);
          hi = std::max(hi, mx[j]);
          lo = std::min(lo, mn[j]);
        }
        out_max[d.index(x, y, z)] = hi;
        out_min[d.index(x, y, z)] = lo;
      }
    }
  }
  mx.swap(out_max);
  mn.swap(out_min);
}

}  // namespace

FractalMap gmbm_map(const io::VoxelGrid& grid, const FractalOptions& options, const Roi& roi) {
  check_options(grid, options);
  if (options.scales.back() > options.window / 2) {
    throw ParameterError("oscillation radius exceeds half the window");
  }
  const auto& d = grid.dims();
  FractalMap map = blank_map(MapKind::kGmbm, grid, 0.0);
  const auto box = working_box(d, roi, static_cast<std::size_t>(options.scales.back()));
  if (!box) return map;
  const io::Dims bd = box->dims();
  const std::vector<double> sub = crop(grid, *box);

  std::vector<std::vector<double>> osc;
  for (int r : options.scales) {
    std::vector<double> mx = sub, mn = sub;
    for (int axis = 0; axis < 3; ++axis) {
      extremum_filter(bd, axis, static_cast<std::size_t>(r), mx, mn);
    }
    for (std::size_t i = 0; i < mx.size(); ++i) mx[i] -= mn[i];
    osc.push_back(std::move(mx));
  }

  std::vector<double> values(d.size(), 0.0);
  const std::vector<double> radii(options.scales.begin(), options.scales.end());
  std::vector<double> measures(radii.size());
  for (std::size_t bz = 0; bz < bd.nz; ++bz) {
    for (std::size_t by = 0; by < bd.ny; ++by) {
      for (std::size_t bx = 0; bx < bd.nx; ++bx) {
        const std::size_t gi = d.index(bx + box->lo[0], by + box->lo[1], bz + box->lo[2]);
        if (!in_roi(roi, gi)) continue;
        const std::size_t bi = bd.index(bx, by, bz);
        bool smooth = false;
        for (std::size_t k = 0; k < radii.size(); ++k) {
          measures[k] = osc[k][bi];
          if (!(measures[k] > 0.0)) smooth = true;
        }
        double h = 1.0;
        if (smooth) {
          map.flagged[gi] = 1;
        } else {
          h = fit_scaling(radii, measures).slope;
        }
        values[gi] = std::clamp(h, 0.0, 1.0);
        map.computed[gi] = 1;
      }
    }
  }
  map.values = io::VoxelGrid(d, grid.spacing(), std::move(values));
  return map;
}

FractalMap compute_map(MapKind kind, const io::VoxelGrid& grid, const FractalOptions& options,
                       const Roi& roi) {
  switch (kind) {
    case MapKind::kPtpsa: return ptpsa_map(grid, options, roi);
    case MapKind::kMbm: return mbm_map(grid, options, roi);
    case MapKind::kGmbm: return gmbm_map(grid, options, roi);
  }
  throw ParameterError("unknown fractal map kind");
}

texture::FeatureMap extract_fractal(const io::VoxelGrid& grid, const io::RegionMask& mask,
                                    const FractalOptions& fractal,
                                    const texture::TextureOptions& texture,
                                    std::vector<FractalMap>* maps_out) {
  if (!(grid.dims() == mask.dims())) throw InputError("mask does not align with grid");
  const auto& regions = texture::tumor_regions();
  const auto& whole = regions.front();
  Roi roi(mask.labels().size());
  for (std::size_t i = 0; i < roi.size(); ++i) roi[i] = whole.contains(mask.labels()[i]) ? 1 : 0;

  texture::TextureOptions opts = texture;
  opts.per_offset = false;
  texture::FeatureMap row;
  for (MapKind kind : {MapKind::kPtpsa, MapKind::kMbm, MapKind::kGmbm}) {
    FractalMap map = compute_map(kind, grid, fractal, roi);
    for (const auto& region : regions) {
      std::string prefix = std::string("T1C_") + map_token(kind);
      if (region.name != whole.name) prefix += "_" + region.name;
      auto part = texture::texture_families(map.values, mask, region, prefix, opts);
      row.insert(row.end(), part.begin(), part.end());
    }
    if (maps_out) maps_out->push_back(std::move(map));
  }
  return row;
}

}  // namespace cgrep::fractal
