#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "cgrep/texture.hpp"
#include "texture_oracles.hpp"

using namespace cgrep;
using namespace cgrep::texture;
using namespace oracle;

namespace {

void check_map(const FeatureMap& got, const std::map<std::string, double>& want) {
  REQUIRE(got.size() == want.size());
  for (const auto& [k, v] : got) {
    INFO(k << " got " << v << " want " << want.at(k));
    CHECK(close(v, want.at(k)));
  }
}

io::VoxelGrid grid_of(io::Dims d, std::vector<double> v) {
  return io::VoxelGrid(d, {1, 1, 1}, std::move(v));
}

io::RegionMask full_mask(io::Dims d, std::uint8_t label) {
  return io::RegionMask(d, std::vector<std::uint8_t>(d.size(), label));
}

const Region& wt() { return tumor_regions()[0]; }

}  // namespace

TEST_CASE("quantization splits at the midpoint and keeps constants at level 1") {
  const io::Dims d{4, 1, 1};
  const auto q = quantize(grid_of(d, {1, 2, 3, 4}), full_mask(d, 1), wt(), 2);
  CHECK(q.at(0, 0, 0) == 1);
  CHECK(q.at(1, 0, 0) == 1);
  CHECK(q.at(2, 0, 0) == 2);
  CHECK(q.at(3, 0, 0) == 2);
  const auto c = quantize(grid_of(d, {5, 5, 5, 5}), full_mask(d, 1), wt(), 16);
  for (long x = 0; x < 4; ++x) CHECK(c.at(x, 0, 0) == 1);
}

TEST_CASE("quantization matches independent re-binning") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 11);
  const io::Dims d{10, 10, 1};
  std::vector<double> v(d.size());
  for (auto& x : v) x = u(rng);
  const auto q = quantize(grid_of(d, v), full_mask(d, 2), tumor_regions()[2], 8);
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  std::vector<int> hist(9, 0), want(9, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    int bin = 1;
    const double w = (hi - lo) / 8;
    while (bin < 8 && v[i] >= lo + bin * w) ++bin;
    ++want[bin];
    ++hist[q.at(static_cast<long>(i % 10), static_cast<long>(i / 10), 0)];
  }
  CHECK(hist == want);
}

TEST_CASE("co-occurrence hand cases") {
  const QuantizedRegion flat(4, {2, 2, 2}, {0, 0, 0}, std::vector<int>(8, 1));
  const auto m = cooccurrence(flat, {1, 0, 0});
  CHECK(m(1, 1) == doctest::Approx(1.0));
  CHECK(lookup(gtsdm_features(m), "Autocorrelation") == doctest::Approx(1.0));

  const QuantizedRegion line(2, {4, 1, 1}, {0, 0, 0}, {1, 2, 1, 2});
  const auto l = cooccurrence(line, {1, 0, 0});
  CHECK(l(1, 2) == doctest::Approx(0.5));
  CHECK(l(2, 1) == doctest::Approx(0.5));
  CHECK(lookup(gtsdm_features(l), "Autocorrelation") == doctest::Approx(2.0));
}

TEST_CASE("texture families equal brute-force oracles on random 4x4x4 regions") {
  std::mt19937_64 rng(2024);
  const auto offsets = direction_table({1, 2, 3});
  for (int rep = 0; rep < 100; ++rep) {
    const int L = 2 + rep % 7;
    const auto q = random_region(rng, L);
    const auto vox = voxels_of(q);
    for (const auto& off : {offsets[rep % 13], offsets[13 + rep % 13], Offset{1, 0, 0}}) {
      const auto pairs = oracle_glcm(vox, off);
      if (pairs.empty()) continue;
      const auto m = cooccurrence(q, off);
      double sum = 0;
      for (int i = 1; i <= L; ++i)
        for (int j = 1; j <= L; ++j) {
          sum += m(i, j);
          CHECK(m(i, j) == m(j, i));
          const auto it = pairs.find({i, j});
          CHECK(close(m(i, j), it == pairs.end() ? 0.0 : it->second));
        }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      check_map(gtsdm_features(m), oracle_gtsdm(pairs));
    }
    const auto t = ngtdm_table(q);
    double psum = 0;
    for (double p : t.p) psum += p;
    CHECK(std::abs(psum - 1.0) < 1e-12);
    check_map(ngtdm_features(q), oracle_ngtdm(vox, L));

    const auto zones = oracle_zones(vox);
    const auto zm = zone_size_matrix(q);
    CHECK(zm.zones == zones.size());
    std::size_t covered = 0;
    for (int g = 1; g <= L; ++g)
      for (std::size_t s = 1; s <= zm.max_zone; ++s) covered += s * zm.counts[g - 1][s - 1];
    CHECK(covered == vox.size());
    check_map(glzsm_features(q), oracle_glzsm(zones, vox.size()));
  }
}

TEST_CASE("NGTDM degenerate and checkerboard cases") {
  const QuantizedRegion flat(4, {3, 3, 3}, {0, 0, 0}, std::vector<int>(27, 2));
  const auto f = ngtdm_features(flat);
  CHECK(lookup(f, "Contrast") == 0.0);
  CHECK(lookup(f, "Strength") == 0.0);

  // 2x2x2 parity checkerboard: each voxel has 3 face neighbours of the other
  // level, 3 edge neighbours of its own and 1 corner neighbour of the other.
  std::vector<int> lv(8);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) lv[x + 2 * (y + 2 * z)] = 1 + (x + y + z) % 2;
  const QuantizedRegion cb(2, {2, 2, 2}, {0, 0, 0}, lv);
  const auto t = ngtdm_table(cb);
  // level 1 voxel: neighbours 4 x level 2 and 3 x level 1 -> mean 11/7
  CHECK(t.s[0] == doctest::Approx(4 * (11.0 / 7 - 1)));
  CHECK(t.s[1] == doctest::Approx(4 * (2 - 10.0 / 7)));
  CHECK(t.p[0] == doctest::Approx(0.5));
}

TEST_CASE("GLZSM constant cube is one zone") {
  const int n = 3;
  const QuantizedRegion cube(4, {n, n, n}, {0, 0, 0}, std::vector<int>(n * n * n, 1));
  const auto f = glzsm_features(cube);
  CHECK(lookup(f, "LargeZoneLowGrayEmphasis") == doctest::Approx(std::pow(n, 6)));
  CHECK(lookup(f, "LowGrayLevelZoneEmphasis") == doctest::Approx(1.0));
}

TEST_CASE("histogram summary conventions") {
  const auto c = histogram_summary({3, 3, 3, 3}, 8);
  CHECK(c.variance == 0);
  CHECK(c.skewness == 0);
  CHECK(c.kurtosis == 0);
  CHECK(c.energy == 1);
  CHECK(c.entropy == 0);
  CHECK(c.degenerate);

  std::vector<double> uniform;
  for (int i = 0; i < 16; ++i) uniform.push_back(i + 0.5);
  const auto u = histogram_summary(uniform, 16);
  CHECK(u.energy == doctest::Approx(1.0 / 16));
  CHECK(u.entropy == doctest::Approx(4.0));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> v(1000);
  for (auto& x : v) x = g(rng);
  const auto h = histogram_summary(v, 32);
  CHECK(std::abs(h.mean) < 0.1);
  CHECK(std::abs(h.variance - 1) < 0.15);
  CHECK(std::abs(h.skewness) < 0.25);
}

TEST_CASE("shape descriptors") {
  const io::Dims d{24, 24, 24};
  std::vector<std::uint8_t> ball(d.size(), 4);
  for (std::size_t z = 0; z < 24; ++z)
    for (std::size_t y = 0; y < 24; ++y)
      for (std::size_t x = 0; x < 24; ++x) {
        const double r2 = std::pow(x - 11.5, 2) + std::pow(y - 11.5, 2) + std::pow(z - 11.5, 2);
        if (r2 <= 100) ball[d.index(x, y, z)] = 1;
      }
  const auto s = shape_features(io::RegionMask(d, ball), wt(), brain_region(), {1, 1, 1});
  CHECK(s.eccentricity < 0.1);
  CHECK(std::abs(s.extent - std::numbers::pi / 6) < 0.05);
  CHECK(s.axis_length[0] >= s.axis_length[1]);
  CHECK(s.axis_length[1] >= s.axis_length[2]);

  const io::Dims bd{22, 12, 7};
  std::vector<std::uint8_t> box(bd.size(), 0);
  for (std::size_t z = 1; z < 6; ++z)
    for (std::size_t y = 1; y < 11; ++y)
      for (std::size_t x = 1; x < 21; ++x) box[bd.index(x, y, z)] = 2;
  const auto b = shape_features(io::RegionMask(bd, box), tumor_regions()[2], brain_region(),
                                {1, 1, 1});
  CHECK(b.extent == 1.0);
  CHECK(b.volume_ratio == 1.0);
  CHECK(b.axis_length[0] / b.axis_length[2] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(b.axis_length[1] / b.axis_length[2] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("conventional row: counts, missing regions, affine invariance") {
  const io::Dims d{8, 8, 16};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 50);
  std::vector<double> v(d.size());
  for (auto& x : v) x = u(rng);
  std::vector<std::uint8_t> lab(d.size());
  // four 8x8x4 slabs, one per label
  for (std::size_t i = 0; i < d.size(); ++i) lab[i] = static_cast<std::uint8_t>(1 + i / 256);
  const io::RegionMask mask(d, lab);
  const TextureOptions opt{8, {1, 2, 3}, true};
  const auto row = extract_conventional(grid_of(d, v), mask, opt);
  const std::size_t per_region = 6 + 6 * 39 + 5 + 11 + 6 + 16;
  CHECK(row.size() == 4 * per_region);
  CHECK(row == extract_conventional(grid_of(d, v), mask, opt));

  std::vector<double> w(v);
  for (auto& x : w) x = 2.5 * x + 7;
  const auto row2 = extract_conventional(grid_of(d, w), mask, opt);
  for (std::size_t k = 0; k < row.size(); ++k) {
    const auto& name = row[k].first;
    if (name.find("_Histogram_") != std::string::npos || name.find("_Shape_") != std::string::npos)
      continue;
    INFO(name);
    CHECK(row[k].second == row2[k].second);
  }

  for (auto& l : lab) if (l == 3) l = 1;
  const auto no_nec = extract_conventional(grid_of(d, v), io::RegionMask(d, lab), opt);
  for (const auto& [name, value] : no_nec) {
    if (name.rfind("T1C_nec_", 0) == 0) {
      CHECK(std::isnan(value));
    } else {
      INFO(name);
      CHECK(std::isfinite(value));
    }
  }
}
