#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "cgrep/common.hpp"
#include "cgrep/data_io.hpp"

using namespace cgrep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "cgrep_test_data_io" / name;
  fs::create_directories(p.parent_path());
  return p;
}

void write_raw3d(const fs::path& stem, const std::string& dims, const std::string& dtype,
                 const std::string& payload) {
  std::ofstream(stem.string() + ".json") << R"({"dims": )" << dims
                                         << R"(, "spacing": [1,1,1], "dtype": ")" << dtype << "\"}";
  std::ofstream(stem.string() + ".raw", std::ios::binary) << payload;
}

}  // namespace

TEST_CASE("RAW3D fixtures load and round-trip") {
  double seven = 7.0;
  std::string payload;
  for (int i = 0; i < 8; ++i) payload.append(reinterpret_cast<const char*>(&seven), 8);
  const auto stem = scratch("sevens");
  write_raw3d(stem, "[2,2,2]", "float64", payload);
  const auto g = io::load_volume(stem.string() + ".json");
  REQUIRE(g.data().size() == 8);
  for (double v : g.data()) CHECK(v == 7.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1e6);
  std::vector<double> v(3 * 4 * 5);
  for (auto& x : v) x = n(rng);
  const io::VoxelGrid grid({3, 4, 5}, {0.5, 1.0, 2.5}, v);
  io::write_volume(grid, scratch("rt.json"));
  CHECK(io::load_volume(scratch("rt.raw")) == grid);

  std::vector<std::uint8_t> labels(grid.data().size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(i % 5);
  const io::RegionMask mask(grid.dims(), labels);
  io::write_mask(mask, grid.spacing(), scratch("rtmask.json"));
  CHECK(io::load_mask(scratch("rtmask.json"), grid) == mask);
}

TEST_CASE("NIfTI float32 round trip") {
  std::vector<double> v;
  for (int i = 0; i < 24; ++i) v.push_back(0.25 * i - 3);
  const io::VoxelGrid grid({2, 3, 4}, {1, 1, 1.5}, v);
  io::write_volume(grid, scratch("vol.nii"));
  CHECK(io::load_volume(scratch("vol.nii")) == grid);
}

TEST_CASE("volume and mask errors") {
  const auto stem = scratch("short");
  write_raw3d(stem, "[4,4,4]", "float32", std::string(60 * 4, '\0'));
  CHECK_THROWS_AS(io::load_volume(stem.string() + ".json"), InputError);

  const auto ok = scratch("grid4");
  write_raw3d(ok, "[4,4,4]", "uint8", std::string(64, '\1'));
  const auto grid = io::load_volume(ok.string() + ".json");
  const auto small = scratch("mask3");
  write_raw3d(small, "[3,3,3]", "uint8", std::string(27, '\0'));
  CHECK_THROWS_AS(io::load_mask(small.string() + ".json", grid), InputError);
  const auto bad = scratch("mask9");
  write_raw3d(bad, "[4,4,4]", "uint8", std::string(63, '\0') + '\x09');
  CHECK_THROWS_WITH_AS(io::load_mask(bad.string() + ".json", grid),
                       doctest::Contains("label"), InputError);
  const auto good = scratch("mask_ok");
  write_raw3d(good, "[4,4,4]", "uint8", std::string("\0\1\2\3", 4) + std::string(60, '\0'));
  CHECK(io::load_mask(good.string() + ".json", grid).labels()[3] == 3);
  CHECK_THROWS_AS(io::load_volume(scratch("missing.json")), InputError);
}

TEST_CASE("feature table parsing") {
  const auto t = io::parse_feature_table(
      "patient_id,f1,time_days,event\nP1,0.5,10,1\nP2,,20,0\nP3,1.5,30,1\n");
  CHECK(t.feature_names == std::vector<std::string>{"f1"});
  REQUIRE(t.time_days);
  REQUIRE(t.event);
  CHECK(std::isnan(t.column("f1")[1]));
  CHECK_THROWS_AS(io::parse_feature_table("patient_id,f1\nP1,1\nP1,2\n"), InputError);
  CHECK_THROWS_AS(io::parse_feature_table("patient_id,f1,event\nP1,1,2\n"), InputError);
  CHECK_THROWS_AS(io::parse_feature_table("patient_id,f1\nP1,abc\n"), InputError);
  CHECK_THROWS_AS(io::parse_feature_table("patient_id,f1\nP1,1,2\n"), InputError);

  const auto m = io::parse_feature_table(
      "patient_id,mgmt_status,a\nP1,indeterminate,1\nP2,methylated,2\n");
  REQUIRE(m.mgmt_status);
  CHECK((*m.mgmt_status)[0] == "indeterminate");
}

TEST_CASE("feature table write/load round trip is exact") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  io::FeatureTable t;
  for (int i = 0; i < 20; ++i) t.patient_ids.push_back("P" + std::to_string(i));
  for (int j = 0; j < 5; ++j) {
    std::vector<double> c(20);
    for (auto& x : c) x = u(rng) * std::pow(10.0, j - 2);
    c[j] = std::numeric_limits<double>::quiet_NaN();
    t.add_column("feat" + std::to_string(j), c);
  }
  t.time_days = std::vector<double>(20, 1.0 / 3.0);
  t.event = std::vector<double>(20, 1.0);
  const auto p = scratch("table.csv");
  io::write_feature_table(t, p);
  const auto back = io::load_feature_table(p);
  CHECK(back == t);
  CHECK(io::format_feature_table(back) == io::format_feature_table(t));
  CHECK(io::load_feature_table(p) == back);
}

TEST_CASE("real formatting is shortest round trip") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456789.125}) {
    CHECK(io::parse_real(io::format_real(v)) == v);
  }
  CHECK(io::format_real(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(io::format_real(0.5) == "0.5");
  CHECK_THROWS_AS(io::parse_real("1.0x"), InputError);
}

TEST_CASE("curve csv round trip") {
  StepSurvivalCurve c;
  c.points = {{1.0, 1.0, 5, true}, {2.0, 0.75, 4, false}, {3.5, 0.375, 2, false}};
  io::write_curve_csv(c, scratch("curve.csv"));
  const auto back = io::load_curve_csv(scratch("curve.csv"));
  REQUIRE(back.points.size() == 3);
  CHECK(back.points[2].survival == 0.375);
  CHECK(back.points[0].censor_mark);
  CHECK(back.at(0.5) == 1.0);
  CHECK(back.at(2.9) == 0.75);
  CHECK(back.max_time() == 3.5);
  CHECK(io::read_text(scratch("curve.csv")).rfind("time,survival,n_at_risk,is_censor_mark\n", 0) == 0);
}

TEST_CASE("config parsing") {
  const auto cfg = io::parse_config("# study\nseed = 7\niterations=10\nalpha_grid=0,1,2\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.iterations == 10);
  CHECK(cfg.alpha_grid == std::vector<double>{0, 1, 2});
  CHECK(cfg.folds == 5);
  CHECK_THROWS(io::parse_config("folds=1\n"));
  CHECK_THROWS(io::parse_config("levels=1\n"));
  CHECK_THROWS(io::parse_config("permutations=0\n"));
  CHECK_THROWS_AS(io::parse_config("colour=blue\n"), InputError);
}
