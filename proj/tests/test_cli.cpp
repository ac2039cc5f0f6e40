#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cgrep/cli.hpp"
#include "cgrep/data_io.hpp"

namespace fs = std::filesystem;
using namespace cgrep;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cgrep_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

void survival_pipeline(const fs::path& dir, const std::string& threads) {
  const std::string d = dir.string();
  auto r = run({"simulate", "--kind", "survival", "--n", "90", "--alpha", "4", "--beta", "1,0.2",
                "--gamma", "0.5,0", "--seed", "9", "--out", d});
  REQUIRE(r.code == 0);
  r = run({"survival", "--features", d + "/features.csv", "--alpha-grid", "0,2,6", "--folds", "3",
           "--seed", "9", "--threads", threads, "--out", d});
  INFO(r.err);
  REQUIRE(r.code == 0);
  r = run({"prognosis", "--features", d + "/features.csv", "--permutations", "19", "--seed", "9",
           "--threads", threads, "--out", d});
  INFO(r.err);
  REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("survival and prognosis pipeline end to end") {
  const auto dir = scratch("pipeline");
  survival_pipeline(dir, "1");
  for (const char* f : {"features.csv", "alpha_profile.csv", "selected_features.csv",
                        "survival_summary.csv", "prognosis_report.csv", "comparison.csv",
                        "group_curves/good.csv", "group_curves/bad.csv", "group_curves/curves.svg"}) {
    INFO(f);
    CHECK(fs::exists(dir / f));
  }
  const auto profile = slurp(dir / "alpha_profile.csv");
  CHECK(profile.rfind("alpha,cv_cindex\n0,", 0) == 0);
  CHECK(slurp(dir / "survival_summary.csv").find("tau_hat,") != std::string::npos);
  const auto report = io::parse_feature_table(slurp(dir / "features.csv"));
  CHECK(report.rows() == 90);
}

TEST_CASE("outputs are identical across thread counts") {
  const auto a = scratch("threads_a"), b = scratch("threads_b");
  survival_pipeline(a, "1");
  survival_pipeline(b, "3");
  for (const char* f : {"alpha_profile.csv", "selected_features.csv", "prognosis_report.csv",
                        "comparison.csv", "group_curves/good.csv", "group_curves/curves.svg"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("classification subcommands") {
  const auto dir = scratch("classify");
  const std::string d = dir.string();
  REQUIRE(run({"simulate", "--kind", "classification", "--n", "40", "--informative", "2", "--noise",
               "4", "--separation", "3", "--out", d})
              .code == 0);
  auto r = run({"rank", "--features", d + "/features.csv", "--iterations", "3", "--folds", "4",
                "--majority-sample", "0", "--out", d});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto ranking = slurp(dir / "ranking.csv");
  CHECK(ranking.rfind("feature,mean_f1,selected_flag\ninf", 0) == 0);
  CHECK(fs::exists(dir / "significance.csv"));
  r = run({"classify", "--features", d + "/features.csv", "--select", "inf1,inf2", "--iterations",
           "2", "--folds", "4", "--majority-sample", "0", "--trees", "20", "--out", d});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("wrote ") != std::string::npos);
  const auto summary = slurp(dir / "metrics_summary.csv");
  CHECK(summary.find("auc,") != std::string::npos);
  CHECK(summary.find(",8\n") != std::string::npos);
}

TEST_CASE("phantom extraction") {
  const auto dir = scratch("extract");
  const std::string d = dir.string();
  REQUIRE(run({"simulate", "--kind", "phantom", "--phantom", "fbm", "--dims", "20,20,20", "--out", d})
              .code == 0);
  const auto r = run({"extract", "--manifest", d + "/manifest.csv", "--out", d});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto t = io::load_feature_table(dir / "features.csv");
  CHECK(t.rows() == 1);
  CHECK(t.feature_names.size() == 1448);
  CHECK(t.patient_ids[0] == "PHANTOM");
  CHECK(fs::exists(dir / "feature_dictionary.txt"));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("errors");
  const std::string d = dir.string();
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"rank", "--folds", "1"}).code == 2);
  CHECK(run({"simulate", "--kind", "survival", "--test-mode", "--out", d}).code == 2);
  CHECK(run({"simulate", "--kind", "survival", "--test-mode", "--seed", "1", "--out", d}).code == 0);
  CHECK(run({"rank", "--features", d + "/missing.csv", "--out", d}).code == 1);

  io::write_text(dir / "one_class.csv", "patient_id,f,rep_label\nA,1,0\nB,2,0\nC,3,0\nD,4,0\n");
  const auto r = run({"rank", "--features", d + "/one_class.csv", "--out", d});
  CHECK(r.code == 1);
  CHECK(r.err.find("single-class target") != std::string::npos);
}

TEST_CASE("config file seed is used unless overridden") {
  const auto dir = scratch("config");
  const std::string d = dir.string();
  io::write_text(dir / "run.cfg", "seed=5\n");
  REQUIRE(run({"simulate", "--kind", "survival", "--n", "30", "--config", d + "/run.cfg", "--out",
               d + "/a"})
              .code == 0);
  REQUIRE(run({"simulate", "--kind", "survival", "--n", "30", "--seed", "5", "--out", d + "/b"})
              .code == 0);
  REQUIRE(run({"simulate", "--kind", "survival", "--n", "30", "--out", d + "/c"}).code == 0);
  CHECK(slurp(dir / "a/features.csv") == slurp(dir / "b/features.csv"));
  CHECK(slurp(dir / "a/features.csv") != slurp(dir / "c/features.csv"));
}
