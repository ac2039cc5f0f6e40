#include "cgrep/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "cgrep/common.hpp"
#include "cgrep/data_io.hpp"
#include "cgrep/fractal.hpp"
#include "cgrep/learners.hpp"
#include "cgrep/prognosis.hpp"
#include "cgrep/resampling.hpp"
#include "cgrep/survival.hpp"
#include "cgrep/svg.hpp"
#include "cgrep/synth.hpp"
#include "cgrep/texture.hpp"

namespace cgrep::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // global
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  bool test_mode = false;
  // shared study overrides
  int iterations = 0;
  int folds = 0;
  int majority_sample = -1;
  std::vector<double> alpha_grid;
  double f1_threshold = -1;
  int permutations = 0;
  std::string features;
  std::string label_column = "rep_label";
  // extract
  std::string manifest, volume, mask, patient_id;
  bool no_fractal = false;
  bool dump_maps = false;
  // rank / classify
  std::vector<std::string> select;
  std::string select_from;
  int trees = 100;
  int depth = 3;
  double learning_rate = 0.1;
  // survival
  bool screen = false;
  // prognosis
  std::string coefficients;
  double alpha = -1;
  // simulate
  std::string kind;
  std::size_t n = 300;
  double sim_alpha = 0.0;
  std::vector<double> beta{1.0, 0.0};
  std::vector<double> gamma{0.5, 0.0};
  double lambda_t = 1.0, lambda_u = 1.25;
  std::size_t informative = 3, noise = 20;
  double separation = 3.0;
  std::string phantom = "fbm";
  std::vector<std::size_t> dims{32, 32, 16};
  double hurst = 0.5;
};

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(line);
  while (std::getline(ss, item, sep)) {
    if (!item.empty() && item.back() == '\r') item.pop_back();
    out.push_back(item);
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  for (auto& l : split(text, '\n')) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

class Context {
 public:
  Context(const Options& o, std::ostream& out) : opt_(o), out_(out) {
    cfg_ = o.config.empty() ? io::StudyConfig{} : io::load_config(o.config);
    if (o.seed) cfg_.seed = *o.seed;
    if (!o.out.empty()) cfg_.output_dir = o.out;
    if (o.iterations > 0) cfg_.iterations = o.iterations;
    if (o.folds > 0) cfg_.folds = o.folds;
    if (o.majority_sample >= 0) cfg_.majority_sample = o.majority_sample;
    if (!o.alpha_grid.empty()) cfg_.alpha_grid = o.alpha_grid;
    if (o.permutations > 0) cfg_.permutations = o.permutations;
    if (!o.features.empty()) cfg_.features_path = o.features;
    cfg_.validate();
    set_thread_count(o.threads);
  }

  const io::StudyConfig& cfg() const { return cfg_; }
  const Options& opt() const { return opt_; }
  fs::path out_path(const std::string& name) const { return fs::path(cfg_.output_dir) / name; }

  io::FeatureTable features() const {
    if (cfg_.features_path.empty()) throw ParameterError("no feature table given (--features)");
    auto t = io::load_feature_table(cfg_.features_path);
    t.validate();
    return t;
  }

  void wrote(const fs::path& p) const { out_ << "wrote " << p.string() << '\n'; }
  void write(const std::string& name, const std::string& text) const {
    const auto p = out_path(name);
    io::write_text(p, text);
    wrote(p);
  }

 private:
  const Options& opt_;
  std::ostream& out_;
  io::StudyConfig cfg_;
};

learn::Labels labels_from(const io::FeatureTable& t, const std::string& column) {
  const std::vector<double>* src = nullptr;
  if (column == "rep_label") {
    if (!t.rep_label) throw InputError("feature table has no rep_label column");
    src = &*t.rep_label;
  } else if (column == "event") {
    if (!t.event) throw InputError("feature table has no event column");
    src = &*t.event;
  } else {
    src = &t.column(column);
  }
  learn::Labels y;
  for (double v : *src) {
    if (v != 0.0 && v != 1.0) throw InputError("label column " + column + " must be 0/1");
    y.push_back(static_cast<int>(v));
  }
  learn::require_two_classes(y);
  return y;
}

/// Feature names read from ranking.csv (selected_flag = 1), significance.csv
/// (selected = 1) or selected_features.csv (every row).
std::vector<std::string> names_from_file(const fs::path& path) {
  const auto lines = lines_of(io::read_text(path));
  if (lines.empty()) throw InputError("empty selection file " + path.string());
  const auto header = split(lines[0]);
  std::ptrdiff_t flag = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "selected_flag" || header[c] == "selected") flag = static_cast<std::ptrdiff_t>(c);
  }
  std::vector<std::string> names;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != header.size()) throw InputError("ragged row in " + path.string());
    if (flag >= 0 && cells[flag] != "1") continue;
    names.push_back(cells[0]);
  }
  return names;
}

std::vector<std::string> selection(const Options& o) {
  if (!o.select.empty()) return o.select;
  if (!o.select_from.empty()) return names_from_file(o.select_from);
  return {};
}

// ---------------------------------------------------------------------------

std::string dictionary_text(const std::vector<std::string>& names) {
  const auto defs = texture::feature_definitions();
  std::string out;
  for (const auto& name : names) {
    std::string def = "feature";
    for (const auto& [key, text] : defs) {
      const auto pos = name.find("_" + key);
      if (pos != std::string::npos) {
        def = text;
        break;
      }
    }
    std::string image = "T1C intensities";
    for (const char* map : {"ptpsa", "mBm", "GmBm"}) {
      if (name.rfind(std::string("T1C_") + map + "_", 0) == 0) {
        image = std::string(map) + " fractal map of T1C";
      }
    }
    out += name + "\t" + def + " [" + image + "]\n";
  }
  return out;
}

struct ManifestRow {
  std::string patient_id;
  fs::path volume, mask;
  std::map<std::string, std::string> extra;
};

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  const auto lines = lines_of(io::read_text(path));
  if (lines.empty()) throw InputError("empty manifest " + path.string());
  const auto header = split(lines[0]);
  auto col = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto ci = col("patient_id"), cv = col("volume"), cm = col("mask");
  if (ci < 0 || cv < 0 || cm < 0) {
    throw InputError("manifest needs patient_id, volume and mask columns");
  }
  const fs::path base = path.parent_path();
  std::vector<ManifestRow> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != header.size()) throw InputError("ragged manifest row " + std::to_string(r + 1));
    ManifestRow row;
    row.patient_id = cells[ci];
    row.volume = fs::path(cells[cv]).is_absolute() ? fs::path(cells[cv]) : base / cells[cv];
    row.mask = fs::path(cells[cm]).is_absolute() ? fs::path(cells[cm]) : base / cells[cm];
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<std::ptrdiff_t>(c) != ci && static_cast<std::ptrdiff_t>(c) != cv &&
          static_cast<std::ptrdiff_t>(c) != cm) {
        row.extra[header[c]] = cells[c];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_extract(const Context& ctx) {
  const Options& o = ctx.opt();
  std::vector<ManifestRow> rows;
  if (!o.manifest.empty()) {
    rows = read_manifest(o.manifest);
  } else {
    if (o.volume.empty() || o.mask.empty()) {
      throw ParameterError("extract needs --manifest or --volume and --mask");
    }
    rows.push_back({o.patient_id.empty() ? "P1" : o.patient_id, o.volume, o.mask, {}});
  }
  texture::TextureOptions topt;
  topt.levels = ctx.cfg().levels;
  topt.distances = ctx.cfg().distances;
  fractal::FractalOptions fopt{ctx.cfg().fractal_window, ctx.cfg().fractal_scales};

  std::vector<texture::FeatureMap> feature_rows;
  for (const auto& row : rows) {
    spdlog::info("extracting {}", row.patient_id);
    const io::VoxelGrid grid = io::load_volume(row.volume);
    const io::RegionMask mask = io::load_mask(row.mask, grid);
    texture::FeatureMap fm = texture::extract_conventional(grid, mask, topt);
    if (!o.no_fractal) {
      std::vector<fractal::FractalMap> maps;
      auto fr = fractal::extract_fractal(grid, mask, fopt, topt, o.dump_maps ? &maps : nullptr);
      fm.insert(fm.end(), fr.begin(), fr.end());
      for (const auto& m : maps) {
        const auto p = ctx.out_path("maps/" + row.patient_id + "_" + fractal::map_token(m.kind) + ".json");
        io::write_volume(m.values, p);
        ctx.wrote(p);
      }
    }
    feature_rows.push_back(std::move(fm));
  }

  io::FeatureTable table;
  for (const auto& row : rows) table.patient_ids.push_back(row.patient_id);
  for (std::size_t j = 0; j < feature_rows.front().size(); ++j) {
    std::vector<double> col;
    for (const auto& fr : feature_rows) col.push_back(fr[j].second);
    table.add_column(feature_rows.front()[j].first, std::move(col));
  }
  auto numeric_extra = [&](const std::string& key) -> std::optional<std::vector<double>> {
    if (!rows.front().extra.count(key)) return std::nullopt;
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(io::parse_real(r.extra.at(key)));
    return v;
  };
  auto text_extra = [&](const std::string& key) -> std::optional<std::vector<std::string>> {
    if (!rows.front().extra.count(key)) return std::nullopt;
    std::vector<std::string> v;
    for (const auto& r : rows) v.push_back(r.extra.at(key));
    return v;
  };
  table.time_days = numeric_extra("time_days");
  table.event = numeric_extra("event");
  table.rep_label = numeric_extra("rep_label");
  table.mgmt_status = text_extra("mgmt_status");
  table.idh_status = text_extra("idh_status");
  table.validate();

  ctx.write("features.csv", io::format_feature_table(table));
  ctx.write("feature_dictionary.txt", dictionary_text(table.feature_names));
  return kExitOk;
}

resample::ResamplingPlan plan_of(const io::StudyConfig& cfg) {
  return {cfg.iterations, cfg.folds, cfg.majority_sample, cfg.seed};
}

int run_rank(const Context& ctx) {
  const io::FeatureTable table = ctx.features();
  const learn::Labels y = labels_from(table, ctx.opt().label_column);
  const double theta =
      ctx.opt().f1_threshold >= 0 ? ctx.opt().f1_threshold : ctx.cfg().f1_threshold_rep;
  const auto report = resample::rank_features(table, y, plan_of(ctx.cfg()));

  std::vector<std::size_t> order(report.features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.mean_f1[a] > report.mean_f1[b];
  });
  std::string text = "feature,mean_f1,selected_flag\n";
  for (auto j : order) {
    const bool sel = report.mean_f1[j] >= theta;
    text += csv_line({report.features[j], io::format_real(report.mean_f1[j]), sel ? "1" : "0"});
  }
  ctx.write("ranking.csv", text);

  const auto chosen = resample::threshold_select(report, theta, true);
  const auto sig = resample::significance_filter(table, y, chosen, ctx.cfg().p_threshold);
  std::string s = "feature,test,p_value,flagged,selected\n";
  for (const auto& r : sig) {
    s += csv_line({r.feature, r.test, io::format_real(r.p), r.flagged ? "1" : "0",
                   r.selected ? "1" : "0"});
  }
  ctx.write("significance.csv", s);
  return kExitOk;
}

int run_classify(const Context& ctx) {
  const io::FeatureTable table = ctx.features();
  const learn::Labels y = labels_from(table, ctx.opt().label_column);
  std::vector<std::string> names = selection(ctx.opt());
  if (names.empty()) names = table.feature_names;
  learn::BoostParams bp;
  bp.n_trees = ctx.opt().trees;
  bp.depth = ctx.opt().depth;
  bp.learning_rate = ctx.opt().learning_rate;
  const auto d = resample::evaluate_model(table, y, names, plan_of(ctx.cfg()), bp);

  std::string text = "iteration,fold,auc,accuracy,ppv,fpr\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    text += csv_line({std::to_string(d.iteration[k]), std::to_string(d.fold[k]),
                      io::format_real(d.auc[k]), io::format_real(d.accuracy[k]),
                      io::format_real(d.ppv[k]), io::format_real(d.fpr[k])});
  }
  ctx.write("metrics.csv", text);
  std::string summary = "metric,mean,sd,count\n";
  const std::pair<const char*, const std::vector<double>*> metrics[] = {
      {"auc", &d.auc}, {"accuracy", &d.accuracy}, {"ppv", &d.ppv}, {"fpr", &d.fpr}, {"f1", &d.f1}};
  for (const auto& [name, values] : metrics) {
    const auto s = resample::summarize(*values);
    summary += csv_line({name, io::format_real(s.mean), io::format_real(s.sd),
                         std::to_string(values->size())});
  }
  ctx.write("metrics_summary.csv", summary);
  return kExitOk;
}

int run_survival(const Context& ctx) {
  const io::FeatureTable table = ctx.features();
  const auto records = survival::records_from_table(table);
  std::vector<std::string> candidates = selection(ctx.opt());
  if (candidates.empty() && ctx.opt().screen) {
    // dead/alive screen with the exclusive survival threshold
    const learn::Labels y = labels_from(table, "event");
    resample::ResamplingPlan plan = plan_of(ctx.cfg());
    plan.majority_sample = 0;
    const auto report = resample::rank_features(table, y, plan);
    const double theta =
        ctx.opt().f1_threshold >= 0 ? ctx.opt().f1_threshold : ctx.cfg().f1_threshold_survival;
    candidates = resample::threshold_select(report, theta, false);
    if (candidates.empty()) throw InputError("no feature passed the survival F1 screen");
  }
  if (candidates.empty()) candidates = table.feature_names;

  const auto sel = survival::select_alpha(records, table, candidates, ctx.cfg().alpha_grid,
                                          ctx.cfg().folds, ctx.cfg().seed);
  std::string profile = "alpha,cv_cindex\n";
  for (std::size_t a = 0; a < sel.grid.size(); ++a) {
    profile += csv_line({io::format_real(sel.grid[a]), io::format_real(sel.cv_cindex[a])});
  }
  ctx.write("alpha_profile.csv", profile);

  const auto chosen = survival::select_features_dependent(records, table, sel.alpha_hat,
                                                          ctx.cfg().p_threshold, candidates);
  std::string s = "name,coefficient,p_value\n";
  for (const auto& f : chosen) {
    s += csv_line({f.name, io::format_real(f.coefficient), io::format_real(f.p_value)});
  }
  ctx.write("selected_features.csv", s);
  ctx.write("survival_summary.csv",
            "key,value\nalpha_hat," + io::format_real(sel.alpha_hat) + "\ntau_hat," +
                io::format_real(sel.tau_hat) + "\ncandidates," + std::to_string(candidates.size()) +
                "\nselected," + std::to_string(chosen.size()) + "\n");
  return kExitOk;
}

prognosis::Coefficients read_coefficients(const fs::path& path) {
  const auto lines = lines_of(io::read_text(path));
  if (lines.empty() || split(lines[0]).size() < 2 || split(lines[0])[0] != "name" ||
      split(lines[0])[1] != "coefficient") {
    throw InputError("coefficient file needs a name,coefficient header: " + path.string());
  }
  prognosis::Coefficients c;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    c.emplace_back(cells.at(0), io::parse_real(cells.at(1)));
  }
  if (c.empty()) throw InputError("no coefficients in " + path.string());
  return c;
}

double alpha_from_summary(const fs::path& path) {
  if (!fs::exists(path)) return 0.0;
  for (const auto& line : lines_of(io::read_text(path))) {
    const auto cells = split(line);
    if (cells.size() == 2 && cells[0] == "alpha_hat") return io::parse_real(cells[1]);
  }
  return 0.0;
}

int run_prognosis(const Context& ctx) {
  const Options& o = ctx.opt();
  const io::FeatureTable table = ctx.features();
  const auto records = survival::records_from_table(table);
  const fs::path coef_path =
      o.coefficients.empty() ? ctx.out_path("selected_features.csv") : fs::path(o.coefficients);
  const auto coefs = read_coefficients(coef_path);
  const double alpha =
      o.alpha >= 0 ? o.alpha : alpha_from_summary(coef_path.parent_path() / "survival_summary.csv");

  const auto pi = prognosis::compute_pi(coefs, survival::minmax_scaled(table));
  const auto grouping = prognosis::split_by_pi(pi, table.patient_ids);

  std::string report = "patient_id,pi,group,rep_label\n";
  for (std::size_t i = 0; i < table.rows(); ++i) {
    report += csv_line({table.patient_ids[i], io::format_real(pi[i]),
                        prognosis::group_name(grouping.group[i]),
                        table.rep_label ? io::format_real((*table.rep_label)[i]) : ""});
  }
  ctx.write("prognosis_report.csv", report);

  const auto curves = prognosis::group_curves(records, grouping, alpha);
  for (int g = 0; g < 2; ++g) {
    const auto p = ctx.out_path(std::string("group_curves/") +
                                prognosis::group_name(static_cast<prognosis::Group>(g)) + ".csv");
    io::write_curve_csv(curves[g], p);
    ctx.wrote(p);
  }
  const auto svg_path = ctx.out_path("group_curves/curves.svg");
  svg::emit_curve_svg({{"good prognosis", curves[0]}, {"bad prognosis", curves[1]}}, svg_path,
                      "copula-graphic survival, alpha = " + io::format_real(alpha));
  ctx.wrote(svg_path);

  const auto perm = prognosis::permutation_pvalue(records, grouping, alpha, ctx.cfg().permutations,
                                                  ctx.cfg().seed);
  std::vector<double> times;
  for (const auto& r : records) times.push_back(r.t);
  const auto cmp_time = prognosis::group_comparison(times, grouping.group);
  const auto cmp_pi = prognosis::group_comparison(pi, grouping.group);

  std::string c =
      "metric,good_n,good_mean,good_sd,good_se,good_median,good_min,good_max,"
      "bad_n,bad_mean,bad_sd,bad_se,bad_median,bad_min,bad_max,test,statistic,p_value\n";
  auto stats_cells = [](const prognosis::GroupStats& s) {
    return std::vector<std::string>{std::to_string(s.n),      io::format_real(s.mean),
                                    io::format_real(s.sd),    io::format_real(s.se),
                                    io::format_real(s.median), io::format_real(s.min),
                                    io::format_real(s.max)};
  };
  for (const auto& [name, cmp] : {std::pair{"survival_time", &cmp_time}, std::pair{"pi", &cmp_pi}}) {
    std::vector<std::string> cells{name};
    for (const auto& g : cmp->groups) {
      const auto sc = stats_cells(g);
      cells.insert(cells.end(), sc.begin(), sc.end());
    }
    cells.insert(cells.end(), {cmp->test, "", io::format_real(cmp->p)});
    c += csv_line(cells);
  }
  {
    std::vector<std::string> cells{"curve_distance", std::to_string(grouping.count(prognosis::Group::kGood))};
    cells.insert(cells.end(), 6, "");
    cells.push_back(std::to_string(grouping.count(prognosis::Group::kBad)));
    cells.insert(cells.end(), 6, "");
    cells.insert(cells.end(), {"permutation", io::format_real(perm.d_observed), io::format_real(perm.p)});
    c += csv_line(cells);
  }
  ctx.write("comparison.csv", c);

  if (table.rep_label) {
    std::vector<int> rep;
    for (double v : *table.rep_label) {
      if (!std::isfinite(v)) throw InputError("rep_label has missing values");
      rep.push_back(static_cast<int>(v));
    }
    const auto tab = prognosis::cross_tab(grouping, rep);
    std::string x = "rep_label,good_count,bad_count,good_percent,bad_percent\n";
    for (int r = 0; r < 2; ++r) {
      x += csv_line({r ? "REP" : "non-REP", std::to_string(tab.counts[r][0]),
                     std::to_string(tab.counts[r][1]), io::format_real(tab.row_percent[r][0]),
                     io::format_real(tab.row_percent[r][1])});
    }
    ctx.write("crosstab.csv", x);
  }
  return kExitOk;
}

int run_simulate(const Context& ctx) {
  const Options& o = ctx.opt();
  if (o.kind == "survival") {
    synth::SimSpec spec;
    spec.n = o.n;
    spec.alpha = o.sim_alpha;
    spec.beta = o.beta;
    spec.gamma = o.gamma;
    spec.lambda_t = o.lambda_t;
    spec.lambda_u = o.lambda_u;
    spec.seed = ctx.cfg().seed;
    const auto data = synth::simulate_dependent(spec);
    ctx.write("features.csv", io::format_feature_table(data.table));
  } else if (o.kind == "classification") {
    const auto data =
        synth::simulate_classification(o.n, o.informative, o.noise, o.separation, ctx.cfg().seed);
    ctx.write("features.csv", io::format_feature_table(data.table));
  } else if (o.kind == "phantom") {
    if (o.dims.size() != 3) throw ParameterError("--dims needs three values");
    const io::Dims d{o.dims[0], o.dims[1], o.dims[2]};
    const auto ph =
        synth::simulate_phantom(synth::parse_phantom_kind(o.phantom), d, o.hurst, ctx.cfg().seed);
    const auto vol = ctx.out_path("phantom_volume.json");
    const auto msk = ctx.out_path("phantom_mask.json");
    io::write_volume(ph.grid, vol);
    io::write_mask(ph.mask, ph.grid.spacing(), msk);
    ctx.wrote(vol);
    ctx.wrote(msk);
    ctx.write("manifest.csv", "patient_id,volume,mask\nPHANTOM,phantom_volume.json,phantom_mask.json\n");
  } else {
    throw ParameterError("unknown --kind " + o.kind);
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Radiomics texture, fractal and copula survival pipelines"};
  app.name("cgrep");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", o.config, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master random seed (default 42)");
  app.add_option("--threads", o.threads, "worker threads; 0 = hardware concurrency");
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--test-mode", o.test_mode, "require an explicit --seed");
  app.fallthrough();

  auto add_study = [&](CLI::App* sub) {
    sub->add_option("--features", o.features, "features.csv input");
    sub->add_option("--iterations", o.iterations, "resampling iterations")->check(CLI::PositiveNumber);
    sub->add_option("--folds", o.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
    sub->add_option("--majority-sample", o.majority_sample,
                    "majority rows drawn per iteration; 0 = match the minority")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--f1-threshold", o.f1_threshold, "mean F1 selection threshold");
  };

  auto* extract = app.add_subcommand("extract", "volumes and masks -> features.csv");
  extract->add_option("--manifest", o.manifest, "CSV with patient_id,volume,mask[,reserved columns]");
  extract->add_option("--volume", o.volume, "single T1C volume (.nii or RAW3D)");
  extract->add_option("--mask", o.mask, "matching region mask");
  extract->add_option("--patient-id", o.patient_id, "id for a single volume");
  extract->add_flag("--no-fractal", o.no_fractal, "skip fractal map features");
  extract->add_flag("--dump-maps", o.dump_maps, "write fractal maps as RAW3D");

  auto* rank = app.add_subcommand("rank", "per-feature F1 ranking -> ranking.csv");
  add_study(rank);
  rank->add_option("--label-column", o.label_column, "0/1 target column");

  auto* classify = app.add_subcommand("classify", "boosted-tree evaluation -> metrics.csv");
  add_study(classify);
  classify->add_option("--label-column", o.label_column, "0/1 target column");
  classify->add_option("--select", o.select, "feature names")->delimiter(',');
  classify->add_option("--select-from", o.select_from,
                       "ranking.csv, significance.csv or selected_features.csv");
  classify->add_option("--trees", o.trees, "boosting rounds")->check(CLI::PositiveNumber);
  classify->add_option("--depth", o.depth, "tree depth")->check(CLI::Range(1, 3));
  classify->add_option("--learning-rate", o.learning_rate, "shrinkage");

  auto* surv = app.add_subcommand("survival", "alpha selection and dependent Cox screening");
  add_study(surv);
  surv->add_option("--alpha-grid", o.alpha_grid, "copula parameters to cross-validate")->delimiter(',');
  surv->add_option("--select", o.select, "candidate feature names")->delimiter(',');
  surv->add_option("--select-from", o.select_from, "file listing candidate features");
  surv->add_flag("--screen", o.screen, "pre-screen candidates by dead/alive F1 ranking");

  auto* prog = app.add_subcommand("prognosis", "prognostic index, groups, curves, permutation test");
  prog->add_option("--features", o.features, "features.csv input");
  prog->add_option("--coefficients", o.coefficients, "selected_features.csv (name,coefficient,...)");
  prog->add_option("--alpha", o.alpha, "copula parameter for the group curves")
      ->check(CLI::NonNegativeNumber);
  prog->add_option("--permutations", o.permutations, "permutation replicates")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "synthetic fixtures");
  sim->add_option("--kind", o.kind, "survival | classification | phantom")->required();
  sim->add_option("--n", o.n, "records");
  sim->add_option("--alpha", o.sim_alpha, "Clayton parameter of the latent times")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--beta", o.beta, "death coefficients")->delimiter(',');
  sim->add_option("--gamma", o.gamma, "censoring coefficients")->delimiter(',');
  sim->add_option("--lambda-t", o.lambda_t, "death baseline rate");
  sim->add_option("--lambda-u", o.lambda_u, "censoring baseline rate");
  sim->add_option("--informative", o.informative, "informative features");
  sim->add_option("--noise", o.noise, "noise features");
  sim->add_option("--separation", o.separation, "class mean shift of informative features");
  sim->add_option("--phantom", o.phantom, "constant | checkerboard | ramp | fbm");
  sim->add_option("--dims", o.dims, "phantom dims x,y,z")->delimiter(',');
  sim->add_option("--hurst", o.hurst, "fbm Hurst exponent");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    init_logging_from_env();
    if (o.test_mode && !o.seed) {
      throw ParameterError("--seed is required in test mode");
    }
    const Context ctx(o, out);
    if (extract->parsed()) return run_extract(ctx);
    if (rank->parsed()) return run_rank(ctx);
    if (classify->parsed()) return run_classify(ctx);
    if (surv->parsed()) return run_survival(ctx);
    if (prog->parsed()) return run_prognosis(ctx);
    if (sim->parsed()) return run_simulate(ctx);
    throw ParameterError("no subcommand");
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace cgrep::cli
