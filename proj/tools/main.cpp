// Command-line front end: train | cv | validate | tighten | export-lp.
// Batch only; every run writes a metadata block sufficient to reproduce it.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "rampsvm/data/dataset.hpp"
#include "rampsvm/eval/cv.hpp"
#include "rampsvm/lp/writer.hpp"
#include "rampsvm/model/bigm.hpp"
#include "rampsvm/model/daks.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rampsvm;

namespace {

struct AppConfig {
  std::string data;
  int label_col = -1;
  double C = 1.0;
  int B = 0;  // 0 = all features
  std::vector<double> c_grid;
  std::vector<int> b_grid;
  std::string solver = "daks";
  int variant = 0;
  std::string perturb = "none";
  double fraction = 0.05;
  std::uint64_t seed = 0;
  double time_limit = 300.0;
  std::string out_dir = ".";
  int threads = 0;
  bool scale = true;
  std::string clock = "deterministic";
  daks::DaksParams daks;
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

void merge_config_file(AppConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j[key].template get<std::decay_t<decltype(target)>>();
  };
  get("data", cfg.data);
  get("label_col", cfg.label_col);
  get("C", cfg.C);
  get("B", cfg.B);
  get("c_grid", cfg.c_grid);
  get("b_grid", cfg.b_grid);
  get("solver", cfg.solver);
  get("variant", cfg.variant);
  get("perturb", cfg.perturb);
  get("fraction", cfg.fraction);
  get("seed", cfg.seed);
  get("time_limit", cfg.time_limit);
  get("out_dir", cfg.out_dir);
  get("threads", cfg.threads);
  get("scale", cfg.scale);
  get("clock", cfg.clock);
  if (j.contains("daks")) {
    const auto& d = j["daks"];
    auto getd = [&](const char* key, auto& target) {
      if (d.contains(key)) target = d[key].template get<std::decay_t<decltype(target)>>();
    };
    getd("delta", cfg.daks.delta);
    getd("p", cfg.daks.p);
    getd("q", cfg.daks.q);
    getd("t_easy", cfg.daks.t_easy);
    getd("t_fea", cfg.daks.t_fea);
    getd("t_inc", cfg.daks.t_inc);
    getd("t_limit", cfg.daks.t_limit);
    getd("possible_outlier_threshold", cfg.daks.possible_outlier_threshold);
    getd("phase2_rounds", cfg.daks.phase2_rounds);
  }
}

void finalize(AppConfig& cfg) {
  if (cfg.data.empty()) throw ConfigError("--data is required");
  if (!fs::exists(cfg.data)) throw ConfigError("dataset path '" + cfg.data + "' does not exist");
  if (cfg.solver != "exact" && cfg.solver != "daks") {
    throw ConfigError("--solver must be 'exact' or 'daks'");
  }
  if (cfg.perturb != "none" && cfg.perturb != "label-noise" && cfg.perturb != "svm-outliers") {
    throw ConfigError("--perturb must be none, label-noise or svm-outliers");
  }
  if (cfg.variant != 0 && cfg.variant != 1 && cfg.variant != 2) {
    throw ConfigError("--variant must be 1 or 2");
  }
  if (cfg.clock != "deterministic" && cfg.clock != "wall") {
    throw ConfigError("clock must be 'deterministic' or 'wall'");
  }
  if (cfg.c_grid.empty()) cfg.c_grid = {cfg.C};
  cfg.daks.clock_mode = cfg.clock == "wall" ? util::Stopwatch::Mode::Wall
                                            : util::Stopwatch::Mode::Deterministic;
  cfg.daks.algo1.variant = cfg.variant;
}

json metadata_json(const AppConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["data"] = cfg.data;
  j["label_col"] = cfg.label_col;
  j["seed"] = cfg.seed;
  j["solver"] = cfg.solver;
  j["variant"] = cfg.variant;
  j["scale"] = cfg.scale;
  j["perturb"] = cfg.perturb;
  j["fraction"] = cfg.fraction;
  j["time_limit"] = cfg.time_limit;
  j["clock"] = cfg.clock;
  j["daks"] = {{"delta", cfg.daks.delta},
               {"p", cfg.daks.p},
               {"q", cfg.daks.q},
               {"t_easy", cfg.daks.t_easy},
               {"t_fea", cfg.daks.t_fea},
               {"t_inc", cfg.daks.t_inc},
               {"t_limit", cfg.daks.t_limit},
               {"possible_outlier_threshold", cfg.daks.possible_outlier_threshold},
               {"phase2_rounds", cfg.daks.phase2_rounds}};
  j["tolerances"] = {{"feasibility", cfg.daks.algo1.lp_options.feas_tol},
                     {"optimality", cfg.daks.algo1.lp_options.opt_tol},
                     {"zero", cfg.daks.algo1.lp_options.zero_tol},
                     {"integrality", 1e-9}};
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

data::Dataset load_dataset(const AppConfig& cfg) {
  data::CsvOptions opts;
  opts.label_column = cfg.label_col;
  data::Dataset ds = data::load_csv(cfg.data, opts);
  // Manifest of what was actually ingested, next to the run outputs.
  json manifest;
  manifest["source"] = cfg.data;
  manifest["rows"] = ds.n();
  manifest["features"] = ds.d();
  int positives = 0;
  for (int label : ds.instance.y) positives += label == 1;
  manifest["class_counts"] = {{"positive", positives}, {"negative", ds.n() - positives}};
  manifest["feature_names"] = ds.feature_names;
  manifest["label_column"] = cfg.label_col;
  write_file(fs::path(cfg.out_dir) / "dataset_manifest.json", manifest.dump(2) + "\n");
  return ds;
}

model::HyperParams hyper_of(const AppConfig& cfg, int d) {
  model::HyperParams hp;
  hp.C = cfg.C;
  hp.B = cfg.B > 0 ? cfg.B : d;
  if (hp.B < 1 || hp.B > d) throw ConfigError("budget B must be within 1..d");
  return hp;
}

json solution_json(const data::Dataset& ds, const model::ClassifierSolution& sol) {
  json j;
  j["objective"] = sol.objective;
  j["intercept"] = sol.b;
  json weights = json::object();
  json selected = json::array();
  for (int k = 0; k < ds.d(); ++k) {
    if (sol.v[k] == 1) {
      const std::string name = k < static_cast<int>(ds.feature_names.size())
                                   ? ds.feature_names[k]
                                   : "f" + std::to_string(k);
      selected.push_back({{"index", k}, {"name", name}, {"weight", sol.weight(k)}});
    }
    if (sol.w_plus[k] != 0.0 || sol.w_minus[k] != 0.0) {
      weights[std::to_string(k)] = sol.weight(k);
    }
  }
  j["selected_features"] = std::move(selected);
  j["weights"] = std::move(weights);
  j["outliers"] = json::array();
  for (std::size_t i = 0; i < sol.z.size(); ++i) {
    if (sol.z[i] == 1) j["outliers"].push_back(i);
  }
  return j;
}

int cmd_train(const AppConfig& cfg) {
  data::Dataset ds = load_dataset(cfg);
  if (cfg.scale) ds = data::apply_scaling(ds, data::fit_scaling(ds));
  const auto hp = hyper_of(cfg, ds.d());

  std::ofstream tighten_trace(fs::path(cfg.out_dir) / "tighten_trace.jsonl");
  bigm::TraceSink tighten_sink = [&](const bigm::TraceEntry& e) {
    json j = {{"stage", e.stage}, {"field", e.field}, {"old", e.old_value}, {"new", e.new_value}};
    tighten_trace << j.dump() << "\n";
  };

  json out;
  out["metadata"] = metadata_json(cfg, "train");
  out["C"] = hp.C;
  out["B"] = hp.B;

  if (cfg.solver == "daks") {
    std::ofstream daks_trace(fs::path(cfg.out_dir) / "daks_trace.jsonl");
    daks::TraceSink sink = [&](const daks::TraceEntry& e) {
      json j = {{"round", e.round},    {"iteration", e.iteration},   {"stage", e.stage},
                {"kernel", e.kernel_size}, {"bucket", e.bucket_size},
                {"status", e.status},  {"ub", e.upper_bound},        {"lb_zhat", e.lb_zhat},
                {"zhat", {e.zhat0, e.zhat1, e.zhat2}}};
      daks_trace << j.dump() << "\n";
    };
    daks::DaksParams params = cfg.daks;
    auto result = daks::run_daks(ds.instance, hp, params, sink);
    out["status"] = result.stop_reason;
    out["time"] = result.elapsed_seconds;
    out["feasible"] = result.feasible;
    out["model"] = solution_json(ds, result.best);
  } else {
    util::Stopwatch sw(cfg.daks.clock_mode);
    auto a1 = bigm::run_algorithm1(ds.instance, hp, cfg.daks.algo1, tighten_sink, &sw);
    auto built = model::build_rlfs(ds.instance, hp, a1.bounds);
    std::ofstream events(fs::path(cfg.out_dir) / "milp_events.jsonl");
    milp::MilpEventLogger logger = [&](const milp::MilpEvent& e) {
      json j = {{"time", e.time},
                {"node", e.node},
                {"incumbent", e.incumbent ? json(*e.incumbent) : json(nullptr)},
                {"bound", e.bound},
                {"kind", e.kind}};
      events << j.dump() << "\n";
    };
    milp::SolveLimits limits;
    limits.time_limit = cfg.time_limit;
    milp::MilpSolver solver(cfg.daks.algo1.lp_options, cfg.daks.clock_mode);
    const auto warm =
        model::solution_to_vector(a1.incumbent, built.map, built.milp.base.num_vars());
    auto milp_sol = solver.solve(built.milp, limits, warm, logger);
    model::ClassifierSolution best =
        milp_sol.has_incumbent()
            ? model::solution_from_vector(ds.instance, hp.C, built.map, *milp_sol.incumbent)
            : a1.incumbent;
    out["status"] = milp_sol.status == milp::MilpStatus::Optimal ? "optimal" : "limit";
    out["gap"] = std::isfinite(milp_sol.gap) ? milp_sol.gap : 1.0;
    out["time"] = sw.seconds() + milp_sol.elapsed_seconds;
    out["nodes"] = milp_sol.nodes;
    out["model"] = solution_json(ds, best);
  }
  write_file(fs::path(cfg.out_dir) / "model.json", out.dump(2) + "\n");
  return 0;
}

int cmd_cv(const AppConfig& cfg) {
  data::Dataset ds = load_dataset(cfg);
  eval::TfcvOptions options;
  options.c_grid = cfg.c_grid;
  options.b_grid = cfg.b_grid.empty() ? std::vector<int>{hyper_of(cfg, ds.d()).B} : cfg.b_grid;
  options.perturb = cfg.perturb == "label-noise"    ? eval::Perturbation::LabelNoise
                    : cfg.perturb == "svm-outliers" ? eval::Perturbation::SvmOutliers
                                                    : eval::Perturbation::None;
  options.fraction = cfg.fraction;
  options.fitter = cfg.solver == "exact" ? eval::FitterKind::Exact : eval::FitterKind::Daks;
  options.daks = cfg.daks;
  options.exact_limits.time_limit = cfg.time_limit;
  options.seed = cfg.seed;
  options.scale = cfg.scale;
  options.threads =
      cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  const auto report = eval::run_tfcv(ds, options);

  json j = json::parse(eval::cv_report_to_json(report, ds.provenance));
  json wrapped;
  wrapped["metadata"] = metadata_json(cfg, "cv");
  for (auto& [key, value] : j.items()) wrapped[key] = value;
  write_file(fs::path(cfg.out_dir) / "report.json", wrapped.dump(2) + "\n");
  // The exact arm labels its rows with the time limit it ran under.
  const std::string form = cfg.solver == "exact"
                               ? "ramp-fs-exact(t=" + std::to_string(static_cast<long>(
                                                          cfg.time_limit)) + "s)"
                               : "ramp-fs";
  write_file(fs::path(cfg.out_dir) / "tables.csv", eval::cv_report_to_csv(report, form));
  return 0;
}

int cmd_validate(const AppConfig& cfg) {
  data::Dataset ds = load_dataset(cfg);
  const auto hp = hyper_of(cfg, ds.d());
  milp::SolveLimits limits;
  limits.time_limit = cfg.time_limit;
  const auto report =
      eval::validate_heuristic(ds, cfg.c_grid, hp.B, limits, cfg.daks, cfg.seed, cfg.scale);
  json j = json::parse(eval::validation_to_json(report, ds.provenance));
  json wrapped;
  wrapped["metadata"] = metadata_json(cfg, "validate");
  for (auto& [key, value] : j.items()) wrapped[key] = value;
  write_file(fs::path(cfg.out_dir) / "validation.json", wrapped.dump(2) + "\n");
  write_file(fs::path(cfg.out_dir) / "validation.csv",
             eval::validation_to_csv(report, ds.provenance));
  return 0;
}

int cmd_tighten(const AppConfig& cfg) {
  data::Dataset ds = load_dataset(cfg);
  if (cfg.scale) ds = data::apply_scaling(ds, data::fit_scaling(ds));
  const auto hp = hyper_of(cfg, ds.d());
  std::ofstream trace_file(fs::path(cfg.out_dir) / "tighten_trace.jsonl");
  bigm::TraceSink sink = [&](const bigm::TraceEntry& e) {
    json j = {{"stage", e.stage}, {"field", e.field}, {"old", e.old_value}, {"new", e.new_value}};
    trace_file << j.dump() << "\n";
  };
  util::Stopwatch sw(cfg.daks.clock_mode);
  auto a1 = bigm::run_algorithm1(ds.instance, hp, cfg.daks.algo1, sink, &sw);

  json out;
  out["metadata"] = metadata_json(cfg, "tighten");
  out["C"] = hp.C;
  out["B"] = hp.B;
  out["upper_bound"] = a1.upper_bound;
  out["variant_used"] = a1.variant_used;
  out["iterations"] = a1.iterations;
  out["incumbent_feasible"] = a1.incumbent_feasible;
  out["time"] = sw.seconds();
  out["UB_w"] = a1.bounds.UB_w;
  out["LB_b"] = a1.bounds.LB_b;
  out["UB_b"] = a1.bounds.UB_b;
  out["M"] = a1.bounds.M;
  out["u"] = a1.bounds.u;
  out["l"] = a1.bounds.l;
  write_file(fs::path(cfg.out_dir) / "bounds.json", out.dump(2) + "\n");
  return 0;
}

int cmd_export_lp(const AppConfig& cfg) {
  data::Dataset ds = load_dataset(cfg);
  if (cfg.scale) ds = data::apply_scaling(ds, data::fit_scaling(ds));
  const auto hp = hyper_of(cfg, ds.d());
  auto a1 = bigm::run_algorithm1(ds.instance, hp, cfg.daks.algo1);
  auto built = model::build_rlfs(ds.instance, hp, a1.bounds);

  std::vector<std::string> names(built.milp.base.num_vars());
  for (int k = 0; k < ds.d(); ++k) {
    names[built.map.w_plus[k]] = "wp" + std::to_string(k);
    names[built.map.w_minus[k]] = "wm" + std::to_string(k);
    names[built.map.v[k]] = "v" + std::to_string(k);
  }
  names[built.map.b] = "b";
  for (int i = 0; i < ds.n(); ++i) {
    names[built.map.xi[i]] = "xi" + std::to_string(i);
    names[built.map.z[i]] = "z" + std::to_string(i);
  }
  std::ofstream out(fs::path(cfg.out_dir) / "model.lp");
  if (!out) throw std::runtime_error("cannot write model.lp");
  lp::write_lp_format(built.milp.base, out, built.milp.binaries, names);
  return 0;
}

void emit_error(const std::string& type, const std::string& message) {
  json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ramp-loss SVM training with feature budgets"};
  app.require_subcommand(1);

  AppConfig cfg;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--data", cfg.data, "CSV dataset path");
    cmd->add_option("--label-col", cfg.label_col, "label column index (-1 = last)");
    cmd->add_option("--C", cfg.C, "misclassification weight");
    cmd->add_option("--B", cfg.B, "feature budget (0 = all features)");
    cmd->add_option("--c-grid", cfg.c_grid, "C values for cv/validate");
    cmd->add_option("--b-grid", cfg.b_grid, "B values for cv");
    cmd->add_option("--solver", cfg.solver, "exact|daks");
    cmd->add_option("--variant", cfg.variant, "big-M tightening variant (1|2)");
    cmd->add_option("--perturb", cfg.perturb, "none|label-noise|svm-outliers");
    cmd->add_option("--fraction", cfg.fraction, "perturbation fraction");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--time-limit", cfg.time_limit, "exact-solve time limit (effort seconds)");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
    cmd->add_option("--threads", cfg.threads, "parallelism for cv (0 = cores)");
    cmd->add_option("--config", config_path, "JSON config file (flags win)");
    cmd->add_flag("--no-scale", [&](std::int64_t) { cfg.scale = false; },
                  "disable min-max feature scaling");
  };

  CLI::App* train = app.add_subcommand("train", "fit one model at (C, B)");
  CLI::App* cv = app.add_subcommand("cv", "ten-fold cross-validation over the grids");
  CLI::App* validate = app.add_subcommand("validate", "exact-vs-heuristic comparison table");
  CLI::App* tighten = app.add_subcommand("tighten", "run the bound-tightening loop only");
  CLI::App* export_lp = app.add_subcommand("export-lp", "write the built model as an LP file");
  for (CLI::App* cmd : {train, cv, validate, tighten, export_lp}) add_common(cmd);

  // Config file first so that parsed flags overwrite its values.
  try {
    for (int a = 1; a + 1 < argc; ++a) {
      if (std::string(argv[a]) == "--config") {
        merge_config_file(cfg, argv[a + 1]);
        break;
      }
    }
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("config", e.what());
    return 2;
  }

  try {
    finalize(cfg);
  } catch (const std::exception& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    fs::create_directories(cfg.out_dir);
    if (*train) return cmd_train(cfg);
    if (*cv) return cmd_cv(cfg);
    if (*validate) return cmd_validate(cfg);
    if (*tighten) return cmd_tighten(cfg);
    if (*export_lp) return cmd_export_lp(cfg);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const data::ParseError& e) {
    emit_error("config", std::string(e.what()) + " at row " + std::to_string(e.row) + " column " +
                             std::to_string(e.column));
    return 2;
  } catch (const data::LabelError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return 1;
  }
  return 2;
}
