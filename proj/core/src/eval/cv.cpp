#include "rampsvm/eval/cv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "json.hpp"
#include "rampsvm/model/bigm.hpp"
#include "rampsvm/util/parallel.hpp"

namespace rampsvm::eval {

using json = nlohmann::ordered_json;
using model::ClassifierSolution;
using model::HyperParams;
using model::SvmInstance;

const char* to_string(Perturbation p) {
  switch (p) {
    case Perturbation::LabelNoise:
      return "label-noise";
    case Perturbation::SvmOutliers:
      return "svm-outliers";
    default:
      return "none";
  }
}

const char* to_string(FitterKind f) {
  switch (f) {
    case FitterKind::Exact:
      return "exact";
    case FitterKind::SvmL1:
      return "svm-l1";
    default:
      return "daks";
  }
}

std::uint64_t fnv1a_hash(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_rows(const data::Dataset& ds, const std::vector<std::vector<int>>& folds) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& fold : folds) {
    for (int i : fold) {
      h = fnv1a_hash(&ds.instance.y[i], sizeof(int), h);
      h = fnv1a_hash(&ds.instance.x[static_cast<std::size_t>(i) * ds.d()],
                     sizeof(double) * ds.d(), h);
    }
  }
  return h;
}

}  // namespace

FitOutcome fit_model(const SvmInstance& inst, const HyperParams& hp, FitterKind kind,
                     const daks::DaksParams& daks_params, const milp::SolveLimits& exact_limits) {
  FitOutcome out;
  switch (kind) {
    case FitterKind::SvmL1: {
      util::Stopwatch sw(daks_params.clock_mode);
      lp::SimplexSolver solver(daks_params.algo1.lp_options);
      solver.attach_stopwatch(&sw);
      auto built = model::build_svm_l1(inst, hp.C);
      auto sol = solver.solve(built.lp);
      out.ok = sol.optimal();
      out.status = out.ok ? "optimal" : "failed";
      if (out.ok) out.solution = bigm::classic_to_solution(inst, sol, built.map);
      out.seconds = sw.seconds();
      return out;
    }
    case FitterKind::Exact: {
      util::Stopwatch sw(daks_params.clock_mode);
      auto a1 = bigm::run_algorithm1(inst, hp, daks_params.algo1, {}, &sw);
      auto built = model::build_rlfs(inst, hp, a1.bounds);
      milp::MilpSolver solver(daks_params.algo1.lp_options, daks_params.clock_mode);
      const auto warm =
          model::solution_to_vector(a1.incumbent, built.map, built.milp.base.num_vars());
      auto milp_sol = solver.solve(built.milp, exact_limits, warm);
      out.seconds = sw.seconds() + milp_sol.elapsed_seconds;
      if (milp_sol.has_incumbent()) {
        out.solution = model::solution_from_vector(inst, hp.C, built.map, *milp_sol.incumbent);
        out.gap = std::isfinite(milp_sol.gap) ? milp_sol.gap : 0.0;
        out.ok = true;
        out.status = milp_sol.status == milp::MilpStatus::Optimal ? "optimal" : "feasible_limit";
      } else {
        out.solution = a1.incumbent;
        out.ok = true;
        out.status = "initial_only";
        out.gap = 1.0;
      }
      return out;
    }
    default: {
      auto result = daks::run_daks(inst, hp, daks_params);
      out.solution = std::move(result.best);
      out.seconds = result.elapsed_seconds;
      out.ok = result.feasible;
      out.status = result.stop_reason;
      return out;
    }
  }
}

CvReport run_tfcv(const data::Dataset& ds, const TfcvOptions& options) {
  if (options.c_grid.empty() || options.b_grid.empty()) {
    throw std::invalid_argument("both parameter grids must be non-empty");
  }
  CvReport report;
  report.options = options;

  const auto plan = data::stratified_folds(ds, options.seed, options.folds);
  report.test_checksum_before = hash_rows(ds, plan.folds);

  const int cells = static_cast<int>(options.c_grid.size() * options.b_grid.size());
  const int folds = options.folds;
  report.cells.assign(cells, {});
  for (int c = 0; c < cells; ++c) {
    report.cells[c].C = options.c_grid[c / options.b_grid.size()];
    report.cells[c].B = options.b_grid[c % options.b_grid.size()];
    report.cells[c].folds.assign(folds, {});
  }

  util::parallel_for(cells * folds, options.threads, [&](int task) {
    const int cell = task / folds;
    const int fold = task % folds;
    auto& slot = report.cells[cell].folds[fold];
    slot.fold = fold;
    try {
      std::vector<int> train_rows;
      for (int f = 0; f < folds; ++f) {
        if (f == fold) continue;
        train_rows.insert(train_rows.end(), plan.folds[f].begin(), plan.folds[f].end());
      }
      std::sort(train_rows.begin(), train_rows.end());
      data::Dataset train = data::subset(ds, train_rows);
      data::Dataset test = data::subset(ds, plan.folds[fold]);
      if (options.scale) {
        const auto scaling = data::fit_scaling(train);
        train = data::apply_scaling(train, scaling);
        test = data::apply_scaling(test, scaling);
      }
      const HyperParams hp{report.cells[cell].C, report.cells[cell].B};
      const std::uint64_t fold_seed = mix_seed(options.seed, fold);
      switch (options.perturb) {
        case Perturbation::LabelNoise:
          train = data::inject_label_noise(train, options.fraction, fold_seed);
          break;
        case Perturbation::SvmOutliers:
          train = data::inject_svm_outliers(train, options.fraction, hp.C, fold_seed);
          break;
        default:
          break;
      }
      const FitOutcome fit =
          fit_model(train.instance, hp, options.fitter, options.daks, options.exact_limits);
      if (!fit.ok) {
        slot.failed = true;
        slot.status = fit.status;
        return;
      }
      std::vector<int> preds(test.n());
      std::vector<double> row(test.d());
      for (int i = 0; i < test.n(); ++i) {
        for (int k = 0; k < test.d(); ++k) row[k] = test.instance.at(i, k);
        preds[i] = predict(fit.solution, row);
      }
      const Metrics metrics = compute_metrics(preds, test.instance.y);
      slot.seconds = fit.seconds;
      slot.selected_features = fit.solution.selected_count();
      slot.acc = metrics.acc;
      slot.auc = metrics.auc;
      slot.status = fit.status;
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.status = e.what();
    }
  });

  for (auto& cell : report.cells) {
    double time = 0, feats = 0, acc = 0, auc = 0;
    int auc_count = 0;
    for (const auto& fr : cell.folds) {
      if (fr.failed) {
        cell.any_failed = true;
        continue;
      }
      ++cell.completed;
      time += fr.seconds;
      feats += fr.selected_features;
      acc += fr.acc;
      if (fr.auc) {
        auc += *fr.auc;
        ++auc_count;
      }
    }
    if (cell.completed > 0) {
      cell.mean_seconds = time / cell.completed;
      cell.mean_features = feats / cell.completed;
      cell.mean_acc = acc / cell.completed;
    }
    if (auc_count > 0) cell.mean_auc = auc / auc_count;
  }

  auto better = [&](const CellResult& a, const CellResult& b) {
    if (a.mean_acc != b.mean_acc) return a.mean_acc > b.mean_acc;
    const double aa = a.mean_auc.value_or(-1.0), ba = b.mean_auc.value_or(-1.0);
    if (aa != ba) return aa > ba;
    return a.mean_seconds < b.mean_seconds;
  };
  report.best_per_b.clear();
  for (std::size_t bi = 0; bi < options.b_grid.size(); ++bi) {
    std::size_t best = bi;  // first cell with this B
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
      if (report.cells[c].B != options.b_grid[bi]) continue;
      if (better(report.cells[c], report.cells[best])) best = c;
    }
    report.best_per_b.push_back(best);
  }
  report.best_cell = 0;
  for (std::size_t c = 1; c < report.cells.size(); ++c) {
    if (better(report.cells[c], report.cells[report.best_cell])) report.best_cell = c;
  }

  report.test_checksum_after = hash_rows(ds, plan.folds);
  return report;
}

ValidationReport validate_heuristic(const data::Dataset& ds, const std::vector<double>& c_grid,
                                    int B, const milp::SolveLimits& exact_limits,
                                    const daks::DaksParams& daks_params, std::uint64_t seed,
                                    bool scale) {
  ValidationReport report;
  report.B = B;
  report.seed = seed;
  data::Dataset working = ds;
  if (scale) working = data::apply_scaling(ds, data::fit_scaling(ds));

  for (double C : c_grid) {
    const HyperParams hp{C, B};
    ValidationRow row;
    row.C = C;
    const FitOutcome exact =
        fit_model(working.instance, hp, FitterKind::Exact, daks_params, exact_limits);
    const FitOutcome heur =
        fit_model(working.instance, hp, FitterKind::Daks, daks_params, exact_limits);
    row.exact_seconds = exact.seconds;
    row.exact_gap = exact.gap;
    row.exact_best = exact.solution.objective;
    row.heuristic_seconds = heur.seconds;
    row.heuristic_best = heur.solution.objective;
    row.pbs = (row.heuristic_best - row.exact_best) / row.exact_best;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

json options_to_json(const TfcvOptions& o) {
  json j;
  j["seed"] = o.seed;
  j["fitter"] = to_string(o.fitter);
  j["perturbation"] = to_string(o.perturb);
  j["fraction"] = o.fraction;
  j["scale"] = o.scale;
  j["folds"] = o.folds;
  j["c_grid"] = o.c_grid;
  j["b_grid"] = o.b_grid;
  j["daks"] = {{"delta", o.daks.delta},
               {"p", o.daks.p},
               {"q", o.daks.q},
               {"t_easy", o.daks.t_easy},
               {"t_fea", o.daks.t_fea},
               {"t_inc", o.daks.t_inc},
               {"t_limit", o.daks.t_limit},
               {"possible_outlier_threshold", o.daks.possible_outlier_threshold},
               {"phase2_rounds", o.daks.phase2_rounds},
               {"variant", o.daks.algo1.variant},
               {"clock", o.daks.clock_mode == util::Stopwatch::Mode::Deterministic
                             ? "deterministic"
                             : "wall"}};
  j["tolerances"] = {{"feasibility", o.daks.algo1.lp_options.feas_tol},
                     {"optimality", o.daks.algo1.lp_options.opt_tol},
                     {"zero", o.daks.algo1.lp_options.zero_tol}};
  if (o.exact_limits.time_limit) j["exact_time_limit"] = *o.exact_limits.time_limit;
  return j;
}

json cell_to_json(const CellResult& cell) {
  json j;
  j["C"] = cell.C;
  j["B"] = cell.B;
  j["completed_folds"] = cell.completed;
  j["any_failed"] = cell.any_failed;
  j["mean_time"] = cell.mean_seconds;
  j["mean_selected_features"] = cell.mean_features;
  j["mean_acc"] = cell.mean_acc;
  if (cell.mean_auc) {
    j["mean_auc"] = *cell.mean_auc;
  } else {
    j["mean_auc"] = nullptr;
  }
  json folds = json::array();
  for (const auto& fr : cell.folds) {
    json f;
    f["fold"] = fr.fold;
    f["failed"] = fr.failed;
    f["status"] = fr.status;
    f["time"] = fr.seconds;
    f["selected_features"] = fr.selected_features;
    f["acc"] = fr.acc;
    if (fr.auc) {
      f["auc"] = *fr.auc;
    } else {
      f["auc"] = nullptr;
    }
    folds.push_back(std::move(f));
  }
  j["folds"] = std::move(folds);
  return j;
}

}  // namespace

std::string cv_report_to_json(const CvReport& report, const std::string& dataset_name) {
  json j;
  j["dataset"] = dataset_name;
  j["protocol"] = "ten-fold cross-validation";
  j["options"] = options_to_json(report.options);
  json cells = json::array();
  for (const auto& cell : report.cells) cells.push_back(cell_to_json(cell));
  j["cells"] = std::move(cells);
  json best_b = json::array();
  for (std::size_t i = 0; i < report.best_per_b.size(); ++i) {
    const auto& cell = report.cells[report.best_per_b[i]];
    best_b.push_back({{"B", cell.B}, {"C", cell.C}, {"cell_index", report.best_per_b[i]}});
  }
  j["best_per_b"] = std::move(best_b);
  j["best_cell_index"] = report.best_cell;
  j["test_checksums"] = {{"before", report.test_checksum_before},
                         {"after", report.test_checksum_after}};
  return j.dump(2) + "\n";
}

std::string cv_report_to_csv(const CvReport& report, const std::string& form_name) {
  std::string out = "Form.,B,C,Time,Av. F,ACC,AUC\n";
  char line[256];
  for (std::size_t idx : report.best_per_b) {
    const auto& cell = report.cells[idx];
    char auc[32];
    if (cell.mean_auc) {
      std::snprintf(auc, sizeof(auc), "%.2f%%", 100.0 * *cell.mean_auc);
    } else {
      std::snprintf(auc, sizeof(auc), "n/a");
    }
    std::snprintf(line, sizeof(line), "%s,%d,%g,%.2f,%.2f,%.2f%%,%s\n", form_name.c_str(), cell.B,
                  cell.C, cell.mean_seconds, cell.mean_features, 100.0 * cell.mean_acc, auc);
    out += line;
  }
  return out;
}

std::string validation_to_json(const ValidationReport& report, const std::string& dataset_name) {
  json j;
  j["dataset"] = dataset_name;
  j["B"] = report.B;
  j["seed"] = report.seed;
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"C", row.C},
                    {"t_e", row.exact_seconds},
                    {"gap", row.exact_gap},
                    {"t_h", row.heuristic_seconds},
                    {"bs_e", row.exact_best},
                    {"bs_h", row.heuristic_best},
                    {"pbs", row.pbs}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string validation_to_csv(const ValidationReport& report, const std::string& dataset_name) {
  std::string out = "Data,C,t_e,GAP,t_h,%BS\n";
  char line[256];
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof(line), "%s,%g,%.2f,%.2f%%,%.2f,%.2f%%\n", dataset_name.c_str(),
                  row.C, row.exact_seconds, 100.0 * row.exact_gap, row.heuristic_seconds,
                  100.0 * row.pbs);
    out += line;
  }
  return out;
}

}  // namespace rampsvm::eval
