#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rampsvm/data/dataset.hpp"
#include "rampsvm/eval/metrics.hpp"
#include "rampsvm/model/daks.hpp"

namespace rampsvm::eval {

enum class Perturbation : std::uint8_t { None, LabelNoise, SvmOutliers };
enum class FitterKind : std::uint8_t { Exact, Daks, SvmL1 };

const char* to_string(Perturbation p);
const char* to_string(FitterKind f);

struct FitOutcome {
  model::ClassifierSolution solution;
  double seconds = 0.0;  // effort-clock seconds
  double gap = 0.0;
  std::string status;
  bool ok = false;
};

/// One model fit, shared by the CV driver and the validation table.
FitOutcome fit_model(const model::SvmInstance& inst, const model::HyperParams& hp,
                     FitterKind kind, const daks::DaksParams& daks_params,
                     const milp::SolveLimits& exact_limits);

struct TfcvOptions {
  std::vector<double> c_grid;
  std::vector<int> b_grid;
  Perturbation perturb = Perturbation::None;
  double fraction = 0.05;
  FitterKind fitter = FitterKind::Daks;
  daks::DaksParams daks;
  milp::SolveLimits exact_limits;
  std::uint64_t seed = 0;
  int threads = 1;
  bool scale = true;
  int folds = 10;
};

struct FoldResult {
  int fold = 0;
  bool failed = false;
  std::string status;
  double seconds = 0.0;
  int selected_features = 0;
  double acc = 0.0;
  std::optional<double> auc;
};

struct CellResult {
  double C = 0.0;
  int B = 0;
  std::vector<FoldResult> folds;
  int completed = 0;
  bool any_failed = false;
  double mean_seconds = 0.0;
  double mean_features = 0.0;
  double mean_acc = 0.0;
  std::optional<double> mean_auc;
};

struct CvReport {
  std::vector<CellResult> cells;
  // Index into `cells` of the winner for each budget value, then overall:
  // highest ACC, ties by AUC, then by least time.
  std::vector<std::size_t> best_per_b;
  std::size_t best_cell = 0;
  std::uint64_t test_checksum_before = 0;
  std::uint64_t test_checksum_after = 0;
  TfcvOptions options;
};

CvReport run_tfcv(const data::Dataset& ds, const TfcvOptions& options);

struct ValidationRow {
  double C = 0.0;
  double exact_seconds = 0.0;
  double exact_gap = 0.0;
  double heuristic_seconds = 0.0;
  double exact_best = 0.0;
  double heuristic_best = 0.0;
  double pbs = 0.0;  // (heuristic - exact) / exact
};

struct ValidationReport {
  int B = 0;
  std::uint64_t seed = 0;
  std::vector<ValidationRow> rows;
};

ValidationReport validate_heuristic(const data::Dataset& ds, const std::vector<double>& c_grid,
                                    int B, const milp::SolveLimits& exact_limits,
                                    const daks::DaksParams& daks_params, std::uint64_t seed,
                                    bool scale = true);

/// Deterministic JSON (insertion-ordered keys, no wall-clock fields).
std::string cv_report_to_json(const CvReport& report, const std::string& dataset_name);
/// Table-shaped CSV: Form., B, C, Time, Av. F, ACC, AUC — best C per budget.
std::string cv_report_to_csv(const CvReport& report, const std::string& form_name);
std::string validation_to_json(const ValidationReport& report, const std::string& dataset_name);
std::string validation_to_csv(const ValidationReport& report, const std::string& dataset_name);

std::uint64_t fnv1a_hash(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace rampsvm::eval
