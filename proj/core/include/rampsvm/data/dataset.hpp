#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rampsvm/model/instance.hpp"

namespace rampsvm::data {

struct Dataset {
  model::SvmInstance instance;
  std::vector<std::string> feature_names;
  std::string provenance;

  int n() const { return instance.n; }
  int d() const { return instance.d; }
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::string message, int row, int column)
      : std::runtime_error(std::move(message)), row(row), column(column) {}
  int row;
  int column;
};

class LabelError : public std::runtime_error {
public:
  explicit LabelError(const std::string& message) : std::runtime_error(message) {}
};

struct CsvOptions {
  // -1 means the last column.
  int label_column = -1;
  // Unset: sniff the first line (any non-numeric cell means header).
  std::optional<bool> has_header;
};

/// Comma-separated numeric data, labels in {-1, +1} (or {0, 1}, mapped).
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options, const std::string& name);

struct ScalingParams {
  std::vector<double> offset;  // per-feature minimum on the fit data
  std::vector<double> range;   // max - min; 0 marks a constant feature
};

/// Min-max scaling to [0, 1] fitted on train and applied to both sets.
/// Constant features map to 0; test values outside the train range pass
/// through unclipped.
ScalingParams fit_scaling(const Dataset& train);
Dataset apply_scaling(const Dataset& ds, const ScalingParams& params);

struct FoldPlan {
  std::vector<std::vector<int>> folds;
  std::uint64_t seed = 0;
};

/// Ten disjoint folds covering all rows, class counts balanced within one
/// individual per fold.
FoldPlan stratified_folds(const Dataset& ds, std::uint64_t seed, int fold_count = 10);

Dataset subset(const Dataset& ds, const std::vector<int>& rows);

/// Flips the labels of ceil(fraction * n) uniformly chosen rows.
Dataset inject_label_noise(const Dataset& train, double fraction, std::uint64_t seed);

/// Flips, per class, the ceil(fraction * class size) rows with the largest
/// classic-SVM margin value, i.e. the most interior individuals.
Dataset inject_svm_outliers(const Dataset& train, double fraction, double C, std::uint64_t seed);

/// Half-up rounding used whenever a fractional budget value must become an
/// integer grid entry.
int round_half_up(double value);

/// The five-point budget grid derived from the largest budget value:
/// {B, 2/3 B, 1/2 B, 1/3 B, 1/5 B}, rounded half-up, deduplicated.
std::vector<int> budget_grid_values(int b_max);

using BudgetFitter =
    std::function<model::ClassifierSolution(const model::SvmInstance&, const model::HyperParams&)>;

/// Full grid-selection protocol: for each C, fit with B = d on ten seeded 90%
/// stratified samples, average the selected-feature counts, and derive the
/// grid from the largest rounded average.
std::vector<int> budget_grid(const Dataset& ds, const std::vector<double>& c_grid,
                             std::uint64_t seed, const BudgetFitter& fitter);

}  // namespace rampsvm::data
