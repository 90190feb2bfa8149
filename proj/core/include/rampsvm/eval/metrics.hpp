#pragma once

#include <optional>
#include <vector>

#include "rampsvm/model/instance.hpp"

namespace rampsvm::eval {

/// Hyperplane sign vote; a point exactly on the hyperplane counts as +1.
int predict(const model::ClassifierSolution& sol, const double* x, int d);
int predict(const model::ClassifierSolution& sol, const std::vector<double>& x);

struct Metrics {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  double acc = 0.0;
  // Balanced accuracy (TPR + TNR) / 2; absent when a class is missing from
  // the truth vector.
  std::optional<double> auc;

  long total() const { return tp + tn + fp + fn; }
};

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth);

}  // namespace rampsvm::eval
