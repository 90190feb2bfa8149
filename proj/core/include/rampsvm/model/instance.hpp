#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rampsvm/lp/model.hpp"

namespace rampsvm::model {

/// Training sample: dense n x d feature matrix and labels in {-1, +1}.
struct SvmInstance {
  int n = 0;
  int d = 0;
  std::vector<double> x;  // row major, n * d
  std::vector<int> y;

  double at(int i, int k) const { return x[static_cast<std::size_t>(i) * d + k]; }
  double& at(int i, int k) { return x[static_cast<std::size_t>(i) * d + k]; }

  void validate() const;
};

struct HyperParams {
  double C = 1.0;
  int B = 1;  // feature budget, 1 <= B <= d
};

/// The decision vector shared by every model in the toolkit, plus its
/// objective value Sum(w+ + w-) + C (Sum xi + 2 Sum z).
struct ClassifierSolution {
  std::vector<double> w_plus;
  std::vector<double> w_minus;
  double b = 0.0;
  std::vector<double> xi;
  std::vector<int> z;
  std::vector<int> v;
  double objective = 0.0;

  double weight(int k) const { return w_plus[k] - w_minus[k]; }
  int selected_count() const {
    int c = 0;
    for (int vk : v) c += vk;
    return c;
  }
};

/// Big-M state produced and consumed by the tightening loop. UB_w and the
/// intercept bounds stay unset (infinite) until the corresponding stage has
/// run; builders only emit their rows once the values are finite.
struct BigMBounds {
  std::vector<double> M;  // per individual
  std::vector<double> u;  // per feature, bound on w+
  std::vector<double> l;  // per feature, bound on w-
  double UB = lp::kInf;
  double UB_w = lp::kInf;
  double LB_b = -lp::kInf;
  double UB_b = lp::kInf;
  // Cached max same-class l-inf distance per individual; scales M updates.
  std::vector<double> same_class_diameter;

  bool has_ubw() const { return std::isfinite(UB_w); }
  bool has_b_bounds() const { return std::isfinite(LB_b) || std::isfinite(UB_b); }
};

/// Per-feature extreme values over each class, for the class-level big-M LPs.
struct ClassExtremes {
  std::vector<double> min_pos, max_pos;  // class +1
  std::vector<double> min_neg, max_neg;  // class -1
};

ClassExtremes compute_class_extremes(const SvmInstance& inst);

double evaluate_objective(const SvmInstance& inst, double C, const ClassifierSolution& sol);

}  // namespace rampsvm::model
