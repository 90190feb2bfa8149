#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rampsvm/lp/model.hpp"
#include "rampsvm/milp/solver.hpp"
#include "rampsvm/model/instance.hpp"

namespace rampsvm::model {

/// Per-individual status codes driving the restricted sub-problems:
/// 0 fixes z_i to 0, 1 fixes it to 1, 2 leaves it binary.
struct ZHat {
  std::vector<std::uint8_t> codes;

  int count(int code) const {
    int c = 0;
    for (auto v : codes) c += (v == code);
    return c;
  }
};

class EmptyKernel : public std::invalid_argument {
public:
  EmptyKernel() : std::invalid_argument("restricted model needs a non-empty kernel") {}
};

/// Column ids of each model block inside a built program; -1 where a block
/// member was not materialized.
struct VarMap {
  std::vector<int> w;        // plain hyperplane coefficients (classic model)
  std::vector<int> eta;      // |w| proxies (classic model)
  std::vector<int> w_plus;
  std::vector<int> w_minus;
  int b = -1;
  std::vector<int> xi;
  std::vector<int> z;
  std::vector<int> v;
};

struct BuiltLp {
  lp::LinearProgram lp;
  VarMap map;
  double objective_constant = 0.0;
  bool degenerate = false;
};

struct BuiltMilp {
  milp::MilpProblem milp;
  VarMap map;
  double objective_constant = 0.0;
};

/// Classic soft-margin l1 model: min Sum eta + C Sum xi with eta >= |w|
/// absolute-value rows. Optionally restricted to a subset of features.
BuiltLp build_svm_l1(const SvmInstance& inst, double C,
                     const std::vector<std::uint8_t>* allowed_features = nullptr);

/// Refit LP over the selected features and kept individuals only; individuals
/// with z_fix = 1 contribute no rows and their 2C cost is left to the caller.
BuiltLp build_refit_lp(const SvmInstance& inst, double C, const std::vector<int>& v_fix,
                       const std::vector<int>& z_fix);

/// Full ramp-loss budgeted MILP with big-M margin rows, the xi/z strengthening
/// rows, feature linking, the budget row, and the accumulated bound rows when
/// they are present in `bounds`.
BuiltMilp build_rlfs(const SvmInstance& inst, const HyperParams& hp, const BigMBounds& bounds);

/// Continuous relaxation used by every bound-tightening LP: objective cap row,
/// z and v relaxed to [0, 1], no integrality. Objective set by the callers.
BuiltLp build_tightening_region(const SvmInstance& inst, const HyperParams& hp,
                                const BigMBounds& bounds);

BuiltLp build_ubw_lp(const SvmInstance& inst, const HyperParams& hp, const BigMBounds& bounds);

/// (max b, min b) pair over the relaxed region with the w-sum rows included.
std::pair<BuiltLp, BuiltLp> build_b_bound_lps(const SvmInstance& inst, const HyperParams& hp,
                                              const BigMBounds& bounds);

BuiltLp build_ubmi_lp(const SvmInstance& inst, const HyperParams& hp, const BigMBounds& bounds,
                      int individual);

BuiltLp build_ubm_class_lp(const SvmInstance& inst, const HyperParams& hp,
                           const BigMBounds& bounds, const ClassExtremes& extremes,
                           int label_class);

struct RestrictedOptions {
  // When set, adds the improving-bound row at this (global) objective value,
  // offset by the fixed-outlier constant and a small epsilon to force strict
  // improvement.
  std::optional<double> ub_row;
  // When non-empty, adds a "pick at least one of these features" row.
  std::vector<int> force_row;
};

/// Restricted sub-problem over a feature kernel under fixed/binary z codes.
BuiltMilp build_restricted(const SvmInstance& inst, const HyperParams& hp,
                           const BigMBounds& bounds, const std::vector<int>& kernel,
                           const ZHat& zhat, const RestrictedOptions& options = {});

/// Kernel = all features with the selection variables relaxed to [0, 1];
/// only the z of "possible outlier" individuals stay binary.
BuiltMilp build_relaxed_v(const SvmInstance& inst, const HyperParams& hp,
                          const BigMBounds& bounds, const ZHat& zhat);

/// Expands a classifier solution into the column space of a built model.
std::vector<double> solution_to_vector(const ClassifierSolution& sol, const VarMap& map,
                                       int num_vars);

/// Reads a classifier solution back out of a solved variable vector. Blocks
/// absent from the map default to zero; z defaults follow `zhat` when given.
ClassifierSolution solution_from_vector(const SvmInstance& inst, double C, const VarMap& map,
                                        const std::vector<double>& x,
                                        const ZHat* zhat = nullptr);

}  // namespace rampsvm::model
