#include "rampsvm/model/formulations.hpp"

#include <algorithm>
#include <cmath>

namespace rampsvm::model {

using lp::kInf;
using lp::LinearProgram;
using lp::ObjSense;
using lp::RowSense;

void SvmInstance::validate() const {
  if (n < 2 || d < 1) throw std::invalid_argument("instance needs n >= 2 and d >= 1");
  if (static_cast<int>(y.size()) != n || x.size() != static_cast<std::size_t>(n) * d) {
    throw std::invalid_argument("instance dimensions do not match payload");
  }
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) {
      pos = true;
    } else if (label == -1) {
      neg = true;
    } else {
      throw std::invalid_argument("labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw std::invalid_argument("both classes must be present");
  for (double value : x) {
    if (!std::isfinite(value)) throw std::invalid_argument("feature values must be finite");
  }
}

ClassExtremes compute_class_extremes(const SvmInstance& inst) {
  ClassExtremes e;
  e.min_pos.assign(inst.d, kInf);
  e.max_pos.assign(inst.d, -kInf);
  e.min_neg.assign(inst.d, kInf);
  e.max_neg.assign(inst.d, -kInf);
  for (int i = 0; i < inst.n; ++i) {
    for (int k = 0; k < inst.d; ++k) {
      const double value = inst.at(i, k);
      if (inst.y[i] == 1) {
        e.min_pos[k] = std::min(e.min_pos[k], value);
        e.max_pos[k] = std::max(e.max_pos[k], value);
      } else {
        e.min_neg[k] = std::min(e.min_neg[k], value);
        e.max_neg[k] = std::max(e.max_neg[k], value);
      }
    }
  }
  return e;
}

double evaluate_objective(const SvmInstance& inst, double C, const ClassifierSolution& sol) {
  double obj = 0.0;
  for (int k = 0; k < inst.d; ++k) obj += sol.w_plus[k] + sol.w_minus[k];
  double loss = 0.0;
  for (int i = 0; i < inst.n; ++i) loss += sol.xi[i] + 2.0 * sol.z[i];
  return obj + C * loss;
}

BuiltLp build_svm_l1(const SvmInstance& inst, double C,
                     const std::vector<std::uint8_t>* allowed_features) {
  inst.validate();
  BuiltLp out;
  auto& lp = out.lp;
  auto& map = out.map;
  map.w.assign(inst.d, -1);
  map.eta.assign(inst.d, -1);
  map.xi.assign(inst.n, -1);

  for (int k = 0; k < inst.d; ++k) {
    if (allowed_features != nullptr && !(*allowed_features)[k]) continue;
    map.w[k] = lp.add_variable(-kInf, kInf, 0.0);
    map.eta[k] = lp.add_variable(0.0, kInf, 1.0);
  }
  map.b = lp.add_variable(-kInf, kInf, 0.0);
  for (int i = 0; i < inst.n; ++i) map.xi[i] = lp.add_variable(0.0, kInf, C);

  for (int i = 0; i < inst.n; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int k = 0; k < inst.d; ++k) {
      if (map.w[k] < 0) continue;
      const double c = inst.y[i] * inst.at(i, k);
      if (c != 0.0) terms.emplace_back(map.w[k], c);
    }
    terms.emplace_back(map.b, static_cast<double>(inst.y[i]));
    terms.emplace_back(map.xi[i], 1.0);
    lp.add_row(std::move(terms), RowSense::GreaterEqual, 1.0);
  }
  for (int k = 0; k < inst.d; ++k) {
    if (map.w[k] < 0) continue;
    lp.add_row({{map.eta[k], 1.0}, {map.w[k], -1.0}}, RowSense::GreaterEqual, 0.0);
    lp.add_row({{map.eta[k], 1.0}, {map.w[k], 1.0}}, RowSense::GreaterEqual, 0.0);
  }
  return out;
}

BuiltLp build_refit_lp(const SvmInstance& inst, double C, const std::vector<int>& v_fix,
                       const std::vector<int>& z_fix) {
  inst.validate();
  BuiltLp out;
  auto& lp = out.lp;
  auto& map = out.map;
  map.w_plus.assign(inst.d, -1);
  map.w_minus.assign(inst.d, -1);
  map.xi.assign(inst.n, -1);

  int kept_features = 0;
  for (int k = 0; k < inst.d; ++k) {
    if (!v_fix[k]) continue;
    map.w_plus[k] = lp.add_variable(0.0, kInf, 1.0);
    map.w_minus[k] = lp.add_variable(0.0, kInf, 1.0);
    ++kept_features;
  }
  out.degenerate = kept_features == 0;
  map.b = lp.add_variable(-kInf, kInf, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    if (z_fix[i]) continue;
    map.xi[i] = lp.add_variable(0.0, 2.0, C);
  }
  for (int i = 0; i < inst.n; ++i) {
    if (z_fix[i]) continue;
    std::vector<std::pair<int, double>> terms;
    for (int k = 0; k < inst.d; ++k) {
      if (map.w_plus[k] < 0) continue;
      const double c = inst.y[i] * inst.at(i, k);
      terms.emplace_back(map.w_plus[k], c);
      terms.emplace_back(map.w_minus[k], -c);
    }
    terms.emplace_back(map.b, static_cast<double>(inst.y[i]));
    terms.emplace_back(map.xi[i], 1.0);
    lp.add_row(std::move(terms), RowSense::GreaterEqual, 1.0);
  }
  return out;
}

namespace {

// Shared full-model scaffold: w/b/xi/z/v columns plus the big-M margin rows,
// feature linking rows, the budget row, and accumulated bound rows. The
// strengthening rows xi <= 2(1 - z) are only wanted in the integer model, the
// relaxed tightening region leaves them out.
BuiltLp build_full_columns(const SvmInstance& inst, const HyperParams& hp,
                           const BigMBounds& bounds, bool with_strengthening) {
  inst.validate();
  BuiltLp out;
  auto& lp = out.lp;
  auto& map = out.map;
  map.w_plus.assign(inst.d, -1);
  map.w_minus.assign(inst.d, -1);
  map.xi.assign(inst.n, -1);
  map.z.assign(inst.n, -1);
  map.v.assign(inst.d, -1);

  for (int k = 0; k < inst.d; ++k) map.w_plus[k] = lp.add_variable(0.0, kInf, 1.0);
  for (int k = 0; k < inst.d; ++k) map.w_minus[k] = lp.add_variable(0.0, kInf, 1.0);
  map.b = lp.add_variable(bounds.LB_b, bounds.UB_b, 0.0);
  for (int i = 0; i < inst.n; ++i) map.xi[i] = lp.add_variable(0.0, 2.0, hp.C);
  for (int i = 0; i < inst.n; ++i) map.z[i] = lp.add_variable(0.0, 1.0, 2.0 * hp.C);
  for (int k = 0; k < inst.d; ++k) map.v[k] = lp.add_variable(0.0, 1.0, 0.0);

  for (int i = 0; i < inst.n; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int k = 0; k < inst.d; ++k) {
      const double c = inst.y[i] * inst.at(i, k);
      terms.emplace_back(map.w_plus[k], c);
      terms.emplace_back(map.w_minus[k], -c);
    }
    terms.emplace_back(map.b, static_cast<double>(inst.y[i]));
    terms.emplace_back(map.xi[i], 1.0);
    terms.emplace_back(map.z[i], bounds.M[i]);
    lp.add_row(std::move(terms), RowSense::GreaterEqual, 1.0);
  }
  if (with_strengthening) {
    for (int i = 0; i < inst.n; ++i) {
      lp.add_row({{map.xi[i], 1.0}, {map.z[i], 2.0}}, RowSense::LessEqual, 2.0);
    }
  }
  {
    std::vector<std::pair<int, double>> budget;
    for (int k = 0; k < inst.d; ++k) budget.emplace_back(map.v[k], 1.0);
    lp.add_row(std::move(budget), RowSense::LessEqual, static_cast<double>(hp.B));
  }
  for (int k = 0; k < inst.d; ++k) {
    lp.add_row({{map.w_plus[k], 1.0}, {map.v[k], -bounds.u[k]}}, RowSense::LessEqual, 0.0);
    lp.add_row({{map.w_minus[k], 1.0}, {map.v[k], -bounds.l[k]}}, RowSense::LessEqual, 0.0);
  }
  if (bounds.has_ubw()) {
    for (int k = 0; k < inst.d; ++k) {
      lp.add_row({{map.w_plus[k], 1.0}, {map.w_minus[k], 1.0}}, RowSense::LessEqual, bounds.UB_w);
    }
  }
  return out;
}

}  // namespace

BuiltMilp build_rlfs(const SvmInstance& inst, const HyperParams& hp, const BigMBounds& bounds) {
  BuiltLp full = build_full_columns(inst, hp, bounds, /*with_strengthening=*/true);
  BuiltMilp out;
  out.milp.base = std::move(full.lp);
  out.map = std::move(full.map);
  for (int i = 0; i < inst.n; ++i) out.milp.binaries.push_back(out.map.z[i]);
  for (int k = 0; k < inst.d; ++k) out.milp.binaries.push_back(out.map.v[k]);
  return out;
}

BuiltLp build_tightening_region(const SvmInstance& inst, const HyperParams& hp,
                                const BigMBounds& bounds) {
  BuiltLp out = build_full_columns(inst, hp, bounds, /*with_strengthening=*/false);
  // Objective cap row keeps the region inside the set of candidate optima.
  std::vector<std::pair<int, double>> cap;
  for (int k = 0; k < inst.d; ++k) {
    cap.emplace_back(out.map.w_plus[k], 1.0);
    cap.emplace_back(out.map.w_minus[k], 1.0);
  }
  for (int i = 0; i < inst.n; ++i) {
    cap.emplace_back(out.map.xi[i], hp.C);
    cap.emplace_back(out.map.z[i], 2.0 * hp.C);
  }
  out.lp.add_row(std::move(cap), RowSense::LessEqual, bounds.UB);
  // The tightening LPs set their own objective.
  std::fill(out.lp.objective.begin(), out.lp.objective.end(), 0.0);
  return out;
}

BuiltLp build_ubw_lp(const SvmInstance& inst, const HyperParams& hp, const BigMBounds& bounds) {
  if (!std::isfinite(bounds.UB)) {
    throw std::invalid_argument("tightening requires a finite objective upper bound");
  }
  BuiltLp out = build_tightening_region(inst, hp, bounds);
  out.lp.sense = ObjSense::Maximize;
  for (int k = 0; k < inst.d; ++k) {
    out.lp.objective[out.map.w_plus[k]] = 1.0;
    out.lp.objective[out.map.w_minus[k]] = 1.0;
  }
  return out;
}

std::pair<BuiltLp, BuiltLp> build_b_bound_lps(const SvmInstance& inst, const HyperParams& hp,
                                              const BigMBounds& bounds) {
  if (!bounds.has_ubw()) {
    throw std::logic_error("intercept bounds need the w-sum rows first");
  }
  BuiltLp ub = build_tightening_region(inst, hp, bounds);
  ub.lp.sense = ObjSense::Maximize;
  ub.lp.objective[ub.map.b] = 1.0;
  BuiltLp lb = ub;
  lb.lp.sense = ObjSense::Minimize;
  return {std::move(ub), std::move(lb)};
}

BuiltLp build_ubmi_lp(const SvmInstance& inst, const HyperParams& hp, const BigMBounds& bounds,
                      int individual) {
  if (individual < 0 || individual >= inst.n) throw std::invalid_argument("individual out of range");
  BuiltLp out = build_tightening_region(inst, hp, bounds);
  out.lp.sense = ObjSense::Maximize;
  out.objective_constant = 1.0;
  const int i = individual;
  out.lp.objective[out.map.xi[i]] = -1.0;
  for (int k = 0; k < inst.d; ++k) {
    const double c = inst.y[i] * inst.at(i, k);
    out.lp.objective[out.map.w_plus[k]] = -c;
    out.lp.objective[out.map.w_minus[k]] = c;
  }
  out.lp.objective[out.map.b] = -static_cast<double>(inst.y[i]);
  return out;
}

BuiltLp build_ubm_class_lp(const SvmInstance& inst, const HyperParams& hp,
                           const BigMBounds& bounds, const ClassExtremes& extremes,
                           int label_class) {
  if (label_class != 1 && label_class != -1) throw std::invalid_argument("class must be +1 or -1");
  BuiltLp out = build_tightening_region(inst, hp, bounds);
  out.lp.sense = ObjSense::Maximize;
  out.objective_constant = 1.0;
  if (label_class == 1) {
    for (int k = 0; k < inst.d; ++k) {
      out.lp.objective[out.map.w_plus[k]] = -extremes.min_pos[k];
      out.lp.objective[out.map.w_minus[k]] = extremes.max_pos[k];
    }
    out.lp.objective[out.map.b] = -1.0;
  } else {
    for (int k = 0; k < inst.d; ++k) {
      out.lp.objective[out.map.w_plus[k]] = extremes.max_neg[k];
      out.lp.objective[out.map.w_minus[k]] = -extremes.min_neg[k];
    }
    out.lp.objective[out.map.b] = 1.0;
  }
  return out;
}

namespace {

void check_zhat(const SvmInstance& inst, const ZHat& zhat) {
  if (static_cast<int>(zhat.codes.size()) != inst.n) {
    throw std::invalid_argument("zhat length does not match instance");
  }
  for (auto c : zhat.codes) {
    if (c > 2) throw std::invalid_argument("zhat codes must be 0, 1 or 2");
  }
}

BuiltMilp build_kernel_model(const SvmInstance& inst, const HyperParams& hp,
                             const BigMBounds& bounds, const std::vector<int>& kernel_in,
                             const ZHat& zhat, const RestrictedOptions& options,
                             bool binary_v) {
  inst.validate();
  check_zhat(inst, zhat);
  std::vector<int> kernel = kernel_in;
  std::sort(kernel.begin(), kernel.end());
  kernel.erase(std::unique(kernel.begin(), kernel.end()), kernel.end());
  if (kernel.empty()) throw EmptyKernel();
  for (int k : kernel) {
    if (k < 0 || k >= inst.d) throw std::invalid_argument("kernel feature out of range");
  }

  BuiltMilp out;
  auto& lp = out.milp.base;
  auto& map = out.map;
  map.w_plus.assign(inst.d, -1);
  map.w_minus.assign(inst.d, -1);
  map.v.assign(inst.d, -1);
  map.xi.assign(inst.n, -1);
  map.z.assign(inst.n, -1);

  const int fixed_outliers = zhat.count(1);
  out.objective_constant = 2.0 * hp.C * fixed_outliers;

  for (int k : kernel) map.w_plus[k] = lp.add_variable(0.0, kInf, 1.0);
  for (int k : kernel) map.w_minus[k] = lp.add_variable(0.0, kInf, 1.0);
  map.b = lp.add_variable(bounds.LB_b, bounds.UB_b, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    if (zhat.codes[i] == 1) continue;
    map.xi[i] = lp.add_variable(0.0, 2.0, hp.C);
  }
  for (int i = 0; i < inst.n; ++i) {
    if (zhat.codes[i] != 2) continue;
    map.z[i] = lp.add_variable(0.0, 1.0, 2.0 * hp.C);
    out.milp.binaries.push_back(map.z[i]);
  }
  for (int k : kernel) {
    map.v[k] = lp.add_variable(0.0, 1.0, 0.0);
    if (binary_v) out.milp.binaries.push_back(map.v[k]);
  }

  for (int i = 0; i < inst.n; ++i) {
    if (zhat.codes[i] == 1) continue;  // margin row dropped, cost is constant
    std::vector<std::pair<int, double>> terms;
    for (int k : kernel) {
      const double c = inst.y[i] * inst.at(i, k);
      terms.emplace_back(map.w_plus[k], c);
      terms.emplace_back(map.w_minus[k], -c);
    }
    terms.emplace_back(map.b, static_cast<double>(inst.y[i]));
    terms.emplace_back(map.xi[i], 1.0);
    if (zhat.codes[i] == 2) terms.emplace_back(map.z[i], bounds.M[i]);
    lp.add_row(std::move(terms), RowSense::GreaterEqual, 1.0);
    if (zhat.codes[i] == 2) {
      lp.add_row({{map.xi[i], 1.0}, {map.z[i], 2.0}}, RowSense::LessEqual, 2.0);
    }
  }
  {
    std::vector<std::pair<int, double>> budget;
    for (int k : kernel) budget.emplace_back(map.v[k], 1.0);
    lp.add_row(std::move(budget), RowSense::LessEqual, static_cast<double>(hp.B));
  }
  for (int k : kernel) {
    lp.add_row({{map.w_plus[k], 1.0}, {map.v[k], -bounds.u[k]}}, RowSense::LessEqual, 0.0);
    lp.add_row({{map.w_minus[k], 1.0}, {map.v[k], -bounds.l[k]}}, RowSense::LessEqual, 0.0);
  }
  if (bounds.has_ubw()) {
    for (int k : kernel) {
      lp.add_row({{map.w_plus[k], 1.0}, {map.w_minus[k], 1.0}}, RowSense::LessEqual, bounds.UB_w);
    }
  }
  if (options.ub_row.has_value()) {
    const double ub = *options.ub_row;
    const double eps = 1e-6 * std::max(1.0, std::abs(ub));
    std::vector<std::pair<int, double>> cap;
    for (int k : kernel) {
      cap.emplace_back(map.w_plus[k], 1.0);
      cap.emplace_back(map.w_minus[k], 1.0);
    }
    for (int i = 0; i < inst.n; ++i) {
      if (map.xi[i] >= 0) cap.emplace_back(map.xi[i], hp.C);
      if (map.z[i] >= 0) cap.emplace_back(map.z[i], 2.0 * hp.C);
    }
    lp.add_row(std::move(cap), RowSense::LessEqual, ub - out.objective_constant - eps);
  }
  if (!options.force_row.empty()) {
    std::vector<std::pair<int, double>> pick;
    for (int k : options.force_row) {
      if (k >= 0 && k < inst.d && map.v[k] >= 0) pick.emplace_back(map.v[k], 1.0);
    }
    lp.add_row(std::move(pick), RowSense::GreaterEqual, 1.0);
  }
  return out;
}

}  // namespace

BuiltMilp build_restricted(const SvmInstance& inst, const HyperParams& hp,
                           const BigMBounds& bounds, const std::vector<int>& kernel,
                           const ZHat& zhat, const RestrictedOptions& options) {
  return build_kernel_model(inst, hp, bounds, kernel, zhat, options, /*binary_v=*/true);
}

BuiltMilp build_relaxed_v(const SvmInstance& inst, const HyperParams& hp,
                          const BigMBounds& bounds, const ZHat& zhat) {
  std::vector<int> all(inst.d);
  for (int k = 0; k < inst.d; ++k) all[k] = k;
  return build_kernel_model(inst, hp, bounds, all, zhat, {}, /*binary_v=*/false);
}

std::vector<double> solution_to_vector(const ClassifierSolution& sol, const VarMap& map,
                                       int num_vars) {
  std::vector<double> x(num_vars, 0.0);
  for (std::size_t k = 0; k < map.w_plus.size(); ++k) {
    if (map.w_plus[k] >= 0) x[map.w_plus[k]] = sol.w_plus[k];
    if (map.w_minus[k] >= 0) x[map.w_minus[k]] = sol.w_minus[k];
  }
  if (map.b >= 0) x[map.b] = sol.b;
  for (std::size_t i = 0; i < map.xi.size(); ++i) {
    if (map.xi[i] >= 0) x[map.xi[i]] = sol.xi[i];
  }
  for (std::size_t i = 0; i < map.z.size(); ++i) {
    if (map.z[i] >= 0) x[map.z[i]] = sol.z[i];
  }
  for (std::size_t k = 0; k < map.v.size(); ++k) {
    if (map.v[k] >= 0) x[map.v[k]] = sol.v[k];
  }
  return x;
}

ClassifierSolution solution_from_vector(const SvmInstance& inst, double C, const VarMap& map,
                                        const std::vector<double>& x, const ZHat* zhat) {
  ClassifierSolution sol;
  sol.w_plus.assign(inst.d, 0.0);
  sol.w_minus.assign(inst.d, 0.0);
  sol.xi.assign(inst.n, 0.0);
  sol.z.assign(inst.n, 0);
  sol.v.assign(inst.d, 0);
  for (int k = 0; k < inst.d; ++k) {
    if (map.w_plus[k] >= 0) sol.w_plus[k] = std::max(0.0, x[map.w_plus[k]]);
    if (map.w_minus[k] >= 0) sol.w_minus[k] = std::max(0.0, x[map.w_minus[k]]);
    if (!map.v.empty() && map.v[k] >= 0) sol.v[k] = x[map.v[k]] > 0.5 ? 1 : 0;
  }
  if (map.b >= 0) sol.b = x[map.b];
  for (int i = 0; i < inst.n; ++i) {
    if (map.xi[i] >= 0) sol.xi[i] = std::clamp(x[map.xi[i]], 0.0, 2.0);
    if (!map.z.empty() && map.z[i] >= 0) {
      sol.z[i] = x[map.z[i]] > 0.5 ? 1 : 0;
    } else if (zhat != nullptr) {
      sol.z[i] = zhat->codes[i] == 1 ? 1 : 0;
    }
  }
  sol.objective = evaluate_objective(inst, C, sol);
  return sol;
}

}  // namespace rampsvm::model
