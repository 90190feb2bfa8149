#include "rampsvm/lp/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rampsvm::lp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void LinearProgram::validate() const {
  const int n = num_vars();
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n) {
    throw std::invalid_argument("bound vectors do not match variable count");
  }
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw std::invalid_argument("variable " + std::to_string(j) + " has invalid bounds");
    }
  }
  std::vector<int> seen(n, -1);
  for (int r = 0; r < num_rows(); ++r) {
    for (const auto& [var, coeff] : rows[r].coeffs) {
      if (var < 0 || var >= n) {
        throw std::invalid_argument("row " + std::to_string(r) + " references undeclared variable");
      }
      if (std::isnan(coeff) || std::isinf(coeff)) {
        throw std::invalid_argument("row " + std::to_string(r) + " has a non-finite coefficient");
      }
      if (seen[var] == r) {
        throw std::invalid_argument("row " + std::to_string(r) + " repeats variable " +
                                    std::to_string(var));
      }
      seen[var] = r;
    }
    if (std::isnan(rows[r].rhs) || std::isinf(rows[r].rhs)) {
      throw std::invalid_argument("row " + std::to_string(r) + " has a non-finite rhs");
    }
  }
  for (int j = 0; j < n; ++j) {
    if (std::isnan(objective[j]) || std::isinf(objective[j])) {
      throw std::invalid_argument("objective coefficient " + std::to_string(j) + " is non-finite");
    }
  }
}

namespace {

struct Entry {
  int row;
  double value;
};

// Product-form update: basis column at `pos` was replaced, `w` is the ftran
// of the entering column against the basis before the swap.
struct Eta {
  int pos;
  VectorXd w;
};

}  // namespace

class SimplexSolver::Impl {
public:
  Impl(const LinearProgram& lp, const SimplexOptions& options, util::Stopwatch* sw)
      : opts_(options), sw_(sw) {
    load(lp);
  }

  LpSolution run(const Basis* warm) {
    if (early_infeasible_) {
      return make_solution(LpStatus::Infeasible);
    }
    init_basis(warm);
    LpStatus st = primal_loop(/*phase1=*/true);
    if (st == LpStatus::Infeasible) return make_solution(st);
    st = primal_loop(/*phase1=*/false);
    return make_solution(st);
  }

private:
  // ---- problem in computational form: min cost.x, A x + s = b ----
  SimplexOptions opts_;
  util::Stopwatch* sw_;
  int n_ = 0;      // structural variables
  int m_ = 0;      // rows kept after dropping empty ones
  int ncols_ = 0;  // n_ + m_
  double obj_sign_ = 1.0;  // -1 when the original problem maximizes
  std::vector<double> cost_, lb_, ub_;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> rhs_;
  std::vector<int> kept_row_;  // internal row -> original row index
  int orig_rows_ = 0;
  bool early_infeasible_ = false;
  double total_nnz_ = 0;

  // ---- mutable simplex state ----
  std::vector<VarStatus> status_;
  std::vector<int> basic_;          // column occupying each basis position
  std::vector<int> basis_pos_;      // column -> position, -1 if nonbasic
  std::vector<double> xb_;          // value of each basic column
  Eigen::PartialPivLU<MatrixXd> lu_;
  std::vector<Eta> etas_;
  long iters_ = 0;
  long max_iters_ = 0;
  long stall_count_ = 0;
  bool bland_ = false;

  void work(double units) {
    if (sw_ != nullptr) sw_->add_work(units);
  }

  void load(const LinearProgram& lp) {
    n_ = lp.num_vars();
    orig_rows_ = lp.num_rows();
    obj_sign_ = lp.sense == ObjSense::Maximize ? -1.0 : 1.0;

    std::vector<int> keep;
    keep.reserve(orig_rows_);
    for (int r = 0; r < orig_rows_; ++r) {
      const auto& row = lp.rows[r];
      if (row.coeffs.empty()) {
        // 0 (sense) rhs must already hold, otherwise the LP is infeasible.
        const double v = row.rhs;
        const bool ok = (row.sense == RowSense::LessEqual && 0.0 <= v + opts_.feas_tol) ||
                        (row.sense == RowSense::GreaterEqual && 0.0 >= v - opts_.feas_tol) ||
                        (row.sense == RowSense::Equal && std::abs(v) <= opts_.feas_tol);
        if (!ok) early_infeasible_ = true;
        continue;
      }
      keep.push_back(r);
    }
    m_ = static_cast<int>(keep.size());
    ncols_ = n_ + m_;
    kept_row_ = keep;

    cost_.assign(ncols_, 0.0);
    lb_.assign(ncols_, 0.0);
    ub_.assign(ncols_, 0.0);
    cols_.assign(ncols_, {});
    rhs_.assign(m_, 0.0);

    for (int j = 0; j < n_; ++j) {
      cost_[j] = obj_sign_ * lp.objective[j];
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows[kept_row_[i]];
      rhs_[i] = row.rhs;
      for (const auto& [var, coeff] : row.coeffs) {
        cols_[var].push_back(Entry{i, coeff});
        total_nnz_ += 1;
      }
      const int sj = n_ + i;
      cols_[sj].push_back(Entry{i, 1.0});
      switch (row.sense) {
        case RowSense::LessEqual:
          lb_[sj] = 0.0;
          ub_[sj] = kInf;
          break;
        case RowSense::GreaterEqual:
          lb_[sj] = -kInf;
          ub_[sj] = 0.0;
          break;
        case RowSense::Equal:
          lb_[sj] = 0.0;
          ub_[sj] = 0.0;
          break;
      }
    }
    max_iters_ = opts_.max_iterations > 0 ? opts_.max_iterations
                                          : 50L * (static_cast<long>(m_) + ncols_);
  }

  VarStatus default_status(int j) const {
    if (std::isfinite(lb_[j])) return VarStatus::AtLower;
    if (std::isfinite(ub_[j])) return VarStatus::AtUpper;
    return VarStatus::FreeNonbasic;
  }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case VarStatus::AtLower:
        return lb_[j];
      case VarStatus::AtUpper:
        return ub_[j];
      default:
        return 0.0;
    }
  }

  void init_basis(const Basis* warm) {
    status_.assign(ncols_, VarStatus::AtLower);
    basic_.assign(m_, -1);
    basis_pos_.assign(ncols_, -1);

    bool warm_ok = false;
    if (warm != nullptr && static_cast<int>(warm->status.size()) == ncols_) {
      int count = 0;
      for (int j = 0; j < ncols_; ++j) {
        if (warm->status[j] == VarStatus::Basic) ++count;
      }
      if (count == m_) {
        int pos = 0;
        for (int j = 0; j < ncols_; ++j) {
          if (warm->status[j] == VarStatus::Basic) {
            status_[j] = VarStatus::Basic;
            basic_[pos] = j;
            basis_pos_[j] = pos;
            ++pos;
          } else {
            status_[j] = repair_status(j, warm->status[j]);
          }
        }
        warm_ok = refactorize(/*allow_fail=*/true);
        if (!warm_ok) {
          basic_.assign(m_, -1);
          basis_pos_.assign(ncols_, -1);
        }
      }
    }
    if (!warm_ok) {
      for (int j = 0; j < n_; ++j) status_[j] = default_status(j);
      for (int i = 0; i < m_; ++i) {
        const int sj = n_ + i;
        status_[sj] = VarStatus::Basic;
        basic_[i] = sj;
        basis_pos_[sj] = i;
      }
      if (!refactorize(/*allow_fail=*/false)) {
        throw NumericalFailure("slack basis factorization failed");
      }
    }
    recompute_basic_values();
  }

  VarStatus repair_status(int j, VarStatus s) const {
    if (s == VarStatus::AtLower && std::isfinite(lb_[j])) return VarStatus::AtLower;
    if (s == VarStatus::AtUpper && std::isfinite(ub_[j])) return VarStatus::AtUpper;
    if (s == VarStatus::FreeNonbasic && !std::isfinite(lb_[j]) && !std::isfinite(ub_[j])) {
      return VarStatus::FreeNonbasic;
    }
    return default_status(j);
  }

  bool refactorize(bool allow_fail) {
    etas_.clear();
    if (m_ == 0) return true;
    MatrixXd b = MatrixXd::Zero(m_, m_);
    for (int pos = 0; pos < m_; ++pos) {
      for (const Entry& e : cols_[basic_[pos]]) b(e.row, pos) = e.value;
    }
    lu_.compute(b);
    work(2.0 / 3.0 * m_ * m_ * m_);
    const VectorXd diag = lu_.matrixLU().diagonal().cwiseAbs();
    const double dmax = std::max(1.0, diag.maxCoeff());
    if (diag.minCoeff() <= 1e-13 * dmax) {
      if (allow_fail) return false;
      throw NumericalFailure("singular basis");
    }
    return true;
  }

  void recompute_basic_values() {
    VectorXd r = VectorXd::Zero(std::max(m_, 1));
    for (int i = 0; i < m_; ++i) r(i) = rhs_[i];
    for (int j = 0; j < ncols_; ++j) {
      if (status_[j] == VarStatus::Basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const Entry& e : cols_[j]) r(e.row) -= e.value * v;
    }
    VectorXd x = ftran(r);
    xb_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) xb_[i] = x(i);
  }

  VectorXd ftran(const VectorXd& v) {
    if (m_ == 0) return v;
    VectorXd u = lu_.solve(v);
    for (const Eta& e : etas_) {
      const double piv = u(e.pos) / e.w(e.pos);
      if (piv != 0.0) {
        u.noalias() -= piv * e.w;
        u(e.pos) = piv;
      } else {
        u(e.pos) = 0.0;
      }
    }
    work(2.0 * m_ * m_ + 2.0 * m_ * static_cast<double>(etas_.size()));
    return u;
  }

  VectorXd btran(const VectorXd& v) {
    if (m_ == 0) return v;
    VectorXd z = v;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const double dot = z.dot(it->w) - z(it->pos) * it->w(it->pos);
      z(it->pos) = (z(it->pos) - dot) / it->w(it->pos);
    }
    VectorXd y = lu_.transpose().solve(z);
    work(2.0 * m_ * m_ + 2.0 * m_ * static_cast<double>(etas_.size()));
    return y;
  }

  VectorXd dense_column(int j) const {
    VectorXd a = VectorXd::Zero(std::max(m_, 1));
    for (const Entry& e : cols_[j]) a(e.row) = e.value;
    return a;
  }

  double infeasibility(int pos) const {
    const int j = basic_[pos];
    if (xb_[pos] < lb_[j] - opts_.feas_tol) return lb_[j] - xb_[pos];
    if (xb_[pos] > ub_[j] + opts_.feas_tol) return xb_[pos] - ub_[j];
    return 0.0;
  }

  // One primal phase. Phase 1 minimizes total bound violation of the basic
  // variables (composite objective, no artificials); phase 2 minimizes cost.
  LpStatus primal_loop(bool phase1) {
    VectorXd cb = VectorXd::Zero(std::max(m_, 1));
    while (true) {
      if (++iters_ > max_iters_) {
        throw NumericalFailure("simplex iteration cap exhausted");
      }
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) infeas = std::max(infeas, infeasibility(i));
      if (phase1 && infeas <= opts_.feas_tol) return LpStatus::Optimal;
      if (!phase1 && infeas > 10.0 * opts_.feas_tol) {
        // Drifted out of feasibility; rebuild and fall back to phase 1.
        refactorize(false);
        recompute_basic_values();
        const LpStatus st = primal_loop(true);
        if (st != LpStatus::Optimal) return st;
        continue;
      }

      // Pricing duals: composite signs in phase 1, real costs in phase 2.
      for (int i = 0; i < m_; ++i) {
        if (phase1) {
          const int j = basic_[i];
          if (xb_[i] > ub_[j] + opts_.feas_tol) {
            cb(i) = 1.0;
          } else if (xb_[i] < lb_[j] - opts_.feas_tol) {
            cb(i) = -1.0;
          } else {
            cb(i) = 0.0;
          }
        } else {
          cb(i) = cost_[basic_[i]];
        }
      }
      VectorXd y = btran(cb);

      int enter = -1;
      int dir = 0;
      double best = opts_.opt_tol;
      work(total_nnz_ + ncols_);
      for (int j = 0; j < ncols_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        if (ub_[j] - lb_[j] <= opts_.zero_tol && status_[j] != VarStatus::FreeNonbasic) {
          continue;  // fixed variable, cannot move
        }
        double d = phase1 ? 0.0 : cost_[j];
        for (const Entry& e : cols_[j]) d -= y(e.row) * e.value;
        int cand_dir = 0;
        if (status_[j] == VarStatus::AtLower && d < -best) {
          cand_dir = 1;
        } else if (status_[j] == VarStatus::AtUpper && d > best) {
          cand_dir = -1;
        } else if (status_[j] == VarStatus::FreeNonbasic && std::abs(d) > best) {
          cand_dir = d < 0 ? 1 : -1;
        }
        if (cand_dir != 0) {
          if (bland_) {
            enter = j;
            dir = cand_dir;
            break;
          }
          best = std::abs(d);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) {
        if (phase1) return LpStatus::Infeasible;
        return LpStatus::Optimal;
      }

      VectorXd w = ftran(dense_column(enter));

      // Ratio test: step until the first basic variable hits the bound it is
      // moving toward (its violated bound when it starts infeasible), or the
      // entering variable reaches its opposite bound.
      const double range = ub_[enter] - lb_[enter];
      double t_max = std::isfinite(range) ? range : kInf;
      int leave_pos = -1;
      double leave_pivot = 0.0;
      int leave_bound = 0;  // -1 lower, +1 upper
      for (int i = 0; i < m_; ++i) {
        const double wi = w(i);
        if (std::abs(wi) <= opts_.pivot_tol) continue;
        const int j = basic_[i];
        const double delta = -dir * wi;  // movement of x_B[i] per unit step
        double bound, t;
        int which;
        if (xb_[i] > ub_[j] + opts_.feas_tol) {
          if (delta >= 0) continue;  // moving further out, no breakpoint
          bound = ub_[j];
          which = +1;
        } else if (xb_[i] < lb_[j] - opts_.feas_tol) {
          if (delta <= 0) continue;
          bound = lb_[j];
          which = -1;
        } else if (delta > 0) {
          if (!std::isfinite(ub_[j])) continue;
          bound = ub_[j];
          which = +1;
        } else {
          if (!std::isfinite(lb_[j])) continue;
          bound = lb_[j];
          which = -1;
        }
        t = (bound - xb_[i]) / delta;
        if (t < 0.0) t = 0.0;
        // Ties go to the largest pivot for stability; under Bland's rule the
        // lowest variable index wins instead, keeping the anti-cycling
        // argument intact.
        const bool tie_better =
            leave_pos < 0 || (bland_ ? j < basic_[leave_pos]
                                     : std::abs(wi) > std::abs(leave_pivot) + opts_.zero_tol);
        if (t < t_max - opts_.zero_tol || (t < t_max + opts_.zero_tol && tie_better)) {
          t_max = t;
          leave_pos = i;
          leave_pivot = wi;
          leave_bound = which;
        }
      }

      if (!std::isfinite(t_max)) {
        if (!etas_.empty()) {
          // Re-verify against a fresh factorization before giving up.
          refactorize(false);
          recompute_basic_values();
          continue;
        }
        if (phase1) throw NumericalFailure("phase-1 ray with positive infeasibility");
        return LpStatus::Unbounded;
      }

      const double step = t_max;
      const double improvement = phase1 ? step : std::abs(step);
      if (improvement <= opts_.zero_tol) {
        if (++stall_count_ > opts_.bland_trigger) bland_ = true;
      } else {
        stall_count_ = 0;
      }

      // Apply the step.
      const double enter_from = nonbasic_value(enter);
      for (int i = 0; i < m_; ++i) xb_[i] -= dir * step * w(i);
      work(static_cast<double>(m_));

      if (leave_pos < 0) {
        // Bound flip, basis unchanged.
        status_[enter] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        continue;
      }

      const int leave = basic_[leave_pos];
      status_[leave] = leave_bound > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      basis_pos_[leave] = -1;
      status_[enter] = VarStatus::Basic;
      basic_[leave_pos] = enter;
      basis_pos_[enter] = leave_pos;
      xb_[leave_pos] = enter_from + dir * step;

      etas_.push_back(Eta{leave_pos, w});
      if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) {
        refactorize(false);
        recompute_basic_values();
      }
    }
  }

  LpSolution make_solution(LpStatus st) {
    LpSolution sol;
    sol.status = st;
    sol.iterations = iters_;
    sol.primal.assign(n_, 0.0);
    sol.reduced_cost.assign(n_, 0.0);
    sol.row_dual.assign(orig_rows_, 0.0);
    if (st != LpStatus::Optimal) {
      sol.objective = std::numeric_limits<double>::quiet_NaN();
      return sol;
    }

    for (int j = 0; j < n_; ++j) {
      sol.primal[j] = status_[j] == VarStatus::Basic ? xb_[basis_pos_[j]] : nonbasic_value(j);
    }
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += obj_sign_ * cost_[j] * sol.primal[j];
    sol.objective = obj;

    VectorXd cb = VectorXd::Zero(std::max(m_, 1));
    for (int i = 0; i < m_; ++i) cb(i) = cost_[basic_[i]];
    VectorXd y = btran(cb);
    for (int j = 0; j < n_; ++j) {
      double d = cost_[j];
      for (const Entry& e : cols_[j]) d -= y(e.row) * e.value;
      sol.reduced_cost[j] = obj_sign_ * d;
    }
    for (int i = 0; i < m_; ++i) sol.row_dual[kept_row_[i]] = obj_sign_ * y(i);

    sol.basis.status = status_;
    return sol;
  }
};

LpSolution SimplexSolver::solve(const LinearProgram& lp) {
  lp.validate();
  Impl impl(lp, options_, stopwatch_);
  return impl.run(nullptr);
}

LpSolution SimplexSolver::solve(const LinearProgram& lp, const Basis& warm) {
  lp.validate();
  Impl impl(lp, options_, stopwatch_);
  return impl.run(warm.empty() ? nullptr : &warm);
}

LpSolution SimplexSolver::solve_with_fixed(const LinearProgram& lp,
                                           const std::vector<std::pair<int, double>>& fixes) {
  LinearProgram fixed = lp;
  for (const auto& [var, value] : fixes) {
    if (var < 0 || var >= fixed.num_vars()) {
      throw std::invalid_argument("fix references undeclared variable");
    }
    double v = value;
    if (v < fixed.lower[var] - 1e-9 || v > fixed.upper[var] + 1e-9) {
      throw std::invalid_argument("fixed value outside variable bounds");
    }
    v = std::clamp(v, fixed.lower[var], fixed.upper[var]);
    fixed.lower[var] = v;
    fixed.upper[var] = v;
  }
  return solve(fixed);
}

}  // namespace rampsvm::lp
