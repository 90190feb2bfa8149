#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rampsvm::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ObjSense : std::uint8_t { Minimize, Maximize };
enum class RowSense : std::uint8_t { LessEqual, GreaterEqual, Equal };

/// Thrown when pivoting safeguards are exhausted or the basis goes singular.
class NumericalFailure : public std::runtime_error {
public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Sparse LP with per-variable bounds. Variables are dense ids 0..num_vars()-1;
/// rows are stored as (variable, coefficient) lists.
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
  };

  ObjSense sense = ObjSense::Minimize;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_variable(double lb, double ub, double obj_coeff = 0.0) {
    objective.push_back(obj_coeff);
    lower.push_back(lb);
    upper.push_back(ub);
    return num_vars() - 1;
  }

  int add_row(std::vector<std::pair<int, double>> coeffs, RowSense s, double rhs) {
    rows.push_back(Row{std::move(coeffs), s, rhs});
    return num_rows() - 1;
  }

  /// Checks the structural invariants: declared bounds for every referenced
  /// variable, lb <= ub, no duplicate variable within a row.
  void validate() const;
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

/// Nonbasic/basic classification per column, saved across solves for warm
/// starts. Columns past num_vars() are the internal row slacks.
enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeNonbasic };

struct Basis {
  std::vector<VarStatus> status;  // structural columns then one slack per row
  bool empty() const { return status.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;        // per variable
  std::vector<double> reduced_cost;  // per variable, in the original sense
  std::vector<double> row_dual;      // per row, in the original sense
  Basis basis;
  long iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

}  // namespace rampsvm::lp
