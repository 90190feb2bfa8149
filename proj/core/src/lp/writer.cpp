#include "rampsvm/lp/writer.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace rampsvm::lp {

namespace {

std::string var_name(int j, const std::vector<std::string>& names) {
  if (j < static_cast<int>(names.size()) && !names[j].empty()) return names[j];
  return "x" + std::to_string(j);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [var, coeff] : terms) {
    if (coeff == 0.0) continue;
    if (first) {
      if (coeff < 0) out << "- ";
      first = false;
    } else {
      out << (coeff < 0 ? " - " : " + ");
    }
    const double mag = std::abs(coeff);
    if (mag != 1.0) out << num(mag) << " ";
    out << var_name(var, names);
  }
  if (first) out << "0 " << var_name(terms.empty() ? 0 : terms.front().first, names);
}

}  // namespace

void write_lp_format(const LinearProgram& lp, std::ostream& out,
                     const std::vector<int>& binary_vars,
                     const std::vector<std::string>& var_names) {
  out << (lp.sense == ObjSense::Maximize ? "Maximize" : "Minimize") << "\n obj: ";
  std::vector<std::pair<int, double>> obj_terms;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.objective[j] != 0.0) obj_terms.emplace_back(j, lp.objective[j]);
  }
  if (obj_terms.empty() && lp.num_vars() > 0) obj_terms.emplace_back(0, 0.0);
  write_terms(out, obj_terms, var_names);
  out << "\nSubject To\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    const auto& row = lp.rows[r];
    out << " c" << r << ": ";
    write_terms(out, row.coeffs, var_names);
    switch (row.sense) {
      case RowSense::LessEqual:
        out << " <= ";
        break;
      case RowSense::GreaterEqual:
        out << " >= ";
        break;
      case RowSense::Equal:
        out << " = ";
        break;
    }
    out << num(row.rhs) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    const std::string name = var_name(j, var_names);
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << " " << name << " free\n";
    } else if (!std::isfinite(lo)) {
      out << " -inf <= " << name << " <= " << num(hi) << "\n";
    } else if (!std::isfinite(hi)) {
      out << " " << name << " >= " << num(lo) << "\n";
    } else if (lo == hi) {
      out << " " << name << " = " << num(lo) << "\n";
    } else {
      out << " " << num(lo) << " <= " << name << " <= " << num(hi) << "\n";
    }
  }
  if (!binary_vars.empty()) {
    out << "Binaries\n";
    for (int j : binary_vars) out << " " << var_name(j, var_names);
    out << "\n";
  }
  out << "End\n";
}

std::string to_lp_format(const LinearProgram& lp, const std::vector<int>& binary_vars,
                         const std::vector<std::string>& var_names) {
  std::ostringstream os;
  write_lp_format(lp, os, binary_vars, var_names);
  return os.str();
}

}  // namespace rampsvm::lp
