#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rampsvm/lp/model.hpp"

namespace rampsvm::lp {

/// Writes the program in CPLEX LP text format (objective, Subject To, Bounds,
/// Binaries, End) so external solvers can cross-check any model we build.
/// Variables are named x<id> unless names are supplied.
void write_lp_format(const LinearProgram& lp, std::ostream& out,
                     const std::vector<int>& binary_vars = {},
                     const std::vector<std::string>& var_names = {});

std::string to_lp_format(const LinearProgram& lp, const std::vector<int>& binary_vars = {},
                         const std::vector<std::string>& var_names = {});

}  // namespace rampsvm::lp
