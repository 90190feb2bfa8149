#include "rampsvm/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "rampsvm/lp/simplex.hpp"
#include "rampsvm/model/formulations.hpp"

namespace rampsvm::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding whitespace.
    const auto begin = cell.find_first_not_of(" \t\r");
    const auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && std::isfinite(out);
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options, const std::string& name) {
  std::vector<std::string> lines;
  {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.empty()) throw ParseError("empty file", 0, 0);

  bool header = false;
  if (options.has_header.has_value()) {
    header = *options.has_header;
  } else {
    double ignored;
    for (const auto& cell : split_line(lines.front())) {
      if (!parse_number(cell, ignored)) {
        header = true;
        break;
      }
    }
  }

  const int first_data = header ? 1 : 0;
  if (first_data >= static_cast<int>(lines.size())) throw ParseError("no data rows", 1, 0);

  const auto first_cells = split_line(lines[first_data]);
  const int columns = static_cast<int>(first_cells.size());
  if (columns < 2) throw ParseError("need at least one feature and a label", first_data + 1, 0);
  const int label_col = options.label_column < 0 ? columns - 1 : options.label_column;
  if (label_col >= columns) throw ParseError("label column out of range", first_data + 1, label_col);

  Dataset ds;
  ds.provenance = name;
  ds.instance.d = columns - 1;
  if (header) {
    const auto names = split_line(lines.front());
    for (int c = 0; c < columns; ++c) {
      if (c != label_col && c < static_cast<int>(names.size())) {
        ds.feature_names.push_back(names[c]);
      }
    }
  }

  for (int r = first_data; r < static_cast<int>(lines.size()); ++r) {
    const auto cells = split_line(lines[r]);
    if (static_cast<int>(cells.size()) != columns) {
      throw ParseError("inconsistent column count", r + 1, static_cast<int>(cells.size()));
    }
    for (int c = 0; c < columns; ++c) {
      double value;
      if (!parse_number(cells[c], value)) {
        throw ParseError("non-numeric cell '" + cells[c] + "'", r + 1, c + 1);
      }
      if (c == label_col) {
        int label;
        if (value == 1.0) {
          label = 1;
        } else if (value == -1.0 || value == 0.0) {
          label = -1;
        } else {
          throw ParseError("label must be -1/+1 or 0/1", r + 1, c + 1);
        }
        ds.instance.y.push_back(label);
      } else {
        ds.instance.x.push_back(value);
      }
    }
  }
  ds.instance.n = static_cast<int>(ds.instance.y.size());

  bool pos = false, neg = false;
  for (int label : ds.instance.y) (label == 1 ? pos : neg) = true;
  if (!pos || !neg) throw LabelError("dataset contains a single class");
  ds.instance.validate();
  return ds;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options, path);
}

ScalingParams fit_scaling(const Dataset& train) {
  const auto& inst = train.instance;
  ScalingParams params;
  params.offset.assign(inst.d, 0.0);
  params.range.assign(inst.d, 0.0);
  for (int k = 0; k < inst.d; ++k) {
    double lo = inst.at(0, k), hi = inst.at(0, k);
    for (int i = 1; i < inst.n; ++i) {
      lo = std::min(lo, inst.at(i, k));
      hi = std::max(hi, inst.at(i, k));
    }
    params.offset[k] = lo;
    params.range[k] = hi - lo;
  }
  return params;
}

Dataset apply_scaling(const Dataset& ds, const ScalingParams& params) {
  Dataset out = ds;
  auto& inst = out.instance;
  for (int i = 0; i < inst.n; ++i) {
    for (int k = 0; k < inst.d; ++k) {
      const double range = params.range[k];
      inst.at(i, k) = range > 0.0 ? (inst.at(i, k) - params.offset[k]) / range : 0.0;
    }
  }
  return out;
}

FoldPlan stratified_folds(const Dataset& ds, std::uint64_t seed, int fold_count) {
  if (fold_count < 2) throw std::invalid_argument("need at least two folds");
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.assign(fold_count, {});
  std::mt19937_64 rng(seed);
  for (int cls : {1, -1}) {
    std::vector<int> members;
    for (int i = 0; i < ds.n(); ++i) {
      if (ds.instance.y[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      plan.folds[pos % fold_count].push_back(members[pos]);
    }
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

Dataset subset(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.provenance = ds.provenance;
  out.instance.d = ds.d();
  out.instance.n = static_cast<int>(rows.size());
  out.instance.x.reserve(rows.size() * ds.d());
  for (int i : rows) {
    for (int k = 0; k < ds.d(); ++k) out.instance.x.push_back(ds.instance.at(i, k));
    out.instance.y.push_back(ds.instance.y[i]);
  }
  return out;
}

Dataset inject_label_noise(const Dataset& train, double fraction, std::uint64_t seed) {
  Dataset out = train;
  const int n = train.n();
  const int flips = static_cast<int>(std::ceil(fraction * n));
  if (flips <= 0) return out;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (int r = 0; r < std::min(flips, n); ++r) {
    out.instance.y[order[r]] = -out.instance.y[order[r]];
  }
  return out;
}

Dataset inject_svm_outliers(const Dataset& train, double fraction, double C, std::uint64_t seed) {
  Dataset out = train;
  if (fraction <= 0.0) return out;
  (void)seed;  // deterministic given the data; kept for interface symmetry

  auto built = model::build_svm_l1(train.instance, C);
  lp::SimplexSolver solver;
  lp::LpSolution sol = solver.solve(built.lp);
  if (!sol.optimal()) throw std::runtime_error("classic margin LP did not solve");

  const auto& inst = train.instance;
  std::vector<double> margin(inst.n, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    double dot = sol.primal[built.map.b];
    for (int k = 0; k < inst.d; ++k) {
      if (built.map.w[k] >= 0) dot += sol.primal[built.map.w[k]] * inst.at(i, k);
    }
    margin[i] = inst.y[i] * dot;
  }
  for (int cls : {1, -1}) {
    std::vector<int> members;
    for (int i = 0; i < inst.n; ++i) {
      if (inst.y[i] == cls) members.push_back(i);
    }
    std::stable_sort(members.begin(), members.end(),
                     [&](int a, int b) { return margin[a] > margin[b]; });
    const int flips = static_cast<int>(std::ceil(fraction * members.size()));
    for (int r = 0; r < std::min<int>(flips, members.size()); ++r) {
      out.instance.y[members[r]] = -cls;
    }
  }
  return out;
}

int round_half_up(double value) { return static_cast<int>(std::floor(value + 0.5)); }

std::vector<int> budget_grid_values(int b_max) {
  if (b_max < 1) throw std::invalid_argument("largest budget must be at least 1");
  const double b = b_max;
  std::vector<int> grid = {b_max, round_half_up(2.0 / 3.0 * b), round_half_up(0.5 * b),
                           round_half_up(1.0 / 3.0 * b), round_half_up(0.2 * b)};
  for (int& v : grid) v = std::max(1, v);
  std::vector<int> out;
  for (int v : grid) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<int> budget_grid(const Dataset& ds, const std::vector<double>& c_grid,
                             std::uint64_t seed, const BudgetFitter& fitter) {
  const int samples = 10;
  int b_max = 1;
  std::mt19937_64 rng(seed);
  for (double C : c_grid) {
    double total_selected = 0.0;
    for (int s = 0; s < samples; ++s) {
      std::vector<int> rows;
      for (int cls : {1, -1}) {
        std::vector<int> members;
        for (int i = 0; i < ds.n(); ++i) {
          if (ds.instance.y[i] == cls) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        const int take = round_half_up(0.9 * members.size());
        for (int r = 0; r < std::min<int>(take, members.size()); ++r) rows.push_back(members[r]);
      }
      std::sort(rows.begin(), rows.end());
      Dataset sample = subset(ds, rows);
      model::HyperParams hp{C, ds.d()};
      const auto fit = fitter(sample.instance, hp);
      total_selected += fit.selected_count();
    }
    b_max = std::max(b_max, round_half_up(total_selected / samples));
  }
  return budget_grid_values(b_max);
}

}  // namespace rampsvm::data
