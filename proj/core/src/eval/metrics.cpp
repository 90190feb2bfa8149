#include "rampsvm/eval/metrics.hpp"

#include <stdexcept>

namespace rampsvm::eval {

int predict(const model::ClassifierSolution& sol, const double* x, int d) {
  double value = sol.b;
  for (int k = 0; k < d; ++k) value += sol.weight(k) * x[k];
  return value >= 0.0 ? 1 : -1;
}

int predict(const model::ClassifierSolution& sol, const std::vector<double>& x) {
  return predict(sol, x.data(), static_cast<int>(x.size()));
}

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& truth) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("prediction/truth size mismatch");
  }
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      predictions[i] == 1 ? ++m.tp : ++m.fn;
    } else {
      predictions[i] == -1 ? ++m.tn : ++m.fp;
    }
  }
  const long total = m.total();
  m.acc = total > 0 ? static_cast<double>(m.tp + m.tn) / total : 0.0;
  if (m.tp + m.fn > 0 && m.tn + m.fp > 0) {
    const double tpr = static_cast<double>(m.tp) / (m.tp + m.fn);
    const double tnr = static_cast<double>(m.tn) / (m.tn + m.fp);
    m.auc = 0.5 * (tpr + tnr);
  }
  return m;
}

}  // namespace rampsvm::eval
