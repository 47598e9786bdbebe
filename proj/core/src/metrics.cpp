#include <algorithm>

#include "forestore/ensemble.hpp"
#include "forestore/errors.hpp"

namespace forestore {

ConfusionMatrix confusion_matrix(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth,
                                 std::size_t classes) {
  if (pred.size() != truth.size()) throw DataError("prediction and truth lengths differ");
  ConfusionMatrix cm(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= classes || truth[i] >= classes) throw DataError("class index out of range");
    ++cm[truth[i]][pred[i]];
  }
  return cm;
}

ClassificationMetrics metrics_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t k = cm.size();
  std::vector<double> row(k, 0.0);
  std::vector<double> col(k, 0.0);
  double total = 0.0;
  double diag = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    if (cm[a].size() != k) throw DataError("confusion matrix is not square");
    for (std::size_t b = 0; b < k; ++b) {
      const auto v = static_cast<double>(cm[a][b]);
      row[a] += v;
      col[b] += v;
      total += v;
    }
    diag += static_cast<double>(cm[a][a]);
  }
  if (total == 0.0) throw DataError("empty confusion matrix");

  ClassificationMetrics m;
  m.count = static_cast<std::size_t>(total);
  m.accuracy = diag / total;
  double p_sum = 0.0;
  double r_sum = 0.0;
  std::size_t p_n = 0;
  std::size_t r_n = 0;
  double chance = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto hit = static_cast<double>(cm[c][c]);
    if (col[c] > 0) {
      p_sum += hit / col[c];
      ++p_n;
    }
    if (row[c] > 0) {
      r_sum += hit / row[c];
      ++r_n;
    }
    chance += (row[c] / total) * (col[c] / total);
  }
  m.macro_precision = p_n == 0 ? 0.0 : p_sum / static_cast<double>(p_n);
  m.macro_recall = r_n == 0 ? 0.0 : r_sum / static_cast<double>(r_n);
  m.kappa = chance >= 1.0 ? 1.0 : (m.accuracy - chance) / (1.0 - chance);
  return m;
}

ClassificationReport evaluate(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth,
                              const BitSet& covered, std::size_t classes) {
  if (covered.size() != pred.size()) throw DataError("covered mask length differs");
  ClassificationReport r;
  r.overall = metrics_from_confusion(confusion_matrix(pred, truth, classes));
  std::vector<ClassIndex> p;
  std::vector<ClassIndex> t;
  covered.for_each([&](std::size_t i) {
    p.push_back(pred[i]);
    t.push_back(truth[i]);
  });
  if (!p.empty()) r.covered = metrics_from_confusion(confusion_matrix(p, t, classes));
  r.coverage = pred.empty() ? 0.0 : static_cast<double>(covered.count()) / static_cast<double>(pred.size());
  return r;
}

FidelityBreakdown fidelity(std::span<const ClassIndex> pred, std::span<const ClassIndex> rf_pred,
                           std::span<const ClassIndex> truth, const BitSet& covered) {
  if (pred.size() != rf_pred.size() || pred.size() != truth.size() || covered.size() != pred.size())
    throw DataError("fidelity inputs differ in length");
  std::array<std::array<std::size_t, 3>, 3> agree{};
  std::array<std::array<std::size_t, 3>, 3> total{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t group = covered.test(i) ? 1 : 2;
    const std::size_t rf = rf_pred[i] == truth[i] ? 1 : 2;
    const std::size_t same = pred[i] == rf_pred[i];
    for (std::size_t g : {std::size_t{0}, group})
      for (std::size_t c : {std::size_t{0}, rf}) {
        ++total[g][c];
        agree[g][c] += same;
      }
  }
  FidelityBreakdown f;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t c = 0; c < 3; ++c)
      if (total[g][c] > 0)
        f.rate[g][c] = static_cast<double>(agree[g][c]) / static_cast<double>(total[g][c]);
  return f;
}

}  // namespace forestore
