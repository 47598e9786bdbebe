#include "forestore/ensemble.hpp"

#include <algorithm>

#include "forestore/errors.hpp"

namespace forestore {

namespace {

ClassIndex argmax_lowest(const std::vector<std::size_t>& counts) {
  return static_cast<ClassIndex>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

ClassIndex RuleClassifier::predict(std::span<const LevelIndex> row) const {
  if (mode == ClassifierMode::kOrderedList) {
    for (std::size_t k : order)
      if (rules[k].condition.covers(row)) return rules[k].ypred;
    return default_class;
  }
  std::size_t classes = default_class + 1;
  for (const auto& r : rules) classes = std::max<std::size_t>(classes, r.ypred + 1);
  std::vector<std::size_t> votes(classes, 0);
  std::vector<std::size_t> hits;
  for (std::size_t k = 0; k < rules.size(); ++k) {
    if (!rules[k].condition.covers(row)) continue;
    ++votes[rules[k].ypred];
    hits.push_back(k);
  }
  if (hits.empty()) return default_class;
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  std::size_t best = rules.size();
  for (std::size_t k : hits) {
    if (votes[rules[k].ypred] != top) continue;
    if (best == rules.size() || confidence[k] > confidence[best] ||
        (confidence[k] == confidence[best] && rules[k].id < rules[best].id))
      best = k;
  }
  return rules[best].ypred;
}

std::vector<ClassIndex> RuleClassifier::predict(const Dataset& ds) const {
  std::vector<ClassIndex> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = predict(ds.row(i));
  return out;
}

BitSet RuleClassifier::covered(const Dataset& ds) const {
  LevelBitmaps bitmaps(ds);
  BitSet out(ds.size());
  for (const auto& r : rules) out |= bitmaps.cover(r.condition);
  return out;
}

ClassIndex default_class(std::span<const Rule> rules, const Dataset& train) {
  LevelBitmaps bitmaps(train);
  BitSet covered(train.size());
  for (const auto& r : rules) covered |= bitmaps.cover(r.condition);
  std::vector<std::size_t> residue(train.class_count(), 0);
  std::vector<std::size_t> all(train.class_count(), 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    ++all[train.label(i)];
    if (!covered.test(i)) ++residue[train.label(i)];
  }
  if (covered.count() < train.size()) return argmax_lowest(residue);
  return argmax_lowest(all);
}

RuleClassifier make_decision_set(std::vector<Rule> rules, const Dataset& train) {
  RuleClassifier c;
  c.default_class = default_class(rules, train);
  for (const auto& r : rules) c.confidence.push_back(evaluate_rule(r, train).confidence);
  c.rules = std::move(rules);
  c.mode = ClassifierMode::kDecisionSet;
  return c;
}

RuleClassifier build_ordered_list(std::vector<Rule> rules, const Dataset& train) {
  if (rules.empty()) throw DataError("ordered list needs at least one rule");
  LevelBitmaps bitmaps(train);
  std::vector<BitSet> covers;
  std::vector<BitSet> correct;
  for (const auto& r : rules) {
    covers.push_back(bitmaps.cover(r.condition));
    correct.push_back(covers.back() & bitmaps.class_bits(r.ypred));
  }
  RuleClassifier c;
  c.mode = ClassifierMode::kOrderedList;
  BitSet remaining(train.size());
  remaining.set_all();
  std::vector<char> used(rules.size(), 0);
  const double n = static_cast<double>(train.size());
  while (remaining.any()) {
    std::size_t best = rules.size();
    double best_err = 0.0;
    std::size_t best_hits = 0;
    for (std::size_t k = 0; k < rules.size(); ++k) {
      if (used[k]) continue;
      const std::size_t hits = covers[k].intersect_count(remaining);
      if (hits == 0) continue;
      const double err = 1.0 - static_cast<double>(correct[k].intersect_count(remaining)) /
                                   static_cast<double>(hits);
      bool wins = best == rules.size() || err < best_err ||
                  (err == best_err && (hits > best_hits ||
                                       (hits == best_hits && rules[k].id < rules[best].id)));
      if (wins) {
        best = k;
        best_err = err;
        best_hits = hits;
      }
    }
    if (best == rules.size()) break;
    used[best] = 1;
    c.order.push_back(best);
    c.trace.push_back({best, static_cast<double>(best_hits) / n, best_err});
    remaining.subtract(covers[best]);
  }
  std::vector<std::size_t> residue(train.class_count(), 0);
  std::vector<std::size_t> all(train.class_count(), 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    ++all[train.label(i)];
    if (remaining.test(i)) ++residue[train.label(i)];
  }
  c.default_class = remaining.any() ? argmax_lowest(residue) : argmax_lowest(all);
  for (const auto& r : rules) c.confidence.push_back(evaluate_rule(r, train).confidence);
  c.rules = std::move(rules);
  return c;
}

Complexity complexity(std::span<const Rule> rules, std::size_t n_classes) {
  if (n_classes == 0) throw DataError("complexity needs at least one class");
  Complexity c;
  c.rules_per_class = static_cast<double>(rules.size()) / static_cast<double>(n_classes);
  if (!rules.empty()) {
    std::size_t atts = 0;
    for (const auto& r : rules) atts += r.condition.attribute_count();
    c.atts_per_rule = static_cast<double>(atts) / static_cast<double>(rules.size());
  }
  return c;
}

}  // namespace forestore
