#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "forestore/rules.hpp"

namespace forestore {

enum class ClassifierMode { kDecisionSet, kOrderedList };

// One step of the ordered-list greedy, measured on the training rows still
// uncovered when the rule was appended.
struct OrderedStep {
  std::size_t rule = 0;  // index into RuleClassifier::rules
  double freq = 0.0;     // newly covered rows / all training rows
  double err = 0.0;      // misclassified share of the newly covered rows
};

struct RuleClassifier {
  std::vector<Rule> rules;
  std::vector<double> confidence;  // training confidence per rule, vote tie-break
  ClassIndex default_class = 0;
  ClassifierMode mode = ClassifierMode::kDecisionSet;
  std::vector<std::size_t> order;  // ordered-list mode only
  std::vector<OrderedStep> trace;  // ordered-list mode only

  ClassIndex predict(std::span<const LevelIndex> row) const;
  std::vector<ClassIndex> predict(const Dataset& ds) const;
  // Instances matched by at least one rule.
  BitSet covered(const Dataset& ds) const;
};

// Majority class of the training rows no rule covers; the overall majority
// when every row is covered. Ties go to the lowest class index.
ClassIndex default_class(std::span<const Rule> rules, const Dataset& train);

// Unordered rule set voted by plurality; ties go to the class of the most
// confident covering rule, then the lowest rule id. Confidences are measured
// on `train`, which also fixes the default class.
RuleClassifier make_decision_set(std::vector<Rule> rules, const Dataset& train);

// Greedy ordered list: repeatedly appends the rule with the lowest error on
// the still-uncovered training rows, then the highest frequency on them, then
// the lowest id; stops when no rule covers a remaining row.
RuleClassifier build_ordered_list(std::vector<Rule> rules, const Dataset& train);

// Row = truth, column = prediction.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_matrix(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth,
                                 std::size_t classes);

struct ClassificationMetrics {
  std::size_t count = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double kappa = 0.0;
};

// Macro averages skip classes whose denominator is zero. Kappa is 1 when the
// chance agreement is 1. Throws DataError on an empty matrix.
ClassificationMetrics metrics_from_confusion(const ConfusionMatrix& cm);

struct ClassificationReport {
  ClassificationMetrics overall;
  std::optional<ClassificationMetrics> covered;  // absent when nothing is covered
  double coverage = 0.0;
};

ClassificationReport evaluate(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth,
                              const BitSet& covered, std::size_t classes);

// Agreement with the forest. Rows: all, covered, uncovered instances.
// Columns: all, forest correct, forest wrong. Empty cells are absent.
struct FidelityBreakdown {
  std::array<std::array<std::optional<double>, 3>, 3> rate;

  std::optional<double> all() const { return rate[0][0]; }
  std::optional<double> covered() const { return rate[1][0]; }
  std::optional<double> uncovered() const { return rate[2][0]; }
};

FidelityBreakdown fidelity(std::span<const ClassIndex> pred, std::span<const ClassIndex> rf_pred,
                           std::span<const ClassIndex> truth, const BitSet& covered);

struct Complexity {
  double rules_per_class = 0.0;
  double atts_per_rule = 0.0;
};

Complexity complexity(std::span<const Rule> rules, std::size_t n_classes);

}  // namespace forestore
