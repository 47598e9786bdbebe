#pragma once

#include <vector>

#include "forestore/rules.hpp"

namespace forestore {

struct PreselectParams {
  double min_conf = 0.51;
  double min_class_cov = 0.025;
  std::size_t max_len = 6;
  double max_simil = 0.95;

  // Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const PreselectParams&, const PreselectParams&) = default;
};

// Rules together with their metrics and cover sets on one dataset; index k of
// every vector refers to the same rule.
struct ScoredRules {
  std::vector<Rule> rules;
  std::vector<RuleMetrics> metrics;
  std::vector<BitSet> covers;

  std::size_t size() const { return rules.size(); }
};

ScoredRules score_rules(std::vector<Rule> rules, const Dataset& ds, std::size_t threads = 1);

struct PreselectResult {
  ScoredRules psr;
  CoverageMatrices coverage;  // of psr on the training data
  // Rules dropped by the similarity step only; metarule mining draws on them.
  ScoredRules psrs;

  std::size_t input_count = 0;
  std::size_t after_dedup = 0;
  std::size_t after_length = 0;
  std::size_t after_thresholds = 0;
};

// Collapses rules with identical normalized condition and prediction,
// keeping the lowest id. Output is sorted by id.
std::vector<Rule> remove_redundant(std::vector<Rule> rules);

// Duplicate removal, length filter, confidence and class-coverage thresholds,
// then similarity grouping: rules are visited by ascending id and each
// still-present rule forms a group with every other still-present rule whose
// Jaccard similarity to it is >= max_simil. The group keeps one member chosen
// by higher confidence, higher coverage, fewer attributes, fewer levels,
// lower id; the others move to PSRS. Throws EmptyPreselectionError when no
// rule survives.
PreselectResult preselect(std::vector<Rule> rules, const Dataset& train,
                          const PreselectParams& params, std::size_t threads = 1);

}  // namespace forestore
