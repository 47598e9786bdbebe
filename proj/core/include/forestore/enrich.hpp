#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "forestore/preselect.hpp"
#include "forestore/rules.hpp"

namespace forestore {

struct EnrichParams {
  double arm_minconf = 0.98;
  double arm_minsup = 0.025;

  void validate() const;

  friend bool operator==(const EnrichParams&, const EnrichParams&) = default;
};

// Rule-coverage transactions: rows[i] lists the ids of the rules whose
// condition holds on instance i, correct or not. covers[k] is the instance set
// of rule_ids[k].
struct MetaTransactions {
  std::size_t n = 0;
  std::vector<RuleId> rule_ids;
  std::vector<BitSet> covers;
  std::vector<std::vector<RuleId>> rows;
};

MetaTransactions build_transactions(std::span<const Rule> rules, const Dataset& ds);

// R_i -> R_j with R_j selected.
struct Metarule {
  RuleId antecedent = 0;
  RuleId consequent = 0;
  double support = 0.0;     // |R_i n R_j| / n
  double confidence = 0.0;  // |R_i n R_j| / |R_i|
  double intersect = 0.0;   // |R_i n R_j| / |R_j|
};

// Pairwise metarules into each selected rule meeting both thresholds, sorted
// by consequent then antecedent.
std::vector<Metarule> mine_metarules(const MetaTransactions& t, std::span<const RuleId> selected,
                                     const EnrichParams& params);

struct EnrichedRule {
  RuleId base = 0;  // the selected rule this row complements
  Rule rule;        // the base rule itself on the first row of each block
  RuleMetrics metrics;
  double intersect = 1.0;
  double arm_confidence = 1.0;
};

// For each selected rule, in the given order: its own row, then one
// complementary rule per antecedent attribute set (antecedents sharing the
// base rule's attribute set are dropped), chosen by higher intersect, higher
// rule confidence, higher coverage, fewer attributes, lower id. Complementary
// rows are ordered by attribute set.
std::vector<EnrichedRule> select_complementary(const std::vector<Metarule>& meta,
                                               const ScoredRules& pool,
                                               std::span<const RuleId> selected);

// Convenience: transactions over `pool`, mining, selection.
std::vector<EnrichedRule> enrich(const ScoredRules& pool, std::span<const RuleId> selected,
                                 const Dataset& ds, const EnrichParams& params);

// Columns: ID SR, ID Rule, Condition, Ypred, Intersect, Att., Att. nbr,
// Lev. nbr, Conf., Cov.
void write_enriched_csv(std::ostream& out, std::span<const EnrichedRule> rows,
                        const Schema& schema);

}  // namespace forestore
