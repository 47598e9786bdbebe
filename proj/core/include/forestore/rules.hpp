#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "forestore/bitset.hpp"
#include "forestore/dataset.hpp"
#include "forestore/forest.hpp"

namespace forestore {

// attribute in {levels}; levels sorted and non-empty.
struct Term {
  std::size_t attribute = 0;
  std::vector<LevelIndex> levels;

  friend auto operator<=>(const Term&, const Term&) = default;
};

// Conjunction of membership terms, sorted by attribute, at most one term per
// attribute. An empty condition covers every instance.
class Condition {
 public:
  Condition() = default;
  // Normalizes: sorts terms and levels, merges repeated attributes by
  // intersection, drops terms spanning the whole vocabulary. Throws DataError
  // when a term is empty or references an unknown attribute/level.
  Condition(std::vector<Term> terms, const Schema& schema);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t attribute_count() const { return terms_.size(); }
  std::size_t level_count() const;
  std::vector<std::size_t> attributes() const;

  bool covers(std::span<const LevelIndex> row) const;

  friend auto operator<=>(const Condition&, const Condition&) = default;

 private:
  std::vector<Term> terms_;
};

using RuleId = uint32_t;

struct Rule {
  RuleId id = 0;
  Condition condition;
  ClassIndex ypred = 0;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleMetrics {
  double confidence = 0.0;
  double coverage = 0.0;
  double class_coverage = 0.0;
  std::size_t att_nbr = 0;
  std::size_t lev_nbr = 0;
  double att_nbr_s = 0.0;  // att_nbr / #attributes
  double lev_nbr_s = 0.0;  // lev_nbr / total vocabulary size
  std::vector<std::size_t> attributes;
  std::size_t cover_count = 0;
  std::size_t correct_count = 0;
};

// Instance bitmaps per (attribute, level), so a rule's cover set is an AND
// over terms of ORs over levels.
class LevelBitmaps {
 public:
  explicit LevelBitmaps(const Dataset& ds);

  std::size_t size() const { return n_; }
  BitSet cover(const Condition& condition) const;
  const BitSet& class_bits(ClassIndex c) const { return class_bits_[c]; }

 private:
  std::size_t n_;
  std::vector<std::vector<BitSet>> levels_;
  std::vector<BitSet> class_bits_;
};

// One rule per leaf of every tree, ids assigned 1, 2, ... in tree order then
// depth-first leaf order. The condition is the intersection of the edge
// conditions from root to leaf; paths whose intersection empties a level set
// cannot be satisfied and are skipped.
std::vector<Rule> extract_rules(const Forest& forest);

RuleMetrics evaluate_rule(const Rule& rule, const Dataset& ds);
// Same, from a precomputed cover set.
RuleMetrics metrics_from_cover(const Rule& rule, const BitSet& cover, const Dataset& ds);

// CovOk / CovNok stored column-wise: one bit column per rule.
struct CoverageMatrices {
  std::vector<BitSet> cov_ok;
  std::vector<BitSet> cov_nok;

  std::size_t rows() const { return cov_ok.empty() ? 0 : cov_ok.front().size(); }
  std::size_t cols() const { return cov_ok.size(); }
  bool ok(std::size_t i, std::size_t j) const { return cov_ok[j].test(i); }
  bool nok(std::size_t i, std::size_t j) const { return cov_nok[j].test(i); }
  BitSet cover(std::size_t j) const { return cov_ok[j] | cov_nok[j]; }
};

CoverageMatrices build_coverage(std::span<const Rule> rules, const Dataset& ds);
CoverageMatrices coverage_from_covers(std::span<const Rule> rules, std::span<const BitSet> covers,
                                      const Dataset& ds);

// |A n B| / |A u B|, 1 when both are empty.
double jaccard_similarity(const BitSet& a, const BitSet& b);

// "X[,1] in {A1,A3} & X[,2] in {B1,B3}", attribute positions 1-based.
std::string render_condition(const Condition& condition, const Schema& schema);
// "V1,V2"
std::string render_attributes(const std::vector<std::size_t>& attributes);

// RuleMetrics table: id, Conf., Cov., Att. nbr, Lev. nbr, Att. nbr_S,
// Lev. nbr_S, Att., Ypred, Condition. A Class cov. column follows when
// `with_class_coverage` is set.
void write_rule_metrics_csv(std::ostream& out, std::span<const Rule> rules,
                            std::span<const RuleMetrics> metrics, const Schema& schema,
                            bool with_class_coverage = true);

// Binary sidecar: "FORECOV1", u64 rows, u64 cols, then cols packed CovOk
// columns followed by cols packed CovNok columns, little-endian 64-bit words.
void write_coverage_binary(std::ostream& out, const CoverageMatrices& cov);
CoverageMatrices read_coverage_binary(std::istream& in);

}  // namespace forestore
