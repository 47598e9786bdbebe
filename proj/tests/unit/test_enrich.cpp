#include <gtest/gtest.h>

#include <sstream>

#include "forestore/enrich.hpp"
#include "forestore/errors.hpp"
#include "oracles.hpp"

using namespace forestore;

namespace {

using Terms = std::vector<std::pair<std::string, std::vector<std::string>>>;

Rule xr(RuleId id, const Dataset& ds, const Terms& terms, const std::string& y) {
  return oracle::rule(id, ds.schema(), terms, y);
}

std::vector<Rule> xor_truth_rules(const Dataset& ds, RuleId first = 1) {
  std::vector<Rule> out;
  for (const auto& q : oracle::xor_truth())
    out.push_back(xr(first++, ds, {{"A", {q.a.begin(), q.a.end()}}, {"B", {q.b.begin(), q.b.end()}}}, q.label));
  return out;
}

}  // namespace

TEST(Transactions, RowListsCoveringRules) {
  const Dataset ds = oracle::csv("x,y,c\na,u,p\nb,v,q\n");
  const std::vector<Rule> rules{xr(1, ds, {{"x", {"a"}}}, "p"), xr(2, ds, {{"y", {"u"}}}, "p"),
                                xr(3, ds, {{"x", {"b"}}}, "q"), xr(4, ds, {}, "p")};
  const MetaTransactions t = build_transactions(rules, ds);
  EXPECT_EQ(t.rows[0], (std::vector<RuleId>{1, 2, 4}));
  EXPECT_EQ(t.rows[1], (std::vector<RuleId>{3, 4}));
}

TEST(Transactions, UncoveredInstanceIsEmpty) {
  const Dataset ds = oracle::csv("x,c\na,p\nb,q\n");
  const std::vector<Rule> rules{xr(1, ds, {{"x", {"a"}}}, "p")};
  const MetaTransactions t = build_transactions(rules, ds);
  EXPECT_TRUE(t.rows[1].empty());
  EXPECT_THROW(build_transactions(std::vector<Rule>{rules[0], rules[0]}, ds), DataError);
}

TEST(Transactions, XorTruthGivesSingletons) {
  const Dataset ds = generate_xor(1);
  const MetaTransactions t = build_transactions(xor_truth_rules(ds), ds);
  for (const auto& row : t.rows) EXPECT_EQ(row.size(), 1u);
}

TEST(Mining, ContainmentAndSupportGate) {
  std::string text = "x,y,c\n";
  for (int i = 0; i < 50; ++i) text += "a,u,p\n";
  for (int i = 0; i < 49; ++i) text += "b,v,q\n";
  text += "b,w,q\n";
  const Dataset ds = oracle::csv(text);
  const std::vector<Rule> rules{xr(1, ds, {{"x", {"a"}}}, "p"), xr(2, ds, {{"y", {"u"}}}, "p"),
                                xr(3, ds, {{"x", {"b"}}}, "q"), xr(4, ds, {{"y", {"w"}}}, "q")};
  const MetaTransactions t = build_transactions(rules, ds);
  const std::vector<RuleId> selected{1, 3};
  const auto meta = mine_metarules(t, selected, {});
  ASSERT_EQ(meta.size(), 1u);  // 4 -> 3 holds but covers 1% < 2.5%
  EXPECT_EQ(meta[0].antecedent, 2u);
  EXPECT_EQ(meta[0].consequent, 1u);
  EXPECT_DOUBLE_EQ(meta[0].confidence, 1.0);
  EXPECT_DOUBLE_EQ(meta[0].support, 0.5);
  EXPECT_DOUBLE_EQ(meta[0].intersect, 1.0);

  EnrichParams loose;
  loose.arm_minsup = 0.005;
  const auto more = mine_metarules(t, selected, loose);
  ASSERT_EQ(more.size(), 2u);
  EXPECT_EQ(more[1].antecedent, 4u);
  EXPECT_EQ(more[1].consequent, 3u);
  EXPECT_DOUBLE_EQ(more[1].intersect, 0.02);
}

TEST(Mining, XorCRuleImpliesBaseRule) {
  const Dataset ds = generate_xor(1);
  auto rules = xor_truth_rules(ds);
  rules.push_back(xr(10, ds, {{"A", {"A2", "A4"}}, {"B", {"B1", "B3"}}, {"C", {"C2"}}}, "0"));
  const MetaTransactions t = build_transactions(rules, ds);
  std::vector<RuleId> selected{1, 2, 3, 4};
  const auto meta = mine_metarules(t, selected, {});
  ASSERT_EQ(meta.size(), 1u);
  EXPECT_EQ(meta[0].antecedent, 10u);
  EXPECT_GE(meta[0].confidence, 0.98);
  for (RuleId id : selected) {
    const auto k = static_cast<std::size_t>(id - 1);
    if (t.covers[4].is_subset_of(t.covers[k])) {
      EXPECT_EQ(meta[0].consequent, id);
    }
  }
}

TEST(Complementary, XorBaseGetsCRule) {
  const Dataset ds = generate_xor(1);
  auto rules = xor_truth_rules(ds);
  rules.push_back(xr(26, ds, {{"A", {"A2", "A4"}}, {"B", {"B1", "B3"}}, {"C", {"C2"}}}, "0"));
  rules.push_back(xr(27, ds, {{"A", {"A2"}}, {"B", {"B1", "B3"}}}, "0"));  // same attributes as base
  const ScoredRules pool = score_rules(rules, ds);
  RuleId base = 0;
  for (const auto& r : rules)
    if (r.id <= 4 && r.condition == oracle::condition(ds.schema(), {{"A", {"A2", "A4"}}, {"B", {"B1", "B3"}}}))
      base = r.id;
  ASSERT_NE(base, 0u);
  const std::vector<RuleId> selected{base};
  const auto out = enrich(pool, selected, ds, {});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].rule.id, base);
  EXPECT_EQ(out[1].base, base);
  EXPECT_EQ(out[1].rule.id, 26u);
  EXPECT_EQ(out[1].metrics.attributes, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_NEAR(out[1].intersect, 0.74, 0.03);
  EXPECT_DOUBLE_EQ(out[1].arm_confidence, 1.0);
}

TEST(Complementary, HigherIntersectWinsWithinGroup) {
  const Dataset ds = oracle::csv("x,y,z,c\na,u,k,p\na,u,k,q\n");
  ScoredRules pool;
  for (RuleId id : {1u, 2u, 3u, 4u}) {
    pool.rules.push_back(Rule{id, Condition{}, 0});
    RuleMetrics m;
    m.attributes = id == 1 ? std::vector<std::size_t>{0} : id == 4 ? std::vector<std::size_t>{0} : std::vector<std::size_t>{1, 2};
    m.confidence = 1.0;
    pool.metrics.push_back(m);
    pool.covers.push_back(BitSet(2));
  }
  const std::vector<Metarule> meta{{2, 1, 0.5, 1.0, 0.7}, {3, 1, 0.5, 1.0, 0.9}, {4, 1, 0.5, 1.0, 1.0}};
  const std::vector<RuleId> selected{1};
  const auto out = select_complementary(meta, pool, selected);
  ASSERT_EQ(out.size(), 2u);  // rule 4 shares the base attribute set
  EXPECT_EQ(out[1].rule.id, 3u);
  EXPECT_DOUBLE_EQ(out[1].intersect, 0.9);
}

TEST(Complementary, CsvAndValidation) {
  const Dataset ds = generate_xor(1);
  const auto rules = xor_truth_rules(ds);
  const ScoredRules pool = score_rules(rules, ds);
  const std::vector<RuleId> selected{1};
  const auto out = enrich(pool, selected, ds, {});
  std::ostringstream csv;
  write_enriched_csv(csv, out, ds.schema());
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "ID SR,ID Rule,Condition,Ypred,Intersect,Att.,Att. nbr,Lev. nbr,Conf.,Cov.");
  EnrichParams bad;
  bad.arm_minconf = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  const std::vector<RuleId> missing{99};
  EXPECT_THROW(enrich(pool, missing, ds, {}), DataError);
}
