#include <gtest/gtest.h>

#include <algorithm>

#include <random>
#include <set>
#include <sstream>

#include "forestore/errors.hpp"
#include "forestore/forest.hpp"
#include "forestore/log.hpp"
#include "forestore/random.hpp"
#include "forestore/rules.hpp"
#include "oracles.hpp"

using namespace forestore;

namespace {

Rule worked_rule(const Schema& s) { return oracle::rule(9, s, {{"A", {"A1", "A3"}}, {"B", {"B1", "B3"}}}, "1"); }

std::vector<Rule> xor_truth_rules(const Schema& s) {
  std::vector<Rule> out;
  RuleId id = 1;
  for (const auto& q : oracle::xor_truth()) {
    out.push_back(oracle::rule(id++, s,
                               {{"A", {q.a.begin(), q.a.end()}}, {"B", {q.b.begin(), q.b.end()}}},
                               q.label));
  }
  return out;
}

Forest xor_forest(std::size_t r) {
  const Dataset ds = generate_xor(1);
  const auto [train, test] = stratified_split(ds, 0.7, derive_seed(1, "split", r));
  ForestParams params;
  params.seed = derive_seed(1, "forest", r);
  return train_forest(train, params);
}

}  // namespace

TEST(Condition, NormalizesTerms) {
  const Dataset ds = generate_xor(1);
  const Schema& s = ds.schema();
  const Condition c({Term{1, {2, 0}}, Term{0, {3, 1, 0}}, Term{0, {1, 2, 3}}, Term{2, {0, 1}}}, s);
  ASSERT_EQ(c.attribute_count(), 2u);  // C spans its whole vocabulary
  EXPECT_EQ(c.terms()[0].attribute, 0u);
  EXPECT_EQ(c.terms()[0].levels, (std::vector<LevelIndex>{1, 3}));
  EXPECT_EQ(c.terms()[1].levels, (std::vector<LevelIndex>{0, 2}));
  EXPECT_EQ(c.level_count(), 4u);
  EXPECT_EQ(c.attributes(), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(Condition({Term{0, {}}}, s), DataError);
  EXPECT_THROW(Condition({Term{9, {0}}}, s), DataError);
  EXPECT_THROW(Condition({Term{0, {7}}}, s), DataError);
  EXPECT_THROW(Condition({Term{0, {0}}, Term{0, {1}}}, s), DataError);
}

TEST(Extract, SingleLeafTreeGivesEmptyCondition) {
  const Dataset ds = generate_xor(1);
  Tree t;
  TreeNode leaf;
  leaf.class_index = 1;
  t.nodes.push_back(leaf);
  const auto rules = extract_rules(Forest(ds.schema(), {t}, {}));
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].id, 1u);
  EXPECT_EQ(rules[0].condition.attribute_count(), 0u);
  EXPECT_EQ(rules[0].ypred, 1u);
  EXPECT_DOUBLE_EQ(evaluate_rule(rules[0], ds).coverage, 1.0);
}

TEST(Extract, DepthTwoPathConjunction) {
  const Dataset ds = generate_xor(1);
  const Schema& s = ds.schema();
  const auto levels = [&](std::size_t a, std::vector<std::string> names) {
    std::vector<LevelIndex> out;
    for (const auto& name : names) {
      const auto& v = s.attributes[a].levels;
      out.push_back(static_cast<LevelIndex>(std::find(v.begin(), v.end(), name) - v.begin()));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  // root: A in {A1,A3}; left child: B in {B1,B3}
  Tree t;
  TreeNode root;
  root.attribute = 0;
  root.left_levels = levels(0, {"A1", "A3"});
  root.left = 1;
  root.right = 4;
  TreeNode inner;
  inner.attribute = 1;
  inner.left_levels = levels(1, {"B1", "B3"});
  inner.left = 2;
  inner.right = 3;
  TreeNode l1;
  l1.class_index = 1;
  TreeNode l0;
  l0.class_index = 0;
  TreeNode r;
  r.class_index = 0;
  t.nodes = {root, inner, l1, l0, r};
  const auto rules = extract_rules(Forest(s, {t}, {}));
  ASSERT_EQ(rules.size(), 3u);
  EXPECT_EQ(rules[0].condition, worked_rule(s).condition);
  EXPECT_EQ(rules[0].ypred, 1u);
  EXPECT_EQ(rules[1].condition, oracle::condition(s, {{"A", {"A1", "A3"}}, {"B", {"B2", "B4"}}}));
  EXPECT_EQ(rules[2].condition, oracle::condition(s, {{"A", {"A2", "A4"}}}));
  EXPECT_EQ(render_condition(rules[2].condition, s).substr(0, 10), "X[,1] in {");
  EXPECT_EQ(rules[2].id, 3u);
}

TEST(Extract, UnsatisfiablePathSkipped) {
  const Dataset ds = generate_xor(1);
  Tree t;
  TreeNode root;
  root.attribute = 0;
  root.left_levels = {0};
  root.left = 1;
  root.right = 4;
  TreeNode inner;  // A in {A2} under A in {A1}: empty
  inner.attribute = 0;
  inner.left_levels = {1};
  inner.left = 2;
  inner.right = 3;
  t.nodes = {root, inner, TreeNode{}, TreeNode{}, TreeNode{}};
  const auto rules = extract_rules(Forest(ds.schema(), {t}, {}));
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(render_condition(rules[0].condition, ds.schema()), "X[,1] in {A1}");
}

TEST(Extract, RulesReproduceForestVotes) {
  const Dataset ds = generate_xor(2);
  ForestParams params;
  params.n_trees = 15;
  const Forest f = train_forest(ds, params);
  const auto rules = extract_rules(f);
  for (std::size_t k = 0; k < rules.size(); ++k) EXPECT_EQ(rules[k].id, k + 1);
  const auto votes = forest_votes(f, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<uint32_t> mine(ds.class_count(), 0);
    std::size_t hits = 0;
    for (const auto& r : rules) {
      if (r.condition.covers(ds.row(i))) {
        ++hits;
        ++mine[r.ypred];
      }
    }
    EXPECT_EQ(hits, f.size());
    for (std::size_t c = 0; c < ds.class_count(); ++c) EXPECT_EQ(mine[c], votes[i * ds.class_count() + c]);
  }
}

TEST(Extract, XorForestRuleCountNear631) {
  double total = 0.0;
  for (std::size_t r = 0; r < 10; ++r) total += static_cast<double>(extract_rules(xor_forest(r)).size());
  const double mean = total / 10.0;
  EXPECT_NEAR(mean, 631.2, 0.15 * 631.2);
}

TEST(Metrics, WorkedExampleRule) {
  const Dataset ds = generate_xor(1);
  const RuleMetrics m = evaluate_rule(worked_rule(ds.schema()), ds);
  EXPECT_DOUBLE_EQ(m.confidence, 1.0);
  EXPECT_NEAR(m.coverage, 0.24, 0.02);
  EXPECT_NEAR(m.class_coverage, 0.50, 0.02);
  EXPECT_EQ(m.att_nbr, 2u);
  EXPECT_EQ(m.lev_nbr, 4u);
  EXPECT_DOUBLE_EQ(m.att_nbr_s, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.lev_nbr_s, 4.0 / 10.0);
  EXPECT_EQ(m.attributes, (std::vector<std::size_t>{0, 1}));
}

TEST(Metrics, EmptyConditionAndRatios) {
  const Dataset ds = oracle::csv("a1,a2,a3,a4,a5,a6,a7,c\nx,x,x,x,x,x,x,p\ny,y,y,y,y,y,y,q\nx,y,x,y,x,y,x,p\n");
  const Rule all{1, Condition{}, 0};
  const RuleMetrics m = evaluate_rule(all, ds);
  EXPECT_DOUBLE_EQ(m.coverage, 1.0);
  EXPECT_DOUBLE_EQ(m.confidence, 2.0 / 3.0);
  const Rule two = oracle::rule(2, ds.schema(), {{"a1", {"x"}}, {"a2", {"x"}}}, "p");
  EXPECT_NEAR(evaluate_rule(two, ds).att_nbr_s, 0.286, 5e-4);
}

TEST(Metrics, AbsentClassGivesZeroClassCoverage) {
  const Dataset full = oracle::csv("x,c\na,p\nb,q\n");
  const std::vector<std::size_t> rows{0};
  const Dataset only_p = full.subset(rows);
  int warnings = 0;
  auto previous = set_log_sink([&](LogLevel level, std::string_view) { warnings += level == LogLevel::kWarning; });
  const RuleMetrics m = evaluate_rule(Rule{1, Condition{}, 1}, only_p);
  set_log_sink(previous);
  EXPECT_DOUBLE_EQ(m.class_coverage, 0.0);
  EXPECT_EQ(warnings, 1);
}

TEST(Bitmaps, CoverMatchesNaiveScan) {
  const Dataset ds = generate_xor(3);
  const LevelBitmaps bitmaps(ds);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Term> terms;
    for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
      if (rng() % 2) continue;
      Term t{a, {}};
      for (LevelIndex l = 0; l < ds.schema().attributes[a].levels.size(); ++l)
        if (rng() % 2) t.levels.push_back(l);
      if (!t.levels.empty()) terms.push_back(t);
    }
    const Condition c(terms, ds.schema());
    const BitSet fast = bitmaps.cover(c);
    const auto slow = oracle::naive_cover(c, ds);
    for (std::size_t i = 0; i < ds.size(); ++i) ASSERT_EQ(fast.test(i), slow[i]);
  }
}

TEST(Coverage, SmallColumns) {
  const Dataset ds = oracle::csv("x,c\na,p\nb,q\na,p\n");
  const std::vector<Rule> rules{oracle::rule(1, ds.schema(), {{"x", {"a"}}}, "p"),
                                oracle::rule(2, ds.schema(), {{"x", {"a"}}}, "q")};
  const CoverageMatrices cov = build_coverage(rules, ds);
  EXPECT_EQ(cov.rows(), 3u);
  EXPECT_EQ(cov.cols(), 2u);
  EXPECT_TRUE(cov.ok(0, 0));
  EXPECT_FALSE(cov.ok(1, 0));
  EXPECT_TRUE(cov.ok(2, 0));
  EXPECT_TRUE(cov.cov_nok[0].none());
  EXPECT_TRUE(cov.cov_ok[1].none());
  EXPECT_EQ(cov.cov_nok[1].count(), 2u);

  const Dataset wide = oracle::csv("x,y,c\na,u,p\nb,v,q\n");
  const std::vector<Rule> never{Rule{1, oracle::condition(wide.schema(), {{"x", {"a"}}, {"y", {"v"}}}), 0}};
  const CoverageMatrices none = build_coverage(never, wide);
  EXPECT_TRUE(none.cov_ok[0].none());
  EXPECT_TRUE(none.cov_nok[0].none());
}

TEST(Coverage, XorTruthPartitionsInstances) {
  const Dataset ds = generate_xor(4);
  const auto rules = xor_truth_rules(ds.schema());
  const CoverageMatrices cov = build_coverage(rules, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    int ok = 0;
    int nok = 0;
    for (std::size_t j = 0; j < rules.size(); ++j) {
      ok += cov.ok(i, j);
      nok += cov.nok(i, j);
    }
    EXPECT_EQ(ok, 1);
    EXPECT_EQ(nok, 0);
  }
}

TEST(Coverage, BinaryRoundTrip) {
  const Dataset ds = generate_xor(4, 130);
  const CoverageMatrices cov = build_coverage(xor_truth_rules(ds.schema()), ds);
  std::stringstream buf;
  write_coverage_binary(buf, cov);
  EXPECT_EQ(buf.str().substr(0, 8), "FORECOV1");
  const CoverageMatrices back = read_coverage_binary(buf);
  EXPECT_EQ(back.cov_ok, cov.cov_ok);
  EXPECT_EQ(back.cov_nok, cov.cov_nok);
  std::stringstream junk("NOTCOVER");
  EXPECT_THROW(read_coverage_binary(junk), Error);
}

TEST(Jaccard, AnalyticValues) {
  BitSet a(8);
  BitSet b(8);
  for (std::size_t i : {1, 2, 3}) a.set(i);
  for (std::size_t i : {2, 3, 4}) b.set(i);
  EXPECT_DOUBLE_EQ(jaccard_similarity(a, b), 0.5);
  EXPECT_DOUBLE_EQ(jaccard_similarity(a, a), 1.0);
  BitSet c(8);
  c.set(7);
  EXPECT_DOUBLE_EQ(jaccard_similarity(a, c), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity(BitSet(8), BitSet(8)), 1.0);
}

TEST(Render, AttributesAndCsv) {
  EXPECT_EQ(render_attributes({0, 1}), "V1,V2");
  const Dataset ds = generate_xor(1);
  const std::vector<Rule> rules{worked_rule(ds.schema())};
  const std::vector<RuleMetrics> metrics{evaluate_rule(rules[0], ds)};
  std::ostringstream out;
  write_rule_metrics_csv(out, rules, metrics, ds.schema());
  std::istringstream lines(out.str());
  std::string header;
  std::string row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "id,Conf.,Cov.,Att. nbr,Lev. nbr,Att. nbr_S,Lev. nbr_S,Att.,Ypred,Condition,Class cov.");
  EXPECT_EQ(row.substr(0, 8), "9,1.000,");
  EXPECT_NE(row.find("X[,1] in {A1,A3} & X[,2] in {B1,B3}"), std::string::npos);
}
