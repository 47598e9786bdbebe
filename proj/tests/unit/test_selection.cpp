#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "forestore/errors.hpp"
#include "forestore/selection.hpp"
#include "oracles.hpp"

using namespace forestore;

namespace {

// Columns given as strings over {'+', '-', '.'}: correct cover, wrong cover, none.
SelectionProblem toy(const std::vector<std::string>& columns, double init_error,
                     SelectionParams params = {}) {
  const std::size_t n = columns.front().size();
  CoverageMatrices cov;
  std::vector<RuleMetrics> metrics;
  for (const auto& col : columns) {
    BitSet ok(n);
    BitSet nok(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (col[i] == '+') ok.set(i);
      if (col[i] == '-') nok.set(i);
    }
    RuleMetrics m;
    const double covered = static_cast<double>(ok.count() + nok.count());
    m.coverage = covered / static_cast<double>(n);
    m.confidence = covered > 0 ? static_cast<double>(ok.count()) / covered : 0.0;
    m.att_nbr_s = 0.5;
    m.lev_nbr_s = 0.5;
    cov.cov_ok.push_back(ok);
    cov.cov_nok.push_back(nok);
    metrics.push_back(m);
  }
  return build_problem(metrics, cov, init_error, params);
}

BitSet pick(std::size_t m, std::initializer_list<std::size_t> js) {
  BitSet b(m);
  for (std::size_t j : js) b.set(j);
  return b;
}

bool has(const std::vector<Violation>& v, const std::string& name) {
  for (const auto& x : v)
    if (x.constraint == name) return true;
  return false;
}

// Minimal CPLEX LP reader: objective, constraints, binaries.
struct LinearRow {
  std::string name;
  std::map<std::string, double> coef;
  std::string sense;
  double rhs = 0.0;
};

struct LpModel {
  LinearRow objective;
  std::vector<LinearRow> rows;
  std::vector<std::string> binaries;
};

LinearRow parse_row(const std::string& text) {
  static const std::regex head(R"(^\s*([A-Za-z_][A-Za-z0-9_]*):(.*)$)");
  std::smatch m;
  if (!std::regex_match(text, m, head)) throw std::runtime_error("bad row: " + text);
  LinearRow row;
  row.name = m[1];
  std::istringstream in(m[2].str());
  std::string tok;
  double sign = 1.0;
  double coef = 1.0;
  bool have_coef = false;
  while (in >> tok) {
    if (tok == "+" || tok == "-") {
      sign = tok == "-" ? -1.0 : 1.0;
    } else if (tok == "<=" || tok == ">=" || tok == "=") {
      row.sense = tok;
      std::string rhs;
      if (!(in >> rhs)) throw std::runtime_error("missing rhs: " + text);
      row.rhs = std::stod(rhs);
      if (in >> rhs) throw std::runtime_error("trailing tokens: " + text);
    } else if (std::regex_match(tok, std::regex(R"([0-9]+(\.[0-9]*)?([eE][-+]?[0-9]+)?)"))) {
      if (have_coef) throw std::runtime_error("two coefficients: " + text);
      coef = std::stod(tok);
      have_coef = true;
    } else if (std::regex_match(tok, std::regex(R"([A-Za-z_][A-Za-z0-9_]*)"))) {
      row.coef[tok] += sign * coef;
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    } else {
      throw std::runtime_error("bad token '" + tok + "' in " + text);
    }
  }
  if (have_coef) throw std::runtime_error("dangling coefficient: " + text);
  return row;
}

LpModel parse_lp(const std::string& text) {
  LpModel model;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::string pending;
  bool saw_end = false;
  auto flush = [&] {
    if (pending.empty()) return;
    LinearRow r = parse_row(pending);
    if (section == "Minimize") {
      if (!r.sense.empty()) throw std::runtime_error("objective with a sense");
      model.objective = r;
    } else {
      if (r.sense.empty()) throw std::runtime_error("constraint without sense: " + r.name);
      model.rows.push_back(r);
    }
    pending.clear();
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '\\') continue;
    if (line == "Minimize" || line == "Subject To" || line == "Binaries" || line == "End") {
      flush();
      if (saw_end) throw std::runtime_error("content after End");
      section = line;
      saw_end = line == "End";
      continue;
    }
    if (section.empty() || saw_end) throw std::runtime_error("text outside a section: " + line);
    if (section == "Binaries") {
      std::istringstream names(line);
      std::string v;
      while (names >> v) model.binaries.push_back(v);
      continue;
    }
    if (line.rfind("   ", 0) == 0) {
      if (pending.empty()) throw std::runtime_error("continuation without row");
      pending += " " + line;
    } else {
      flush();
      pending = line;
    }
  }
  flush();
  if (!saw_end) throw std::runtime_error("missing End");
  return model;
}

std::map<std::string, double> assignment(const SelectionProblem& p, const BitSet& selected) {
  const Indicators ind = derive_indicators(selected, p);
  std::map<std::string, double> v;
  for (std::size_t j = 0; j < p.m; ++j) v["sel_" + std::to_string(j)] = selected.test(j);
  for (std::size_t i = 0; i < p.n; ++i) {
    v["cov_" + std::to_string(i)] = ind.is_covered.test(i);
    v["err_" + std::to_string(i)] = ind.is_error.test(i);
    v["ovl_" + std::to_string(i)] = ind.is_overlap.test(i);
  }
  return v;
}

bool row_holds(const LinearRow& r, const std::map<std::string, double>& v) {
  double lhs = 0.0;
  for (const auto& [name, c] : r.coef) lhs += c * v.at(name);
  if (r.sense == "<=") return lhs <= r.rhs + 1e-9;
  if (r.sense == ">=") return lhs >= r.rhs - 1e-9;
  return std::abs(lhs - r.rhs) <= 1e-9;
}

}  // namespace

TEST(BuildProblem, ShapeDefaultsAndGuards) {
  const SelectionProblem p = toy({"++...", "..++-", "+-+-+"}, 0.1);
  EXPECT_EQ(p.m, 3u);
  EXPECT_EQ(p.n, 5u);
  EXPECT_EQ(p.rule_ids, (std::vector<RuleId>{1, 2, 3}));
  EXPECT_EQ(p.ok_rows[1], (std::vector<uint32_t>{2, 3}));
  EXPECT_EQ(p.nok_rows[1], (std::vector<uint32_t>{4}));

  const SelectionParams d;
  EXPECT_EQ(d.w0, 1.0);
  EXPECT_EQ(d.w1, 1.0);
  EXPECT_EQ(d.w2, 0.1);
  EXPECT_EQ(d.w3, 0.05);
  EXPECT_EQ(d.maxcover, 3u);

  CoverageMatrices bad = p.cov;
  bad.cov_ok[0] = BitSet(4);
  std::vector<RuleMetrics> metrics(3);
  EXPECT_THROW(build_problem(metrics, bad, 0.1, {}), DataError);
  metrics.resize(2);
  EXPECT_THROW(build_problem(metrics, p.cov, 0.1, {}), DataError);
  SelectionParams neg;
  neg.w2 = -1;
  metrics.resize(3);
  EXPECT_THROW(build_problem(metrics, p.cov, 0.1, neg), ConfigError);
}

TEST(Objective, DirectSubstitution) {
  const SelectionProblem p = toy({"+++++", "++..."}, 0.0);
  EXPECT_DOUBLE_EQ(objective(BitSet(2), p), 0.0);
  EXPECT_DOUBLE_EQ(objective(pick(2, {0}), p), 1.075);
  EXPECT_DOUBLE_EQ(p.rule_cost(1), 1.0 + 0.0 + 0.6 + 0.05 + 0.025);
  EXPECT_DOUBLE_EQ(objective(pick(2, {0, 1}), p), 1.075 + 1.675);
}

TEST(Objective, XorOptimumTermByTerm) {
  const Dataset ds = generate_xor(1);
  std::vector<Rule> rules;
  RuleId id = 1;
  for (const auto& q : oracle::xor_truth())
    rules.push_back(oracle::rule(id++, ds.schema(),
                                 {{"A", {q.a.begin(), q.a.end()}}, {"B", {q.b.begin(), q.b.end()}}}, q.label));
  std::vector<RuleMetrics> metrics;
  for (const auto& r : rules) metrics.push_back(evaluate_rule(r, ds));
  const SelectionProblem p = build_problem(metrics, build_coverage(rules, ds), 0.10, {});
  BitSet all(4);
  all.set_all();
  double expect = 0.0;
  for (const auto& m : metrics) {
    EXPECT_DOUBLE_EQ(m.confidence, 1.0);
    expect += 1.0 + 1.0 * (1.0 - 1.0) + 1.0 * (1.0 - m.coverage) + 0.1 * (2.0 / 3.0) + 0.05 * (4.0 / 10.0);
  }
  EXPECT_NEAR(objective(all, p), expect, 1e-12);
  EXPECT_NEAR(objective(all, p), 4.0 + 3.0 + 0.8 / 3.0 + 0.08, 1e-12);
  EXPECT_TRUE(check_feasible(all, p).empty());
}

TEST(Indicators, WorkedCases) {
  // instance 0: one correct rule; 1: correct + wrong; 2: uncovered
  const SelectionProblem p = toy({"++.", ".-."}, 0.0);
  const Indicators ind = derive_indicators(pick(2, {0, 1}), p);
  EXPECT_EQ(ind.P, (std::vector<int32_t>{1, 0, 0}));
  EXPECT_EQ(ind.C, (std::vector<int32_t>{1, 2, 0}));
  EXPECT_TRUE(ind.is_covered.test(0));
  EXPECT_FALSE(ind.is_error.test(0));
  EXPECT_FALSE(ind.is_overlap.test(0));
  EXPECT_TRUE(ind.is_error.test(1));
  EXPECT_TRUE(ind.is_overlap.test(1));
  EXPECT_FALSE(ind.is_covered.test(2));
  EXPECT_TRUE(ind.is_error.test(2));
  EXPECT_FALSE(ind.is_overlap.test(2));
}

TEST(Indicators, MatchNaiveAndLinkingOnRandomProblems) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const SelectionProblem p = oracle::random_problem(seed);
    const BitSet s = oracle::random_selection(p, seed + 1);
    const Indicators ind = derive_indicators(s, p);
    const auto naive = oracle::naive_indicators(s, p);
    for (std::size_t i = 0; i < p.n; ++i) {
      ASSERT_EQ(ind.P[i], naive.P[i]);
      ASSERT_EQ(ind.C[i], naive.C[i]);
      ASSERT_EQ(oracle::linking_solutions(ind.P[i], ind.C[i], static_cast<int>(p.params.maxcover)), 1);
      ASSERT_TRUE(oracle::linking_holds(ind.P[i], ind.C[i], static_cast<int>(p.params.maxcover),
                                        ind.is_error.test(i), ind.is_covered.test(i), ind.is_overlap.test(i)));
    }
    EXPECT_EQ(check_feasible(s, p).empty(), oracle::naive_feasible(s, p));
    EXPECT_NEAR(objective(s, p), oracle::naive_objective(s, p), 1e-12);
  }
}

TEST(Feasibility, XorTruthWithInitErrorTenPercent) {
  const Dataset ds = generate_xor(2);
  std::vector<Rule> rules;
  RuleId id = 1;
  for (const auto& q : oracle::xor_truth())
    rules.push_back(oracle::rule(id++, ds.schema(),
                                 {{"A", {q.a.begin(), q.a.end()}}, {"B", {q.b.begin(), q.b.end()}}}, q.label));
  std::vector<RuleMetrics> metrics;
  for (const auto& r : rules) metrics.push_back(evaluate_rule(r, ds));
  const SelectionProblem p = build_problem(metrics, build_coverage(rules, ds), 0.10, {});
  BitSet all(4);
  all.set_all();
  EXPECT_TRUE(check_feasible(all, p).empty());
}

TEST(Feasibility, EmptySelectionViolatesCoverage) {
  const SelectionProblem p = toy({"+++++"}, 0.0);
  const auto v = check_feasible(BitSet(1), p);
  ASSERT_TRUE(has(v, "coverage"));
  for (const auto& x : v) EXPECT_LT(x.slack, 0.0);
}

TEST(Feasibility, MaxcoverExceeded) {
  SelectionParams params;
  params.maxcover = 2;
  params.maxoverlap = 1.0;
  const SelectionProblem p = toy({"++++", "+...", "+..."}, 0.0, params);
  EXPECT_TRUE(has(check_feasible(pick(3, {0, 1, 2}), p), "maxcover"));
  EXPECT_FALSE(has(check_feasible(pick(3, {0, 1}), p), "maxcover"));
}

TEST(Feasibility, ErrorAndOverlapBudgets) {
  const SelectionProblem p = toy({"+-++", "+++."}, 0.0);
  EXPECT_TRUE(has(check_feasible(pick(2, {0}), p), "error"));
  EXPECT_TRUE(has(check_feasible(pick(2, {0, 1}), p), "overlap"));
}

TEST(LpExport, ToyStructure) {
  const SelectionProblem p = toy({"+-.", ".++"}, 0.05);
  std::ostringstream out;
  write_lp(p, out);
  const LpModel lp = parse_lp(out.str());
  EXPECT_EQ(lp.binaries.size(), 2u + 3u * 3u);
  EXPECT_EQ(std::set<std::string>(lp.binaries.begin(), lp.binaries.end()).size(), lp.binaries.size());
  std::set<std::string> families;
  for (const auto& r : lp.rows) {
    const std::string fam = r.name.substr(0, r.name.find('_'));
    families.insert(fam == "min" || fam == "max" ? r.name : fam);
  }
  for (const char* f : {"maxcover", "error", "cover", "min_cover", "overlap", "max_overlap"})
    EXPECT_TRUE(families.count(f)) << f;
  EXPECT_NEAR(lp.objective.coef.at("sel_0"), p.rule_cost(0), 1e-12);
}

TEST(LpExport, AgreesWithCheckFeasibleOnRandomSelections) {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const SelectionProblem p = oracle::random_problem(seed, 8, 25);
    std::ostringstream out;
    write_lp(p, out);
    const LpModel lp = parse_lp(out.str());
    std::set<std::string> declared(lp.binaries.begin(), lp.binaries.end());
    for (const auto& r : lp.rows)
      for (const auto& [name, c] : r.coef) ASSERT_TRUE(declared.count(name)) << name;
    for (uint64_t k = 0; k < 5; ++k) {
      const BitSet s = oracle::random_selection(p, seed * 31 + k);
      const auto v = assignment(p, s);
      bool all_rows = true;
      for (const auto& r : lp.rows) all_rows = all_rows && row_holds(r, v);
      EXPECT_EQ(all_rows, check_feasible(s, p).empty()) << "seed " << seed << " k " << k;
      double obj = 0.0;
      for (const auto& [name, c] : lp.objective.coef) obj += c * v.at(name);
      EXPECT_NEAR(obj, objective(s, p), 1e-9);
    }
  }
}

TEST(LpExport, XorProblemParses) {
  const Dataset ds = generate_xor(3);
  std::vector<Rule> rules;
  RuleId id = 1;
  for (const auto& q : oracle::xor_truth())
    rules.push_back(oracle::rule(id++, ds.schema(),
                                 {{"A", {q.a.begin(), q.a.end()}}, {"B", {q.b.begin(), q.b.end()}}}, q.label));
  std::vector<RuleMetrics> metrics;
  for (const auto& r : rules) metrics.push_back(evaluate_rule(r, ds));
  const SelectionProblem p = build_problem(metrics, build_coverage(rules, ds), 0.1, {});
  std::ostringstream out;
  write_lp(p, out);
  LpModel lp;
  ASSERT_NO_THROW(lp = parse_lp(out.str()));
  EXPECT_EQ(lp.binaries.size(), 4u + 3u * ds.size());
  BitSet all(4);
  all.set_all();
  const auto v = assignment(p, all);
  for (const auto& r : lp.rows) EXPECT_TRUE(row_holds(r, v)) << r.name;
}
