// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "forestore/config.hpp"
#include "forestore/dataset.hpp"
#include "forestore/ensemble.hpp"
#include "forestore/log.hpp"
#include "forestore/pipeline.hpp"
#include "forestore/random.hpp"
#include "forestore/selection.hpp"
#include "oracles.hpp"

using namespace forestore;

namespace {

// Tolerances.
constexpr double kObjectiveTol = 1e-9;
constexpr double kHeuristicGap = 0.05;
constexpr std::size_t kHeuristicMinHits = 45;
constexpr double kMetricTol = 1e-12;
constexpr double kMinReduction = 0.85;
constexpr double kPsrAccuracyTol = 0.01;
constexpr double kIntersectLo = 0.70;
constexpr double kIntersectHi = 0.80;
constexpr double kFidelityMin = 0.90;
constexpr double kCoverageMin = 0.90;
constexpr std::size_t kMinFaithfulDatasets = 3;
constexpr double kConfidenceRiseMax = 0.02;
constexpr double kXorSeconds = 120.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Solutions reported optimal or feasible anywhere in this run; checked by
// criterion 6.
struct Claimed {
  SelectionProblem problem;
  BitSet selected;
};
std::vector<Claimed> claimed;

void claim(const SelectionProblem& p, const SelectionSolution& s) {
  if (s.status != SolveStatus::kOptimal && s.status != SolveStatus::kFeasible) return;
  claimed.push_back({p, s.is_selected});
}

struct XorRounds {
  std::vector<SplitRun> runs;
  double seconds = 0.0;
};

XorRounds run_xor() {
  PipelineConfig config;
  const Dataset ds = generate_xor(config.seed);
  XorRounds out;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < config.cv.splits; ++r) {
    auto [tr, te] = stratified_split_indices(ds, config.cv.train_ratio, derive_seed(config.seed, "split", r));
    out.runs.push_back(run_split(ds.subset(tr), ds.subset(te), config, r, true));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Outcome criterion1(const XorRounds& x) {
  Outcome o;
  const auto truth = oracle::xor_truth();
  std::size_t good = 0;
  for (const auto& run : x.runs) {
    claim(run.problem, run.solution);
    const Schema& schema = run.forest->schema();
    std::set<std::size_t> hit;
    bool round_ok = run.selected.size() == 4;
    for (const auto& r : run.selected) {
      bool found = false;
      for (std::size_t q = 0; q < truth.size(); ++q)
        if (oracle::matches(r, schema, truth[q])) {
          hit.insert(q);
          found = true;
        }
      round_ok = round_ok && found;
    }
    const auto& ore = run.method(kMethodOre);
    round_ok = round_ok && hit.size() == 4 && ore.test.coverage == 1.0 && ore.test.overall.accuracy == 1.0;
    if (round_ok) ++good;
  }
  o.pass = good == x.runs.size() && x.seconds < kXorSeconds;
  o.detail = std::to_string(good) + "/" + std::to_string(x.runs.size()) +
             " rounds select exactly the 4 quadrant rules with test coverage and accuracy 1.00; " +
             fmt(x.seconds, 2) + " s";
  return o;
}

Outcome criterion2(const XorRounds& x) {
  double extracted = 0.0;
  double psr = 0.0;
  double psr_accuracy = 0.0;
  for (const auto& run : x.runs) {
    extracted += static_cast<double>(run.extracted.size());
    psr += static_cast<double>(run.preselected.psr.size());
    psr_accuracy += run.method(kMethodPre).test.overall.accuracy;
  }
  const double k = static_cast<double>(x.runs.size());
  extracted /= k;
  psr /= k;
  psr_accuracy /= k;
  const double reduction = 1.0 - psr / extracted;
  Outcome o;
  o.pass = reduction >= kMinReduction && std::abs(psr_accuracy - 1.0) <= kPsrAccuracyTol;
  o.detail = "mean extracted " + fmt(extracted, 1) + ", preselected " + fmt(psr, 1) + ", reduction " +
             fmt(reduction, 3) + ", preselected-vote test accuracy " + fmt(psr_accuracy, 3);
  return o;
}

Outcome criterion3(const XorRounds& x) {
  std::size_t good = 0;
  std::size_t total = 0;
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& run : x.runs) {
    const Schema& schema = run.forest->schema();
    const auto c = schema.find_attribute("C");
    for (const auto& base : run.selected) {
      ++total;
      std::vector<std::size_t> want = base.condition.attributes();
      want.push_back(*c);
      std::sort(want.begin(), want.end());
      bool found = false;
      for (const auto& row : run.enriched) {
        if (row.base != base.id || row.rule.id == base.id) continue;
        if (row.rule.condition.attributes() != want) continue;
        if (row.metrics.confidence < 1.0 - kMetricTol) continue;
        lo = std::min(lo, row.intersect);
        hi = std::max(hi, row.intersect);
        if (row.intersect >= kIntersectLo && row.intersect <= kIntersectHi) found = true;
      }
      if (found) ++good;
    }
  }
  Outcome o;
  o.pass = total > 0 && good == total;
  o.detail = std::to_string(good) + "/" + std::to_string(total) +
             " selected rules have a confidence-1 complement adding C with intersect in [0.70, 0.80]; observed " +
             fmt(lo, 3) + ".." + fmt(hi, 3);
  return o;
}

Outcome criterion4() {
  std::size_t exact_ok = 0;
  std::size_t heur_ok = 0;
  std::size_t feasible = 0;
  constexpr std::size_t kProblems = 50;
  for (uint64_t seed = 1; seed <= kProblems; ++seed) {
    const SelectionProblem p = oracle::random_problem(seed, 12, 60);
    const auto brute = oracle::brute_force(p);
    const auto exact = solve_exact(p);
    HeuristicOptions ho;
    ho.seed = seed;
    const auto heur = solve_heuristic(p, ho);
    claim(p, exact);
    claim(p, heur);
    if (brute.feasible) {
      ++feasible;
      if (exact.status == SolveStatus::kOptimal && std::abs(exact.objective - brute.objective) <= kObjectiveTol)
        ++exact_ok;
      if (heur.status == SolveStatus::kFeasible && oracle::naive_feasible(heur.is_selected, p) &&
          heur.objective <= brute.objective * (1.0 + kHeuristicGap))
        ++heur_ok;
    } else {
      if (exact.status == SolveStatus::kInfeasible) ++exact_ok;
      if (heur.status == SolveStatus::kInfeasible) ++heur_ok;
    }
  }
  Outcome o;
  o.pass = exact_ok == kProblems && heur_ok >= kHeuristicMinHits;
  o.detail = "exact matches enumeration on " + std::to_string(exact_ok) + "/50, heuristic within 5% on " +
             std::to_string(heur_ok) + "/50 (" + std::to_string(feasible) + " feasible problems)";
  return o;
}

Outcome criterion5() {
  std::size_t violations = 0;
  constexpr uint64_t kPairs = 1000;
  for (uint64_t k = 0; k < kPairs; ++k) {
    const SelectionProblem p = oracle::random_problem(10000 + k, 12, 60);
    const BitSet sel = oracle::random_selection(p, k);
    const Indicators ind = derive_indicators(sel, p);
    const auto naive = oracle::naive_indicators(sel, p);
    const int mc = static_cast<int>(p.params.maxcover);
    for (std::size_t i = 0; i < p.n; ++i) {
      const int err = ind.is_error.test(i);
      const int cov = ind.is_covered.test(i);
      const int ovl = ind.is_overlap.test(i);
      bool ok = ind.P[i] == naive.P[i] && ind.C[i] == naive.C[i];
      ok = ok && oracle::linking_solutions(ind.P[i], ind.C[i], mc) == 1;
      ok = ok && oracle::linking_holds(ind.P[i], ind.C[i], mc, err, cov, ovl);
      ok = ok && ((err == 0) == (ind.P[i] >= 1));
      ok = ok && ((cov == 1) == (ind.C[i] >= 1));
      ok = ok && ((ovl == 1) == (ind.C[i] >= 2));
      if (!ok) ++violations;
    }
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations over 1000 problem/selection pairs";
  return o;
}

Outcome criterion6() {
  // More claims from the dispatcher on fresh problems.
  for (uint64_t seed = 500; seed < 700; ++seed) {
    const SelectionProblem p = oracle::random_problem(seed, 16, 80);
    SolverOptions so;
    so.heuristic.seed = seed;
    claim(p, solve(p, so));
    so.kind = SolverKind::kHeuristic;
    claim(p, solve(p, so));
  }
  std::size_t violations = 0;
  for (std::size_t k = 0; k < claimed.size(); ++k) {
    const SelectionProblem& p = claimed[k].problem;
    const BitSet& sel = claimed[k].selected;
    const auto naive = oracle::naive_indicators(sel, p);
    double covered = 0;
    double covered_errors = 0;
    double overlaps = 0;
    int max_c = 0;
    for (std::size_t i = 0; i < p.n; ++i) {
      covered += naive.covered[i];
      covered_errors += naive.covered[i] && naive.error[i];
      overlaps += naive.overlap[i];
      max_c = std::max(max_c, naive.C[i]);
    }
    const double n = static_cast<double>(p.n);
    const bool error_ok = covered_errors <= (p.init_error + p.params.alpha) * covered + kObjectiveTol;
    const bool coverage_ok = covered >= n * (1.0 - p.params.beta) - kObjectiveTol;
    const bool cover_ok = max_c <= static_cast<int>(p.params.maxcover);
    const bool overlap_ok = overlaps <= p.params.maxoverlap * covered + kObjectiveTol;
    if (!(error_ok && coverage_ok && cover_ok && overlap_ok) || !check_feasible(sel, p).empty()) ++violations;
  }
  Outcome o;
  o.pass = violations == 0 && !claimed.empty();
  o.detail = std::to_string(violations) + " violations among " + std::to_string(claimed.size()) +
             " solutions reported feasible";
  return o;
}

Outcome criterion7() {
  const std::vector<ConfusionMatrix> matrices = {
      {{5, 0}, {0, 5}},
      {{2, 2}, {2, 2}},
      {{3, 1}, {2, 4}},
      {{10, 0}, {10, 0}},
      {{0, 7}, {3, 0}},
      {{50, 3}, {7, 40}},
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{4, 1, 0}, {2, 3, 1}, {0, 2, 5}},
      {{6, 3, 3}, {2, 2, 2}, {4, 2, 2}},
      {{9, 0, 1}, {0, 0, 0}, {2, 0, 8}},
      {{0, 4, 0}, {0, 4, 0}, {0, 4, 0}},
      {{12, 5, 1, 0}, {3, 9, 2, 1}, {0, 1, 14, 2}, {1, 0, 3, 11}},
      {{3, 3, 3, 3}, {3, 3, 3, 3}, {3, 3, 3, 3}, {3, 3, 3, 3}},
      {{7, 0}, {1, 0}},
      {{100, 1}, {1, 1}},
      {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}},
      {{20, 10, 0, 0, 0}, {0, 15, 5, 0, 0}, {0, 0, 12, 3, 1}, {2, 0, 0, 9, 4}, {1, 1, 1, 1, 6}},
      {{8, 2}, {4, 1}},
      {{0, 5}, {5, 0}},
      {{25, 0, 0}, {0, 13, 0}, {0, 0, 2}},
  };
  std::size_t mismatches = 0;
  for (const auto& cm : matrices) {
    const auto [pred, truth] = oracle::expand(cm);
    const ConfusionMatrix rebuilt = confusion_matrix(pred, truth, cm.size());
    const ClassificationMetrics m = metrics_from_confusion(rebuilt);
    if (rebuilt != cm) ++mismatches;
    if (std::abs(m.accuracy - oracle::cm_accuracy(cm)) > kMetricTol) ++mismatches;
    if (std::abs(m.kappa - oracle::cm_kappa(cm)) > kMetricTol) ++mismatches;
    if (std::abs(m.macro_precision - oracle::cm_macro_precision(cm)) > kMetricTol) ++mismatches;
    if (std::abs(m.macro_recall - oracle::cm_macro_recall(cm)) > kMetricTol) ++mismatches;
  }
  const double perfect = metrics_from_confusion(matrices[0]).kappa;
  const double perfect3 = metrics_from_confusion(matrices[6]).kappa;
  const double chance = metrics_from_confusion(matrices[1]).kappa;
  const double chance4 = metrics_from_confusion(matrices[12]).kappa;
  Outcome o;
  o.pass = matrices.size() == 20 && mismatches == 0 && perfect == 1.0 && perfect3 == 1.0 && chance == 0.0 &&
           chance4 == 0.0;
  o.detail = std::to_string(mismatches) + " mismatches over 20 matrices; perfect kappa " + fmt(perfect, 1) +
             ", chance kappa " + fmt(chance, 1);
  return o;
}

std::vector<NamedDataset> local_datasets(const std::vector<std::string>& names) {
  std::vector<NamedDataset> out;
  for (const auto& name : names)
    out.push_back({name, load_csv(std::string(FORESTORE_DATA_DIR) + "/" + name + ".csv")});
  return out;
}

std::map<std::string, double> forest_ore_means(const std::vector<MetricSummary>& summary,
                                               const std::string& metric) {
  std::map<std::string, double> out;
  for (const auto& s : summary)
    if (s.method == kMethodOre && s.metric == metric) out[s.dataset] = s.mean;
  return out;
}

double average(const std::map<std::string, double>& values) {
  double sum = 0.0;
  for (const auto& [k, v] : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

const std::vector<std::string> kCategorical = {"titanic", "tic-tac-toe", "monk1", "monk2", "monk3"};
const std::vector<std::string> kAblation = {"iris",  "wine",  "breast_cancer", "titanic",
                                            "tic-tac-toe", "monk1", "monk2", "monk3"};

Outcome criterion8(const std::vector<MetricSummary>& summary) {
  const auto fid = forest_ore_means(summary, "fidelity_covered");
  const auto cov = forest_ore_means(summary, "coverage");
  std::size_t good = 0;
  std::string detail;
  for (const auto& name : kCategorical) {
    const double f = fid.count(name) ? fid.at(name) : 0.0;
    const double c = cov.count(name) ? cov.at(name) : 0.0;
    if (f >= kFidelityMin && c >= kCoverageMin) ++good;
    detail += name + " fid " + fmt(f, 3) + " cov " + fmt(c, 3) + "; ";
  }
  Outcome o;
  o.pass = good >= kMinFaithfulDatasets;
  o.detail = detail + std::to_string(good) + "/" + std::to_string(kCategorical.size()) + " datasets meet both";
  return o;
}

Outcome criterion9(const std::vector<MetricSummary>& base, const std::vector<NamedDataset>& data) {
  PipelineConfig no_conf;
  no_conf.selection.w0 = 0.0;
  PipelineConfig no_att;
  no_att.selection.w2 = 0.0;
  const auto s0 = run_benchmark(no_conf, data).summarize();
  const auto s2 = run_benchmark(no_att, data).summarize();
  const double conf_base = average(forest_ore_means(base, "rule_confidence"));
  const double conf_w0 = average(forest_ore_means(s0, "rule_confidence"));
  const double len_base = average(forest_ore_means(base, "rule_length"));
  const double len_w2 = average(forest_ore_means(s2, "rule_length"));
  Outcome o;
  o.pass = data.size() >= 5 && conf_w0 - conf_base <= kConfidenceRiseMax && len_w2 >= len_base;
  o.detail = std::to_string(data.size()) + " datasets; confidence default " + fmt(conf_base) + " vs w0=0 " +
             fmt(conf_w0) + "; length default " + fmt(len_base) + " vs w2=0 " + fmt(len_w2);
  return o;
}

}  // namespace

int main() {
  set_log_sink([](LogLevel, std::string_view) {});

  const XorRounds xor_rounds = run_xor();
  report(1, "XOR end-to-end", criterion1(xor_rounds));
  report(2, "preselection reduction", criterion2(xor_rounds));
  report(3, "XOR enrichment", criterion3(xor_rounds));
  report(4, "solver oracle equivalence", criterion4());
  report(5, "indicator linking properties", criterion5());
  report(6, "feasibility guards", criterion6());
  report(7, "metric oracles", criterion7());

  const auto data = local_datasets(kAblation);
  const auto base = run_benchmark(PipelineConfig{}, data).summarize();
  report(8, "desk-scale fidelity", criterion8(base));
  report(9, "ablation direction", criterion9(base, data));

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
