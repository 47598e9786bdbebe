#include "forestore/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "forestore/log.hpp"
#include "forestore/random.hpp"
#include "forestore/serialize.hpp"
#include "forestore/upset.hpp"
#include "text.hpp"

namespace forestore {

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
void stage(TimingBreakdown& timing, const std::string& name, F&& fn) {
  const auto start = Clock::now();
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  timing.add(name, seconds_since(start));
}

double mean_confidence(const std::vector<Rule>& rules, const Dataset& train) {
  if (rules.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rules) total += evaluate_rule(r, train).confidence;
  return total / static_cast<double>(rules.size());
}

MethodReport report_for(const std::string& name, const std::vector<Rule>& rules,
                        double rule_confidence, std::span<const ClassIndex> pred,
                        const BitSet& covered, std::span<const ClassIndex> rf_pred,
                        const Dataset& test) {
  MethodReport m;
  m.method = name;
  m.total_rules = rules.size();
  m.complexity = complexity(rules, test.class_count());
  m.rule_confidence = rule_confidence;
  m.test = evaluate(pred, test.labels(), covered, test.class_count());
  m.fidelity = fidelity(pred, rf_pred, test.labels(), covered);
  return m;
}

ScoredRules concat(const ScoredRules& a, const ScoredRules& b) {
  ScoredRules out = a;
  out.rules.insert(out.rules.end(), b.rules.begin(), b.rules.end());
  out.metrics.insert(out.metrics.end(), b.metrics.begin(), b.metrics.end());
  out.covers.insert(out.covers.end(), b.covers.begin(), b.covers.end());
  return out;
}

}  // namespace

void TimingBreakdown::add(const std::string& name, double seconds) { phases.emplace_back(name, seconds); }

double TimingBreakdown::sum() const {
  double s = 0.0;
  for (const auto& [name, t] : phases) s += t;
  return s;
}

double TimingBreakdown::get(const std::string& name) const {
  for (const auto& [n, t] : phases)
    if (n == name) return t;
  return 0.0;
}

const MethodReport& SplitRun::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.method == name) return m;
  throw Error("no report for method " + name);
}

SplitRun run_split(const Dataset& train, const Dataset& test, const PipelineConfig& config,
                   std::size_t round, bool with_enrichment) {
  if (!(train.schema() == test.schema())) throw DataError("train and test schemas differ");
  const auto start = Clock::now();
  SplitRun run;
  TimingBreakdown& timing = run.timing;

  stage(timing, "train forest", [&] {
    ForestParams fp = config.forest;
    fp.seed = derive_seed(config.seed, "forest", round);
    fp.threads = config.threads;
    run.forest = train_forest(train, fp);
  });
  stage(timing, "extract rules", [&] { run.extracted = extract_rules(*run.forest); });
  stage(timing, "preselect rules", [&] {
    run.preselected = preselect(run.extracted, train, config.preselect, config.threads);
  });
  std::vector<RuleId> ids;
  stage(timing, "prepare opt. inputs", [&] {
    run.init_error = forest_error(*run.forest, train);
    for (const auto& r : run.preselected.psr.rules) ids.push_back(r.id);
  });
  stage(timing, "build opt. model", [&] {
    run.problem = build_problem(run.preselected.psr.metrics, run.preselected.coverage, run.init_error,
                                config.selection, ids);
    run.problem.t_conf = config.preselect.min_conf;
    run.problem.t_cov = config.preselect.min_class_cov;
  });
  stage(timing, "run opt. model", [&] {
    SolverOptions so = config.solver;
    so.heuristic.seed = derive_seed(config.seed, "solver", round);
    so.heuristic.threads = config.threads;
    run.solution = solve(run.problem, so);
    if (run.solution.status == SolveStatus::kInfeasible || run.solution.status == SolveStatus::kLimit)
      log_warning("rule selection ended with status " + to_string(run.solution.status) +
                  "; the best-effort selection is used");
    for (std::size_t j : run.solution.selected()) run.selected.push_back(run.preselected.psr.rules[j]);
  });
  if (with_enrichment) {
    stage(timing, "enrich", [&] {
      std::vector<RuleId> selected_ids;
      for (const auto& r : run.selected) selected_ids.push_back(r.id);
      run.enriched = enrich(concat(run.preselected.psr, run.preselected.psrs), selected_ids, train, config.enrich);
    });
  }
  stage(timing, "evaluate", [&] {
    const auto rf_pred = predict_forest(*run.forest, test);
    BitSet all(test.size());
    all.set_all();
    run.methods.push_back(report_for(kMethodRf, run.extracted, mean_confidence(run.extracted, train),
                                     rf_pred, all, rf_pred, test));

    run.psr_classifier = make_decision_set(run.preselected.psr.rules, train);
    run.methods.push_back(report_for(kMethodPre, run.psr_classifier.rules,
                                     mean_confidence(run.psr_classifier.rules, train),
                                     run.psr_classifier.predict(test), run.psr_classifier.covered(test),
                                     rf_pred, test));

    run.decision_set = make_decision_set(run.selected, train);
    const double ore_conf = mean_confidence(run.selected, train);
    run.methods.push_back(report_for(kMethodOre, run.selected, ore_conf, run.decision_set.predict(test),
                                     run.decision_set.covered(test), rf_pred, test));

    if (!run.selected.empty()) {
      run.ordered_list = build_ordered_list(run.selected, train);
      run.methods.push_back(report_for(kMethodOrdered, run.selected, ore_conf,
                                       run.ordered_list.predict(test), run.ordered_list.covered(test),
                                       rf_pred, test));
    }
  });
  timing.total = seconds_since(start);
  return run;
}

std::vector<std::pair<std::string, double>> report_metrics(const MethodReport& m) {
  std::vector<std::pair<std::string, double>> out = {
      {"total_rules", static_cast<double>(m.total_rules)},
      {"rules_per_class", m.complexity.rules_per_class},
      {"rule_length", m.complexity.atts_per_rule},
      {"rule_confidence", m.rule_confidence},
      {"coverage", m.test.coverage},
      {"accuracy", m.test.overall.accuracy},
      {"macro_precision", m.test.overall.macro_precision},
      {"macro_recall", m.test.overall.macro_recall},
      {"kappa", m.test.overall.kappa},
  };
  if (m.test.covered) {
    out.emplace_back("accuracy_covered", m.test.covered->accuracy);
    out.emplace_back("kappa_covered", m.test.covered->kappa);
  }
  static const char* groups[] = {"", "_covered", "_uncovered"};
  static const char* splits[] = {"", "_rf_correct", "_rf_wrong"};
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t c = 0; c < 3; ++c)
      if (m.fidelity.rate[g][c])
        out.emplace_back(std::string("fidelity") + (g == 0 ? "_all" : groups[g]) + splits[c],
                         *m.fidelity.rate[g][c]);
  return out;
}

namespace {

void write_ordered_csv(const SplitRun& run, const Dataset& train, std::ostream& out) {
  const auto& c = run.ordered_list;
  const Schema& schema = train.schema();
  out << "len,freq,err,condition,pred\n";
  LevelBitmaps bitmaps(train);
  BitSet remaining(train.size());
  remaining.set_all();
  for (const auto& step : c.trace) {
    const Rule& r = c.rules[step.rule];
    out << r.condition.attribute_count() << ',' << detail::fixed(step.freq, 3) << ','
        << detail::fixed(step.err, 3) << ',' << detail::csv_field(render_condition(r.condition, schema))
        << ',' << detail::csv_field(schema.class_levels[r.ypred]) << '\n';
    remaining.subtract(bitmaps.cover(r.condition));
  }
  const std::size_t left = remaining.count();
  std::size_t wrong = 0;
  remaining.for_each([&](std::size_t i) { wrong += train.label(i) != c.default_class; });
  const double freq = static_cast<double>(left) / static_cast<double>(train.size());
  const double err = left == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(left);
  out << "1," << detail::fixed(freq, 3) << ',' << detail::fixed(err, 3) << ",Else,"
      << detail::csv_field(schema.class_levels[c.default_class]) << '\n';
}

void write_with(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_artifacts(const SplitRun& run, const PipelineConfig& config, const Dataset& train,
                     const Dataset& test, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const Schema& schema = train.schema();

  write_text_file(dir / "config.ini", config_to_ini(config));
  save_csv(train, dir / "train.csv");
  save_csv(test, dir / "test.csv");
  save_forest(*run.forest, dir / "forest.json");
  save_rules(schema, run.extracted, dir / "rules_extracted.json");
  save_rules(schema, run.preselected.psr.rules, dir / "psr.json");
  save_rules(schema, run.preselected.psrs.rules, dir / "psrs.json");
  write_with(dir / "psr.csv", [&](std::ostream& out) {
    write_rule_metrics_csv(out, run.preselected.psr.rules, run.preselected.psr.metrics, schema);
  });
  write_with(dir / "psrs.csv", [&](std::ostream& out) {
    write_rule_metrics_csv(out, run.preselected.psrs.rules, run.preselected.psrs.metrics, schema);
  });
  write_with(dir / "coverage.bin", [&](std::ostream& out) { write_coverage_binary(out, run.preselected.coverage); });
  write_text_file(dir / "selection.json", solution_to_json(run.problem, run.solution));
  save_rules(schema, run.selected, dir / "selected.json");
  write_with(dir / "selected.csv", [&](std::ostream& out) {
    std::vector<RuleMetrics> metrics;
    for (const auto& r : run.selected) metrics.push_back(evaluate_rule(r, train));
    write_rule_metrics_csv(out, run.selected, metrics, schema);
  });
  save_classifier(schema, run.decision_set, dir / "model.json");
  if (!run.selected.empty()) {
    save_classifier(schema, run.ordered_list, dir / "model_ordered.json");
    write_with(dir / "ordered_list.csv", [&](std::ostream& out) { write_ordered_csv(run, train, out); });
    write_text_file(dir / "upset.json", upset_to_json(export_upset(run.selected, train), schema));
  }
  write_with(dir / "enriched.csv", [&](std::ostream& out) { write_enriched_csv(out, run.enriched, schema); });
  write_with(dir / "evaluation.csv", [&](std::ostream& out) {
    out << "method,metric,value\n";
    for (const auto& m : run.methods)
      for (const auto& [metric, value] : report_metrics(m))
        out << m.method << ',' << metric << ',' << detail::shortest(value) << '\n';
  });
}

SplitRun run_pipeline(const PipelineConfig& config, const Dataset& ds) {
  config.validate();
  const auto start = Clock::now();
  const auto split_start = Clock::now();
  auto [train_rows, test_rows] = stratified_split_indices(ds, config.cv.train_ratio, derive_seed(config.seed, "split", 0));
  const Dataset train = ds.subset(train_rows);
  const Dataset test = ds.subset(test_rows);
  const double split_seconds = seconds_since(split_start);

  SplitRun run = run_split(train, test, config, 0);
  run.timing.phases.insert(run.timing.phases.begin(), {"split", split_seconds});

  const auto write_start = Clock::now();
  try {
    write_artifacts(run, config, train, test, config.output_dir);
  } catch (const std::exception& e) {
    throw StageError("write outputs", e.what());
  }
  run.timing.add("write outputs", seconds_since(write_start));
  run.timing.total = seconds_since(start);
  write_with(config.output_dir / "timing.csv", [&](std::ostream& out) {
    out << "phase,seconds\n";
    for (const auto& [name, t] : run.timing.phases) out << name << ',' << detail::fixed(t, 6) << '\n';
    out << "total," << detail::fixed(run.timing.total, 6) << '\n';
  });
  return run;
}

}  // namespace forestore
