#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forestore/config.hpp"
#include "forestore/dataset.hpp"
#include "forestore/enrich.hpp"
#include "forestore/ensemble.hpp"
#include "forestore/errors.hpp"
#include "forestore/forest.hpp"
#include "forestore/pipeline.hpp"
#include "forestore/preselect.hpp"
#include "forestore/rules.hpp"
#include "forestore/selection.hpp"
#include "forestore/serialize.hpp"
#include "forestore/upset.hpp"

namespace fs = std::filesystem;
using namespace forestore;

namespace {

// Options shared by every subcommand that consumes a PipelineConfig.
struct ConfigSource {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", path, "INI configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "Override a setting, e.g. --set selection.w0=0");
  }

  PipelineConfig load() const {
    PipelineConfig config = path.empty() ? PipelineConfig{} : load_config(path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
  }
};

template <typename T>
void set_if(std::optional<T> value, T& target) {
  if (value) target = *value;
}

Dataset load_dataset(const std::string& path, const std::string& target, std::size_t bins) {
  return dataset_from_raw(load_raw_csv(path), TargetColumn{target}, bins);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

// Rules re-expressed against `ds`, which must already conform to their schema.
Dataset conformed(const Dataset& ds, const Schema& schema) {
  Dataset out = ds.conform_to(schema);
  if (out.schema().attribute_count() != schema.attribute_count())
    throw DataError("data attributes do not match the model schema");
  return out;
}

struct SelectionFlags {
  std::optional<double> w0, w1, w2, w3, maxoverlap, alpha, beta;
  std::optional<std::size_t> maxcover;

  void attach(CLI::App* app) {
    app->add_option("--w0", w0, "Confidence weight");
    app->add_option("--w1", w1, "Coverage weight");
    app->add_option("--w2", w2, "Attribute-count weight");
    app->add_option("--w3", w3, "Level-count weight");
    app->add_option("--maxcover", maxcover, "Max selected rules covering one instance");
    app->add_option("--maxoverlap", maxoverlap, "Max share of covered instances in overlaps");
    app->add_option("--alpha", alpha, "Tolerated training error above the forest's");
    app->add_option("--beta", beta, "Tolerated uncovered share");
  }

  void apply(SelectionParams& p) const {
    set_if(w0, p.w0);
    set_if(w1, p.w1);
    set_if(w2, p.w2);
    set_if(w3, p.w3);
    set_if(maxcover, p.maxcover);
    set_if(maxoverlap, p.maxoverlap);
    set_if(alpha, p.alpha);
    set_if(beta, p.beta);
  }
};

// Problem from a rule file scored on training data; init_error from the
// forest when given, else from --init-error.
SelectionProblem problem_from(const std::string& rules_path, const std::string& data_path,
                              const std::string& forest_path, std::optional<double> init_error,
                              const PipelineConfig& config) {
  RuleFile rf = load_rules(rules_path);
  const Dataset train = conformed(load_dataset(data_path, config.target, 0), rf.schema);
  double ie = 0.0;
  if (!forest_path.empty()) {
    ie = forest_error(load_forest(forest_path), train);
  } else if (init_error) {
    ie = *init_error;
  } else {
    throw ConfigError("pass --forest or --init-error to fix the forest's training error");
  }
  ScoredRules scored = score_rules(rf.rules, train, config.threads);
  std::vector<RuleId> ids;
  for (const auto& r : scored.rules) ids.push_back(r.id);
  const CoverageMatrices cov = coverage_from_covers(scored.rules, scored.covers, train);
  return build_problem(scored.metrics, cov, ie, config.selection, ids);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forest-ore: optimal rule ensembles extracted from random forests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "forest-ore 0.1.0");

  // gen-xor
  auto* gen = app.add_subcommand("gen-xor", "Write the synthetic XOR dataset");
  uint64_t xor_seed = 1;
  std::size_t xor_n = 840;
  std::string xor_out;
  gen->add_option("--seed", xor_seed, "Generator seed");
  gen->add_option("--n", xor_n, "Instance count (>= 16)");
  gen->add_option("--out", xor_out, "Output CSV")->required();

  // discretize
  auto* disc = app.add_subcommand("discretize", "Quantile-bin numeric columns of a CSV");
  std::string disc_data, disc_out, disc_target = "last";
  std::size_t disc_bins = 4;
  disc->add_option("--data", disc_data)->required()->check(CLI::ExistingFile);
  disc->add_option("--target", disc_target, "Class column name or 'last'");
  disc->add_option("--bins", disc_bins, "Bins per numeric column")->check(CLI::Range(2, 1000));
  disc->add_option("--out", disc_out)->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Train a random forest");
  ConfigSource fit_cfg;
  fit_cfg.attach(fit);
  std::string fit_data, fit_out;
  std::optional<std::size_t> fit_trees, fit_mtry, fit_min_leaf;
  std::optional<uint64_t> fit_seed;
  fit->add_option("--data", fit_data, "Training CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--n-trees", fit_trees);
  fit->add_option("--mtry", fit_mtry, "Attributes drawn per node (0: floor(sqrt(p)))");
  fit->add_option("--min-leaf", fit_min_leaf);
  fit->add_option("--seed", fit_seed);
  fit->add_option("--out", fit_out, "Forest JSON")->required();

  // extract
  auto* ext = app.add_subcommand("extract", "Extract one rule per forest leaf");
  std::string ext_forest, ext_out, ext_csv, ext_data;
  ext->add_option("--forest", ext_forest)->required()->check(CLI::ExistingFile);
  ext->add_option("--out", ext_out, "Rules JSON")->required();
  ext->add_option("--csv", ext_csv, "Also write the rule metrics table (needs --data)");
  ext->add_option("--data", ext_data, "Training CSV for --csv")->check(CLI::ExistingFile);

  // preselect
  auto* pre = app.add_subcommand("preselect", "Filter and deduplicate extracted rules");
  ConfigSource pre_cfg;
  pre_cfg.attach(pre);
  std::string pre_rules, pre_data, pre_out_dir;
  std::optional<double> pre_min_conf, pre_min_class_cov, pre_max_simil;
  std::optional<std::size_t> pre_max_len;
  pre->add_option("--rules", pre_rules, "Extracted rules JSON")->required()->check(CLI::ExistingFile);
  pre->add_option("--data", pre_data, "Training CSV")->required()->check(CLI::ExistingFile);
  pre->add_option("--min-conf", pre_min_conf);
  pre->add_option("--min-class-cov", pre_min_class_cov);
  pre->add_option("--max-len", pre_max_len);
  pre->add_option("--max-simil", pre_max_simil);
  pre->add_option("--out-dir", pre_out_dir)->required();

  // select
  auto* sel = app.add_subcommand("select", "Choose the optimal rule ensemble");
  ConfigSource sel_cfg;
  sel_cfg.attach(sel);
  SelectionFlags sel_flags;
  sel_flags.attach(sel);
  std::string sel_rules, sel_data, sel_forest, sel_out_dir, sel_solver;
  std::optional<double> sel_init_error, sel_time_limit;
  std::optional<uint64_t> sel_seed, sel_node_limit;
  std::optional<std::size_t> sel_restarts;
  sel->add_option("--rules", sel_rules, "Preselected rules JSON")->required()->check(CLI::ExistingFile);
  sel->add_option("--data", sel_data, "Training CSV")->required()->check(CLI::ExistingFile);
  sel->add_option("--forest", sel_forest, "Forest JSON, for init_error")->check(CLI::ExistingFile);
  sel->add_option("--init-error", sel_init_error, "Forest training error, instead of --forest");
  sel->add_option("--solver", sel_solver, "auto, exact, heuristic or export")
      ->check(CLI::IsMember({"auto", "exact", "heuristic", "export"}));
  sel->add_option("--seed", sel_seed);
  sel->add_option("--time-limit", sel_time_limit, "Exact solver limit in seconds");
  sel->add_option("--node-limit", sel_node_limit);
  sel->add_option("--restarts", sel_restarts);
  sel->add_option("--out-dir", sel_out_dir)->required();

  // enrich
  auto* enr = app.add_subcommand("enrich", "Find complementary rules for the selection");
  ConfigSource enr_cfg;
  enr_cfg.attach(enr);
  std::vector<std::string> enr_pool;
  std::string enr_selected, enr_data, enr_out;
  std::optional<double> enr_minconf, enr_minsup;
  enr->add_option("--pool", enr_pool, "Rule JSON files (PSR and PSRS)")->required()->check(CLI::ExistingFile);
  enr->add_option("--selected", enr_selected, "Selected rules JSON")->required()->check(CLI::ExistingFile);
  enr->add_option("--data", enr_data, "Training CSV")->required()->check(CLI::ExistingFile);
  enr->add_option("--arm-minconf", enr_minconf);
  enr->add_option("--arm-minsup", enr_minsup);
  enr->add_option("--out", enr_out, "Enriched rules CSV")->required();

  // predict
  auto* prd = app.add_subcommand("predict", "Classify a CSV with a rule model");
  std::string prd_model, prd_data, prd_out, prd_target = "last";
  prd->add_option("--model", prd_model)->required()->check(CLI::ExistingFile);
  prd->add_option("--data", prd_data)->required()->check(CLI::ExistingFile);
  prd->add_option("--target", prd_target, "Class column name or 'last'");
  prd->add_option("--out", prd_out, "Predictions CSV")->required();

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Score a rule model on labelled data");
  std::string evl_model, evl_data, evl_forest, evl_out, evl_target = "last";
  evl->add_option("--model", evl_model)->required()->check(CLI::ExistingFile);
  evl->add_option("--data", evl_data)->required()->check(CLI::ExistingFile);
  evl->add_option("--forest", evl_forest, "Forest JSON for fidelity")->check(CLI::ExistingFile);
  evl->add_option("--target", evl_target, "Class column name or 'last'");
  evl->add_option("--out", evl_out, "Report CSV (stdout when omitted)");

  // run
  auto* run = app.add_subcommand("run", "Full pipeline on one stratified split");
  ConfigSource run_cfg;
  run_cfg.attach(run);
  std::string run_data, run_out_dir;
  std::optional<uint64_t> run_xor;
  run->add_option("--data", run_data, "Dataset CSV")->check(CLI::ExistingFile);
  run->add_option("--xor", run_xor, "Use generate_xor with this seed instead of --data");
  run->add_option("--out-dir", run_out_dir);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Monte Carlo cross-validation over datasets");
  ConfigSource bench_cfg;
  bench_cfg.attach(bench);
  std::vector<std::string> bench_data;
  std::vector<uint64_t> bench_xor;
  std::string bench_out_dir;
  std::optional<std::size_t> bench_splits;
  bench->add_option("--data", bench_data, "Dataset CSVs")->check(CLI::ExistingFile);
  bench->add_option("--xor", bench_xor, "Add generate_xor datasets with these seeds");
  bench->add_option("--splits", bench_splits, "Rounds per dataset");
  bench->add_option("--out-dir", bench_out_dir)->required();

  // export-upset
  auto* ups = app.add_subcommand("export-upset", "Rule-intersection counts for UpSet plots");
  std::string ups_rules, ups_data, ups_out, ups_target = "last";
  ups->add_option("--rules", ups_rules, "Selected rules JSON")->required()->check(CLI::ExistingFile);
  ups->add_option("--data", ups_data)->required()->check(CLI::ExistingFile);
  ups->add_option("--target", ups_target, "Class column name or 'last'");
  ups->add_option("--out", ups_out)->required();

  // export-lp
  auto* lpx = app.add_subcommand("export-lp", "Write the selection model in LP format");
  ConfigSource lp_cfg;
  lp_cfg.attach(lpx);
  SelectionFlags lp_flags;
  lp_flags.attach(lpx);
  std::string lp_rules, lp_data, lp_forest, lp_out;
  std::optional<double> lp_init_error;
  lpx->add_option("--rules", lp_rules, "Preselected rules JSON")->required()->check(CLI::ExistingFile);
  lpx->add_option("--data", lp_data, "Training CSV")->required()->check(CLI::ExistingFile);
  lpx->add_option("--forest", lp_forest)->check(CLI::ExistingFile);
  lpx->add_option("--init-error", lp_init_error);
  lpx->add_option("--out", lp_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      save_csv(generate_xor(xor_seed, xor_n), xor_out);
    } else if (disc->parsed()) {
      save_csv(load_dataset(disc_data, disc_target, disc_bins), disc_out);
    } else if (fit->parsed()) {
      PipelineConfig c = fit_cfg.load();
      set_if(fit_trees, c.forest.n_trees);
      set_if(fit_mtry, c.forest.mtry);
      set_if(fit_min_leaf, c.forest.min_leaf);
      set_if(fit_seed, c.seed);
      c.validate();
      ForestParams fp = c.forest;
      fp.seed = c.seed;
      fp.threads = c.threads;
      const Dataset train = load_dataset(fit_data, c.target, 0);
      const Forest forest = train_forest(train, fp);
      save_forest(forest, fit_out);
      std::cout << "trees " << forest.size() << ", training error " << forest_error(forest, train) << '\n';
    } else if (ext->parsed()) {
      const Forest forest = load_forest(ext_forest);
      const auto rules = extract_rules(forest);
      save_rules(forest.schema(), rules, ext_out);
      if (!ext_csv.empty()) {
        if (ext_data.empty()) throw ConfigError("--csv needs --data");
        const Dataset train = conformed(load_dataset(ext_data, "last", 0), forest.schema());
        const ScoredRules scored = score_rules(rules, train);
        write_file(ext_csv, [&](std::ostream& out) {
          write_rule_metrics_csv(out, scored.rules, scored.metrics, train.schema());
        });
      }
      std::cout << rules.size() << " rules\n";
    } else if (pre->parsed()) {
      PipelineConfig c = pre_cfg.load();
      set_if(pre_min_conf, c.preselect.min_conf);
      set_if(pre_min_class_cov, c.preselect.min_class_cov);
      set_if(pre_max_len, c.preselect.max_len);
      set_if(pre_max_simil, c.preselect.max_simil);
      c.validate();
      RuleFile rf = load_rules(pre_rules);
      const Dataset train = conformed(load_dataset(pre_data, c.target, 0), rf.schema);
      const PreselectResult r = preselect(rf.rules, train, c.preselect, c.threads);
      const fs::path dir = pre_out_dir;
      fs::create_directories(dir);
      save_rules(train.schema(), r.psr.rules, dir / "psr.json");
      save_rules(train.schema(), r.psrs.rules, dir / "psrs.json");
      write_file(dir / "psr.csv", [&](std::ostream& out) {
        write_rule_metrics_csv(out, r.psr.rules, r.psr.metrics, train.schema());
      });
      write_file(dir / "psrs.csv", [&](std::ostream& out) {
        write_rule_metrics_csv(out, r.psrs.rules, r.psrs.metrics, train.schema());
      });
      write_file(dir / "coverage.bin", [&](std::ostream& out) { write_coverage_binary(out, r.coverage); });
      std::cout << r.input_count << " rules -> " << r.after_dedup << " distinct -> " << r.after_length
                << " within max_len -> " << r.after_thresholds << " above thresholds -> " << r.psr.size()
                << " preselected (" << r.psrs.size() << " similar set aside)\n";
    } else if (sel->parsed()) {
      PipelineConfig c = sel_cfg.load();
      sel_flags.apply(c.selection);
      set_if(sel_seed, c.seed);
      set_if(sel_time_limit, c.solver.time_limit);
      set_if(sel_node_limit, c.solver.node_limit);
      set_if(sel_restarts, c.solver.heuristic.restarts);
      const bool export_only = sel_solver == "export";
      if (!sel_solver.empty() && !export_only) c.solver.kind = parse_solver_kind(sel_solver);
      c.validate();
      const SelectionProblem p = problem_from(sel_rules, sel_data, sel_forest, sel_init_error, c);
      const fs::path dir = sel_out_dir;
      fs::create_directories(dir);
      if (export_only) {
        export_lp(p, dir / "model.lp");
        std::cout << "wrote " << (dir / "model.lp").string() << '\n';
        return 0;
      }
      SolverOptions so = c.solver;
      so.heuristic.seed = c.seed;
      so.heuristic.threads = c.threads;
      const SelectionSolution s = solve(p, so);
      write_text_file(dir / "selection.json", solution_to_json(p, s));
      RuleFile rf = load_rules(sel_rules);
      const Dataset train = conformed(load_dataset(sel_data, c.target, 0), rf.schema);
      std::vector<Rule> chosen;
      for (std::size_t j : s.selected()) chosen.push_back(rf.rules[j]);
      save_rules(train.schema(), chosen, dir / "selected.json");
      save_classifier(train.schema(), make_decision_set(chosen, train), dir / "model.json");
      if (!chosen.empty())
        save_classifier(train.schema(), build_ordered_list(chosen, train), dir / "model_ordered.json");
      std::cout << to_string(s.status) << ": " << chosen.size() << " rules, objective " << s.objective << '\n';
      if (s.status == SolveStatus::kInfeasible || s.status == SolveStatus::kLimit) return 2;
    } else if (enr->parsed()) {
      PipelineConfig c = enr_cfg.load();
      set_if(enr_minconf, c.enrich.arm_minconf);
      set_if(enr_minsup, c.enrich.arm_minsup);
      c.validate();
      RuleFile selected = load_rules(enr_selected);
      const Dataset train = conformed(load_dataset(enr_data, c.target, 0), selected.schema);
      std::vector<Rule> pool;
      for (const auto& path : enr_pool) {
        RuleFile rf = load_rules(path);
        if (!(rf.schema == selected.schema)) throw DataError(path + " uses a different schema");
        pool.insert(pool.end(), rf.rules.begin(), rf.rules.end());
      }
      std::vector<RuleId> ids;
      for (const auto& r : selected.rules) ids.push_back(r.id);
      const auto rows = enrich(score_rules(pool, train), ids, train, c.enrich);
      write_file(enr_out, [&](std::ostream& out) { write_enriched_csv(out, rows, train.schema()); });
    } else if (prd->parsed()) {
      const ModelFile m = load_classifier(prd_model);
      const Dataset ds = conformed(load_dataset(prd_data, prd_target, 0), m.schema);
      const auto pred = m.classifier.predict(ds);
      const BitSet covered = m.classifier.covered(ds);
      write_file(prd_out, [&](std::ostream& out) {
        out << "row,prediction,covered\n";
        for (std::size_t i = 0; i < ds.size(); ++i)
          out << i << ',' << ds.schema().class_levels[pred[i]] << ',' << covered.test(i) << '\n';
      });
    } else if (evl->parsed()) {
      const ModelFile m = load_classifier(evl_model);
      const Dataset ds = conformed(load_dataset(evl_data, evl_target, 0), m.schema);
      const auto pred = m.classifier.predict(ds);
      const BitSet covered = m.classifier.covered(ds);
      MethodReport report;
      report.method = m.classifier.mode == ClassifierMode::kOrderedList ? kMethodOrdered : kMethodOre;
      report.total_rules = m.classifier.rules.size();
      report.complexity = complexity(m.classifier.rules, ds.class_count());
      report.test = evaluate(pred, ds.labels(), covered, ds.class_count());
      if (!evl_forest.empty()) {
        const Forest forest = load_forest(evl_forest);
        const auto rf_pred = predict_forest(forest, conformed(ds, forest.schema()));
        report.fidelity = fidelity(pred, rf_pred, ds.labels(), covered);
      }
      std::ostringstream text;
      text << "metric,value\n";
      for (const auto& [metric, value] : report_metrics(report)) {
        if (metric == "rule_confidence") continue;
        text << metric << ',' << value << '\n';
      }
      if (evl_out.empty())
        std::cout << text.str();
      else
        write_text_file(evl_out, text.str());
    } else if (run->parsed()) {
      PipelineConfig c = run_cfg.load();
      if (!run_out_dir.empty()) c.output_dir = run_out_dir;
      c.validate();
      if (run_data.empty() == !run_xor) throw ConfigError("pass exactly one of --data and --xor");
      const Dataset ds = run_xor ? generate_xor(*run_xor) : load_dataset(run_data, c.target, c.bins);
      const SplitRun r = run_pipeline(c, ds);
      std::cout << "extracted " << r.extracted.size() << ", preselected " << r.preselected.psr.size()
                << ", selected " << r.selected.size() << " (" << to_string(r.solution.status) << ")\n";
      for (const auto& m : r.methods)
        std::cout << m.method << ": accuracy " << m.test.overall.accuracy << ", coverage " << m.test.coverage
                  << '\n';
      std::cout << "artifacts in " << c.output_dir.string() << '\n';
    } else if (bench->parsed()) {
      PipelineConfig c = bench_cfg.load();
      set_if(bench_splits, c.cv.splits);
      c.validate();
      std::vector<NamedDataset> datasets;
      for (uint64_t s : bench_xor) datasets.push_back({"xor-" + std::to_string(s), generate_xor(s)});
      for (const auto& path : bench_data)
        datasets.push_back({fs::path(path).stem().string(), load_dataset(path, c.target, c.bins)});
      const BenchmarkReport report = run_benchmark(c, datasets);
      const fs::path dir = bench_out_dir;
      fs::create_directories(dir);
      write_file(dir / "rounds.csv", [&](std::ostream& out) { write_benchmark_csv(report, out); });
      const auto summary = report.summarize();
      write_text_file(dir / "summary.json", summary_to_json(summary));
      write_file(dir / "summary.txt", [&](std::ostream& out) { write_summary_table(summary, out); });
      write_summary_table(summary, std::cout);
      for (const auto& f : report.failures) std::cerr << "failed: " << f << '\n';
      if (!report.failures.empty()) return 2;
    } else if (ups->parsed()) {
      RuleFile rf = load_rules(ups_rules);
      const Dataset ds = conformed(load_dataset(ups_data, ups_target, 0), rf.schema);
      write_text_file(ups_out, upset_to_json(export_upset(rf.rules, ds), ds.schema()));
    } else if (lpx->parsed()) {
      PipelineConfig c = lp_cfg.load();
      lp_flags.apply(c.selection);
      c.validate();
      export_lp(problem_from(lp_rules, lp_data, lp_forest, lp_init_error, c), lp_out);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
