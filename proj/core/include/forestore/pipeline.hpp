#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forestore/config.hpp"
#include "forestore/enrich.hpp"
#include "forestore/errors.hpp"
#include "forestore/ensemble.hpp"
#include "forestore/forest.hpp"
#include "forestore/preselect.hpp"
#include "forestore/selection.hpp"

namespace forestore {

// Wall-clock seconds per named phase, in execution order.
struct TimingBreakdown {
  std::vector<std::pair<std::string, double>> phases;
  double total = 0.0;  // measured end to end, not summed

  void add(const std::string& name, double seconds);
  double sum() const;
  double get(const std::string& name) const;
};

inline constexpr const char* kMethodRf = "RF";
inline constexpr const char* kMethodPre = "Pre-Forest-ORE";
inline constexpr const char* kMethodOre = "Forest-ORE";
inline constexpr const char* kMethodOrdered = "Forest-ORE+ordered";

struct MethodReport {
  std::string method;
  std::size_t total_rules = 0;
  Complexity complexity;
  double rule_confidence = 0.0;  // mean training confidence of the rules
  ClassificationReport test;
  FidelityBreakdown fidelity;
};

// Everything one train/test split produces.
struct SplitRun {
  std::optional<Forest> forest;
  double init_error = 0.0;
  std::vector<Rule> extracted;
  PreselectResult preselected;
  SelectionProblem problem;
  SelectionSolution solution;
  std::vector<Rule> selected;
  RuleClassifier psr_classifier;
  RuleClassifier decision_set;
  RuleClassifier ordered_list;
  std::vector<EnrichedRule> enriched;
  std::vector<MethodReport> methods;  // RF, Pre-Forest-ORE, Forest-ORE, Forest-ORE+ordered
  TimingBreakdown timing;

  const MethodReport& method(const std::string& name) const;
};

struct StageError : Error {
  StageError(const std::string& stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_name(stage) {}
  std::string stage_name;
};

// Seeds for round r: split derive_seed(seed, "split", r), forest
// derive_seed(seed, "forest", r), solver derive_seed(seed, "solver", r).
SplitRun run_split(const Dataset& train, const Dataset& test, const PipelineConfig& config,
                   std::size_t round, bool with_enrichment = true);

// Round-0 split of `ds`, run_split, then every artifact written under
// config.output_dir. Validates the config before any work.
SplitRun run_pipeline(const PipelineConfig& config, const Dataset& ds);

void write_artifacts(const SplitRun& run, const PipelineConfig& config, const Dataset& train,
                     const Dataset& test, const std::filesystem::path& dir);

// (metric, value) pairs of a method report; absent values are skipped.
std::vector<std::pair<std::string, double>> report_metrics(const MethodReport& m);

struct NamedDataset {
  std::string name;
  Dataset data;
};

struct MetricRow {
  std::string dataset;
  std::size_t round = 0;
  std::string method;
  std::string metric;
  double value = 0.0;
};

struct MetricSummary {
  std::string dataset;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(k); 0 when k = 1
  std::size_t count = 0;
};

struct BenchmarkReport {
  std::vector<MetricRow> rows;
  std::vector<std::string> failures;  // "dataset: message"

  std::vector<MetricSummary> summarize() const;
};

// config.cv.splits Monte Carlo rounds per dataset. A failing dataset is
// logged and recorded; the others continue. Throws ConfigError when
// `datasets` is empty.
BenchmarkReport run_benchmark(const PipelineConfig& config, const std::vector<NamedDataset>& datasets);

void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out);
std::string summary_to_json(const std::vector<MetricSummary>& summary);
void write_summary_table(const std::vector<MetricSummary>& summary, std::ostream& out);

}  // namespace forestore
