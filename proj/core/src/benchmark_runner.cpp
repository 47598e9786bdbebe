#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "forestore/log.hpp"
#include "forestore/parallel.hpp"
#include "forestore/pipeline.hpp"
#include "forestore/random.hpp"
#include "text.hpp"

namespace forestore {

std::vector<MetricSummary> BenchmarkReport::summarize() const {
  std::vector<MetricSummary> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> values;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.dataset, r.method, r.metric);
    auto [it, inserted] = values.try_emplace(key);
    if (inserted) out.push_back({r.dataset, r.method, r.metric, 0.0, 0.0, 0});
    it->second.push_back(r.value);
  }
  for (auto& s : out) {
    const auto& v = values[std::make_tuple(s.dataset, s.method, s.metric)];
    const auto k = static_cast<double>(v.size());
    s.count = v.size();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / k;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.se = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
  }
  return out;
}

BenchmarkReport run_benchmark(const PipelineConfig& config, const std::vector<NamedDataset>& datasets) {
  config.validate();
  if (datasets.empty()) throw ConfigError("benchmark needs at least one dataset");
  BenchmarkReport report;
  for (const auto& [name, ds] : datasets) {
    std::vector<std::vector<MetricRow>> per_round(config.cv.splits);
    const std::size_t outer = config.threads == 1 ? 1 : config.threads;
    PipelineConfig inner = config;
    if (outer != 1) inner.threads = 1;
    try {
      parallel_for(config.cv.splits, outer, [&](std::size_t round) {
        auto [tr, te] = stratified_split_indices(ds, config.cv.train_ratio, derive_seed(config.seed, "split", round));
        const SplitRun run = run_split(ds.subset(tr), ds.subset(te), inner, round, false);
        auto& rows = per_round[round];
        for (const auto& m : run.methods)
          for (const auto& [metric, value] : report_metrics(m)) rows.push_back({name, round, m.method, metric, value});
        rows.push_back({name, round, kMethodOre, "objective", run.solution.objective});
        rows.push_back({name, round, kMethodOre, "solver_feasible",
                        run.solution.status == SolveStatus::kOptimal || run.solution.status == SolveStatus::kFeasible ? 1.0 : 0.0});
        rows.push_back({name, round, kMethodRf, "train_error", run.init_error});
        for (const auto& [phase, t] : run.timing.phases) rows.push_back({name, round, kMethodOre, "time " + phase, t});
      });
    } catch (const std::exception& e) {
      log_warning("benchmark dataset " + name + " failed: " + e.what());
      report.failures.push_back(name + ": " + e.what());
      continue;
    }
    for (auto& rows : per_round) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "dataset,round,method,metric,value\n";
  for (const auto& r : report.rows)
    out << detail::csv_field(r.dataset) << ',' << r.round << ',' << r.method << ',' << detail::csv_field(r.metric)
        << ',' << detail::shortest(r.value) << '\n';
}

std::string summary_to_json(const std::vector<MetricSummary>& summary) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& s : summary)
    doc.push_back({{"dataset", s.dataset},
                   {"method", s.method},
                   {"metric", s.metric},
                   {"mean", s.mean},
                   {"se", s.se},
                   {"count", s.count}});
  return doc.dump(2) + "\n";
}

void write_summary_table(const std::vector<MetricSummary>& summary, std::ostream& out) {
  static const char* table_metrics[] = {"total_rules", "rules_per_class", "rule_length", "coverage",
                                        "accuracy", "macro_precision", "macro_recall", "kappa",
                                        "fidelity_all", "fidelity_covered"};
  static const char* methods[] = {kMethodRf, kMethodPre, kMethodOre, kMethodOrdered};
  std::vector<std::string> datasets;
  for (const auto& s : summary)
    if (std::find(datasets.begin(), datasets.end(), s.dataset) == datasets.end()) datasets.push_back(s.dataset);
  for (const auto& ds : datasets) {
    out << ds << "\n" << std::string(18, ' ');
    for (const char* m : methods) {
      std::string h = m;
      h.resize(22, ' ');
      out << h;
    }
    out << '\n';
    for (const char* metric : table_metrics) {
      std::string label = metric;
      label.resize(18, ' ');
      out << label;
      for (const char* m : methods) {
        std::string cell = "-";
        for (const auto& s : summary)
          if (s.dataset == ds && s.method == m && s.metric == metric)
            cell = detail::fixed(s.mean, 3) + " / " + detail::fixed(s.se, 3);
        cell.resize(22, ' ');
        out << cell;
      }
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace forestore
