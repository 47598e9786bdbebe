#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "forestore/bitset.hpp"
#include "forestore/rules.hpp"

namespace forestore {

struct SelectionParams {
  double w0 = 1.0;   // confidence weight
  double w1 = 1.0;   // coverage weight
  double w2 = 0.1;   // attribute-count weight
  double w3 = 0.05;  // level-count weight
  std::size_t maxcover = 3;
  double maxoverlap = 0.5;
  double alpha = 0.01;
  double beta = 0.025;

  void validate() const;

  friend bool operator==(const SelectionParams&, const SelectionParams&) = default;
};

// Rule-selection MIP instance. Per-rule data is indexed 0..m-1; `rule_ids`
// maps back to the rule set it was built from.
struct SelectionProblem {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<RuleId> rule_ids;
  std::vector<double> confidence;
  std::vector<double> coverage;
  std::vector<double> att_ratio;
  std::vector<double> levels_ratio;
  CoverageMatrices cov;
  double init_error = 0.0;
  SelectionParams params;
  // Preselection floors carried along for reporting.
  double t_conf = 0.0;
  double t_cov = 0.0;

  // Sparse views of the matrix columns: instances rule j covers correctly /
  // incorrectly, ascending.
  std::vector<std::vector<uint32_t>> ok_rows;
  std::vector<std::vector<uint32_t>> nok_rows;

  // 1 + w0 (1 - conf) + w1 (1 - cov) + w2 att_ratio + w3 levels_ratio
  double rule_cost(std::size_t j) const;
};

// Throws DataError on shape mismatch and ConfigError on bad parameters.
SelectionProblem build_problem(std::span<const RuleMetrics> metrics, const CoverageMatrices& cov,
                               double init_error, const SelectionParams& params,
                               std::span<const RuleId> rule_ids = {});

double objective(const BitSet& selected, const SelectionProblem& p);

struct Indicators {
  std::vector<int32_t> P;  // sum of selected (ok - nok)
  std::vector<int32_t> C;  // sum of selected (ok + nok)
  BitSet is_covered;       // C >= 1
  BitSet is_error;         // P <= 0
  BitSet is_overlap;       // C >= 2
};

Indicators derive_indicators(const BitSet& selected, const SelectionProblem& p);

struct Violation {
  std::string constraint;  // "maxcover", "error", "coverage" or "overlap"
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs, negative when violated
};

// Empty when every constraint holds.
std::vector<Violation> check_feasible(const BitSet& selected, const SelectionProblem& p);

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kLimit };
std::string to_string(SolveStatus status);

struct SolveStats {
  uint64_t nodes = 0;
  uint64_t iterations = 0;
  double seconds = 0.0;
  std::string solver;
};

struct SelectionSolution {
  BitSet is_selected;
  BitSet is_covered;
  BitSet is_error;
  BitSet is_overlap;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kLimit;
  SolveStats stats;
  std::vector<Violation> diagnostics;  // remaining violations when infeasible

  std::vector<std::size_t> selected() const { return is_selected.indices(); }
};

// Depth-first branch and bound over the selection bits. node_limit 0 and
// time_limit <= 0 mean unlimited.
SelectionSolution solve_exact(const SelectionProblem& p, uint64_t node_limit = 0,
                              double time_limit = 0.0);

struct HeuristicOptions {
  uint64_t seed = 1;
  std::size_t restarts = 5;
  std::size_t threads = 1;
};

// Greedy construction plus local search, best over restarts. Restart 0 is the
// plain greedy; later restarts perturb the greedy scores.
SelectionSolution solve_heuristic(const SelectionProblem& p, const HeuristicOptions& options = {});

enum class SolverKind { kAuto, kExact, kHeuristic };
SolverKind parse_solver_kind(const std::string& name);

struct SolverOptions {
  SolverKind kind = SolverKind::kAuto;
  std::size_t exact_max_rules = 20;  // kAuto uses the exact solver up to this m
  uint64_t node_limit = 0;
  double time_limit = 0.0;
  HeuristicOptions heuristic;
};

// kAuto falls back to the heuristic when the exact search stops at a limit
// without an incumbent. When the exact search proves infeasibility, the
// heuristic's least-violating selection is returned with status kInfeasible.
SelectionSolution solve(const SelectionProblem& p, const SolverOptions& options = {});

// CPLEX LP text format. Variables sel_j, cov_i, err_i, ovl_i (0-based), all
// binary. Besides the linking rows, the error budget is written with both
// sums on the left: sum err + (1 - init_error - alpha) sum cov <= n.
void write_lp(const SelectionProblem& p, std::ostream& out);
void export_lp(const SelectionProblem& p, const std::filesystem::path& path);

}  // namespace forestore
