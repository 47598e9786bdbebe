#include "forestore/selection.hpp"

#include <cmath>

#include "forestore/errors.hpp"
#include "selection_state.hpp"

namespace forestore {

void SelectionParams::validate() const {
  for (double w : {w0, w1, w2, w3})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("objective weights must be finite and >= 0");
  if (maxcover < 1) throw ConfigError("maxcover must be >= 1");
  if (!(maxoverlap >= 0.0 && maxoverlap <= 1.0)) throw ConfigError("maxoverlap must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
}

double SelectionProblem::rule_cost(std::size_t j) const {
  return 1.0 + params.w0 * (1.0 - confidence[j]) + params.w1 * (1.0 - coverage[j]) +
         params.w2 * att_ratio[j] + params.w3 * levels_ratio[j];
}

SelectionProblem build_problem(std::span<const RuleMetrics> metrics, const CoverageMatrices& cov,
                               double init_error, const SelectionParams& params,
                               std::span<const RuleId> rule_ids) {
  params.validate();
  if (metrics.size() != cov.cols())
    throw DataError("metrics describe " + std::to_string(metrics.size()) +
                    " rules but the coverage matrices have " + std::to_string(cov.cols()) +
                    " columns");
  if (cov.cov_nok.size() != cov.cov_ok.size()) throw DataError("CovOk and CovNok differ in width");
  if (!rule_ids.empty() && rule_ids.size() != metrics.size())
    throw DataError("rule id count does not match the metrics");
  if (!(init_error >= 0.0 && init_error <= 1.0)) throw ConfigError("init_error must lie in [0, 1]");

  SelectionProblem p;
  p.m = metrics.size();
  p.n = cov.rows();
  for (std::size_t j = 0; j < p.m; ++j) {
    if (cov.cov_ok[j].size() != p.n || cov.cov_nok[j].size() != p.n)
      throw DataError("coverage matrix columns differ in length");
    if ((cov.cov_ok[j] & cov.cov_nok[j]).any())
      throw DataError("CovOk and CovNok overlap in column " + std::to_string(j));
  }
  p.cov = cov;
  p.init_error = init_error;
  p.params = params;
  for (std::size_t j = 0; j < p.m; ++j) {
    const auto& m = metrics[j];
    p.rule_ids.push_back(rule_ids.empty() ? static_cast<RuleId>(j + 1) : rule_ids[j]);
    p.confidence.push_back(m.confidence);
    p.coverage.push_back(m.coverage);
    p.att_ratio.push_back(m.att_nbr_s);
    p.levels_ratio.push_back(m.lev_nbr_s);
    std::vector<uint32_t> ok;
    std::vector<uint32_t> nok;
    cov.cov_ok[j].for_each([&](std::size_t i) { ok.push_back(static_cast<uint32_t>(i)); });
    cov.cov_nok[j].for_each([&](std::size_t i) { nok.push_back(static_cast<uint32_t>(i)); });
    p.ok_rows.push_back(std::move(ok));
    p.nok_rows.push_back(std::move(nok));
  }
  return p;
}

double objective(const BitSet& selected, const SelectionProblem& p) {
  if (selected.size() != p.m) throw DataError("selection size does not match the problem");
  double total = 0.0;
  selected.for_each([&](std::size_t j) { total += p.rule_cost(j); });
  return total;
}

Indicators derive_indicators(const BitSet& selected, const SelectionProblem& p) {
  if (selected.size() != p.m) throw DataError("selection size does not match the problem");
  Indicators out;
  out.P.assign(p.n, 0);
  out.C.assign(p.n, 0);
  selected.for_each([&](std::size_t j) {
    p.cov.cov_ok[j].for_each([&](std::size_t i) {
      ++out.P[i];
      ++out.C[i];
    });
    p.cov.cov_nok[j].for_each([&](std::size_t i) {
      --out.P[i];
      ++out.C[i];
    });
  });
  out.is_covered = BitSet(p.n);
  out.is_error = BitSet(p.n);
  out.is_overlap = BitSet(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    if (out.C[i] >= 1) out.is_covered.set(i);
    if (out.P[i] <= 0) out.is_error.set(i);
    if (out.C[i] >= 2) out.is_overlap.set(i);
  }
  return out;
}

std::vector<Violation> check_feasible(const BitSet& selected, const SelectionProblem& p) {
  const Indicators ind = derive_indicators(selected, p);
  const double n = static_cast<double>(p.n);
  const double covered = static_cast<double>(ind.is_covered.count());
  std::vector<Violation> out;
  auto check = [&](const char* name, double lhs, double rhs) {
    if (lhs > rhs + detail::kFeasTol) out.push_back({name, lhs, rhs, rhs - lhs});
  };

  int32_t max_c = 0;
  for (int32_t c : ind.C) max_c = std::max(max_c, c);
  check("maxcover", max_c, static_cast<double>(p.params.maxcover));

  double error_lhs = 0.0;
  for (std::size_t i = 0; i < p.n; ++i)
    error_lhs += static_cast<double>(ind.is_error.test(i)) - (1.0 - ind.is_covered.test(i));
  check("error", error_lhs, (p.init_error + p.params.alpha) * covered);

  // coverage: sum cov >= n (1 - beta), written as lhs <= rhs
  check("coverage", n * (1.0 - p.params.beta), covered);

  check("overlap", static_cast<double>(ind.is_overlap.count()), p.params.maxoverlap * covered);
  return out;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kLimit: return "limit";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "auto") return SolverKind::kAuto;
  if (name == "exact") return SolverKind::kExact;
  if (name == "heuristic") return SolverKind::kHeuristic;
  throw ConfigError("unknown solver '" + name + "' (expected auto, exact or heuristic)");
}

namespace detail {

SelectionSolution make_solution(const SelectionProblem& p, const BitSet& selected,
                                SolveStatus status) {
  SelectionSolution s;
  Indicators ind = derive_indicators(selected, p);
  s.is_selected = selected;
  s.is_covered = std::move(ind.is_covered);
  s.is_error = std::move(ind.is_error);
  s.is_overlap = std::move(ind.is_overlap);
  s.objective = objective(selected, p);
  s.status = status;
  return s;
}

}  // namespace detail

SelectionSolution solve(const SelectionProblem& p, const SolverOptions& options) {
  switch (options.kind) {
    case SolverKind::kExact:
      return solve_exact(p, options.node_limit, options.time_limit);
    case SolverKind::kHeuristic:
      return solve_heuristic(p, options.heuristic);
    case SolverKind::kAuto:
      break;
  }
  if (p.m <= options.exact_max_rules) {
    SelectionSolution exact = solve_exact(p, options.node_limit, options.time_limit);
    if (exact.status == SolveStatus::kOptimal || exact.status == SolveStatus::kFeasible) return exact;
    if (exact.status == SolveStatus::kInfeasible) {
      // Proven infeasible: report the heuristic's least-violating selection.
      SelectionSolution fallback = solve_heuristic(p, options.heuristic);
      fallback.status = SolveStatus::kInfeasible;
      fallback.stats.nodes = exact.stats.nodes;
      fallback.stats.seconds += exact.stats.seconds;
      fallback.stats.solver = "exact+heuristic";
      return fallback;
    }
  }
  return solve_heuristic(p, options.heuristic);
}

}  // namespace forestore
