#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "forestore/selection.hpp"
#include "selection_state.hpp"

namespace forestore {

namespace {

constexpr double kObjTol = 1e-9;

class BranchAndBound {
 public:
  BranchAndBound(const SelectionProblem& p, uint64_t node_limit, double time_limit)
      : p_(p), state_(p), node_limit_(node_limit), time_limit_(time_limit),
        start_(std::chrono::steady_clock::now()) {
    order_.resize(p.m);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return p.rule_cost(a) < p.rule_cost(b);
    });
    cost_.resize(p.m);
    cover_.resize(p.m);
    for (std::size_t d = 0; d < p.m; ++d) {
      cost_[d] = p.rule_cost(order_[d]);
      cover_[d] = p.ok_rows[order_[d]].size() + p.nok_rows[order_[d]].size();
    }
    suffix_max_cover_.assign(p.m + 1, 0);
    for (std::size_t d = p.m; d-- > 0;)
      suffix_max_cover_[d] = std::max(suffix_max_cover_[d + 1], cover_[d]);
  }

  SelectionSolution run() {
    bool complete = true;
    if (state_.feasible()) {
      // Empty selection already feasible (only when beta allows it).
      record();
    } else {
      complete = dfs(0);
    }
    SolveStatus status;
    if (complete)
      status = has_incumbent_ ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    else
      status = has_incumbent_ ? SolveStatus::kFeasible : SolveStatus::kLimit;
    SelectionSolution s = detail::make_solution(p_, has_incumbent_ ? incumbent_ : BitSet(p_.m), status);
    if (status == SolveStatus::kInfeasible || status == SolveStatus::kLimit) {
      s.diagnostics = check_feasible(s.is_selected, p_);
    }
    s.stats.nodes = nodes_;
    s.stats.solver = "exact";
    s.stats.seconds = elapsed();
    return s;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool out_of_budget() {
    if (node_limit_ != 0 && nodes_ >= node_limit_) return true;
    if (time_limit_ > 0.0 && (nodes_ & 1023) == 0 && elapsed() > time_limit_) timed_out_ = true;
    return timed_out_;
  }

  void record() {
    incumbent_ = state_.selected();
    best_ = state_.cost();
    has_incumbent_ = true;
  }

  // Lower bound on the extra cost needed from rules order_[d..].
  double completion_bound(std::size_t d) const {
    const double deficit = state_.cover_target() - static_cast<double>(state_.covered());
    if (deficit > detail::kFeasTol) {
      if (suffix_max_cover_[d] == 0) return std::numeric_limits<double>::infinity();
      const double k = std::ceil((deficit - detail::kFeasTol) / static_cast<double>(suffix_max_cover_[d]));
      return k * cost_[d];
    }
    // Coverage met but some other constraint is not: at least one more rule.
    return cost_[d];
  }

  // Explores every extension of the current selection by rules order_[d..].
  // Returns false when a limit interrupted the search.
  bool dfs(std::size_t d) {
    for (; d < p_.m; ++d) {
      if (out_of_budget()) return false;
      if (has_incumbent_ && state_.cost() + completion_bound(d) >= best_ - kObjTol) return true;
      if (!has_incumbent_ && std::isinf(completion_bound(d))) return true;
      const std::size_t j = order_[d];
      ++nodes_;
      if (!state_.add_breaks_maxcover(j)) {
        state_.add(j);
        bool complete = true;
        if (state_.feasible()) {
          // Costs are positive, so no superset can improve on this set.
          if (!has_incumbent_ || state_.cost() < best_ - kObjTol) record();
        } else {
          complete = dfs(d + 1);
        }
        state_.remove(j);
        if (!complete) return false;
      }
      // Fall through: branch where rule j is excluded.
    }
    return true;
  }

  const SelectionProblem& p_;
  detail::SelectionState state_;
  uint64_t node_limit_;
  double time_limit_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::size_t> order_;
  std::vector<double> cost_;
  std::vector<std::size_t> cover_;
  std::vector<std::size_t> suffix_max_cover_;
  BitSet incumbent_;
  double best_ = std::numeric_limits<double>::infinity();
  bool has_incumbent_ = false;
  bool timed_out_ = false;
  uint64_t nodes_ = 0;
};

}  // namespace

SelectionSolution solve_exact(const SelectionProblem& p, uint64_t node_limit, double time_limit) {
  BranchAndBound bb(p, node_limit, time_limit);
  return bb.run();
}

}  // namespace forestore
