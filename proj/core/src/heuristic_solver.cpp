#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "forestore/parallel.hpp"
#include "forestore/random.hpp"
#include "forestore/selection.hpp"
#include "selection_state.hpp"

namespace forestore {

namespace {

constexpr double kObjTol = 1e-9;

struct RunResult {
  BitSet selected;
  bool feasible = false;
  double cost = 0.0;
  double violation = 0.0;
  uint64_t iterations = 0;
};

class LocalSearch {
 public:
  LocalSearch(const SelectionProblem& p, uint64_t seed, bool perturb)
      : p_(p), state_(p), rng_(seed), perturb_(perturb) {}

  RunResult run() {
    greedy();
    repair();
    improve();
    RunResult r;
    r.selected = state_.selected();
    r.feasible = state_.feasible();
    r.cost = state_.cost();
    r.violation = state_.violation();
    r.iterations = iterations_;
    return r;
  }

 private:
  // Score of an instance state for greedy progress: covered counts once,
  // covered and correctly voted counts twice.
  double progress() const {
    return static_cast<double>(state_.covered()) +
           static_cast<double>(p_.n - state_.errors());
  }

  void greedy() {
    std::vector<double> noise(p_.m, 1.0);
    if (perturb_)
      for (auto& x : noise) x = 0.7 + 0.6 * uniform_unit(rng_);
    while (!state_.feasible()) {
      ++iterations_;
      const double base = progress();
      const double base_violation = state_.violation();
      std::size_t best = p_.m;
      double best_score = 0.0;
      for (std::size_t j = 0; j < p_.m; ++j) {
        if (state_.contains(j) || state_.add_breaks_maxcover(j)) continue;
        state_.add(j);
        const double gain = progress() - base;
        const bool helps = gain > 0.0 || state_.violation() < base_violation - kObjTol;
        state_.remove(j);
        if (!helps) continue;
        const double score = std::max(gain, 0.0) * noise[j] / p_.rule_cost(j);
        if (best == p_.m || score > best_score + kObjTol) {
          best = j;
          best_score = score;
        }
      }
      if (best == p_.m) break;
      state_.add(best);
    }
  }

  // Moves that strictly reduce the total violation, cheapest result first.
  void repair() {
    while (!state_.feasible()) {
      ++iterations_;
      const double v0 = state_.violation();
      double best_v = v0;
      double best_cost = std::numeric_limits<double>::infinity();
      int kind = 0;
      std::size_t a = 0;
      std::size_t b = 0;
      auto consider = [&](int k, std::size_t x, std::size_t y) {
        const double v = state_.violation();
        const double c = state_.cost();
        if (v < best_v - kObjTol || (v < v0 - kObjTol && v <= best_v + kObjTol && c < best_cost - kObjTol)) {
          best_v = v;
          best_cost = c;
          kind = k;
          a = x;
          b = y;
        }
      };
      for (std::size_t j = 0; j < p_.m; ++j) {
        if (state_.contains(j)) {
          state_.remove(j);
          consider(1, j, 0);
          state_.add(j);
        } else {
          state_.add(j);
          consider(2, j, 0);
          state_.remove(j);
        }
      }
      for (std::size_t out = 0; out < p_.m; ++out) {
        if (!state_.contains(out)) continue;
        state_.remove(out);
        for (std::size_t in = 0; in < p_.m; ++in) {
          if (in == out || state_.contains(in)) continue;
          state_.add(in);
          consider(3, out, in);
          state_.remove(in);
        }
        state_.add(out);
      }
      if (kind == 0) return;
      apply(kind, a, b);
    }
  }

  // Drop and swap moves accepted only on strict objective decrease while
  // staying feasible; best improvement per pass.
  void improve() {
    if (!state_.feasible()) return;
    while (true) {
      ++iterations_;
      const double c0 = state_.cost();
      double best_cost = c0;
      int kind = 0;
      std::size_t a = 0;
      std::size_t b = 0;
      for (std::size_t out = 0; out < p_.m; ++out) {
        if (!state_.contains(out)) continue;
        state_.remove(out);
        if (state_.feasible() && state_.cost() < best_cost - kObjTol) {
          best_cost = state_.cost();
          kind = 1;
          a = out;
        }
        for (std::size_t in = 0; in < p_.m; ++in) {
          if (in == out || state_.contains(in)) continue;
          if (p_.rule_cost(in) >= p_.rule_cost(out) - kObjTol) continue;
          if (state_.add_breaks_maxcover(in)) continue;
          state_.add(in);
          if (state_.feasible() && state_.cost() < best_cost - kObjTol) {
            best_cost = state_.cost();
            kind = 3;
            a = out;
            b = in;
          }
          state_.remove(in);
        }
        state_.add(out);
      }
      if (kind == 0) return;
      apply(kind, a, b);
    }
  }

  void apply(int kind, std::size_t a, std::size_t b) {
    if (kind == 1) state_.remove(a);
    if (kind == 2) state_.add(a);
    if (kind == 3) {
      state_.remove(a);
      state_.add(b);
    }
  }

  const SelectionProblem& p_;
  detail::SelectionState state_;
  Rng rng_;
  bool perturb_;
  uint64_t iterations_ = 0;
};

bool better(const RunResult& a, const RunResult& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible && std::abs(a.violation - b.violation) > kObjTol) return a.violation < b.violation;
  return a.cost < b.cost - kObjTol;
}

}  // namespace

SelectionSolution solve_heuristic(const SelectionProblem& p, const HeuristicOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  std::vector<RunResult> runs(restarts);
  parallel_for(restarts, options.threads, [&](std::size_t r) {
    LocalSearch search(p, derive_seed(options.seed, "restart", r), r > 0);
    runs[r] = search.run();
  });
  std::size_t best = 0;
  uint64_t iterations = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    iterations += runs[r].iterations;
    if (better(runs[r], runs[best])) best = r;
  }
  const RunResult& winner = runs[best];
  SelectionSolution s = detail::make_solution(
      p, winner.selected, winner.feasible ? SolveStatus::kFeasible : SolveStatus::kInfeasible);
  if (!winner.feasible) s.diagnostics = check_feasible(winner.selected, p);
  s.stats.iterations = iterations;
  s.stats.solver = "heuristic";
  s.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace forestore
