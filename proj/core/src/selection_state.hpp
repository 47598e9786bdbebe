#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "forestore/selection.hpp"

namespace forestore::detail {

inline constexpr double kFeasTol = 1e-9;

// Selection with incrementally maintained per-instance P/C counts and the
// aggregate counts every constraint needs.
class SelectionState {
 public:
  explicit SelectionState(const SelectionProblem& p)
      : p_(&p), P_(p.n, 0), C_(p.n, 0), selected_(p.m), errors_(p.n) {
    cover_target_ = static_cast<double>(p.n) * (1.0 - p.params.beta);
    error_rate_ = p.init_error + p.params.alpha;
  }

  const BitSet& selected() const { return selected_; }
  bool contains(std::size_t j) const { return selected_.test(j); }
  std::size_t size() const { return count_; }
  double cost() const { return cost_; }
  std::size_t covered() const { return covered_; }
  std::size_t overlap() const { return overlap_; }
  // Instances with P <= 0, uncovered ones included.
  std::size_t errors() const { return errors_; }
  std::size_t over_maxcover() const { return over_excess_; }

  void add(std::size_t j) {
    selected_.set(j);
    ++count_;
    cost_ += p_->rule_cost(j);
    for (uint32_t i : p_->ok_rows[j]) bump(i, +1, +1);
    for (uint32_t i : p_->nok_rows[j]) bump(i, -1, +1);
  }

  void remove(std::size_t j) {
    selected_.reset(j);
    --count_;
    cost_ -= p_->rule_cost(j);
    for (uint32_t i : p_->ok_rows[j]) bump(i, -1, -1);
    for (uint32_t i : p_->nok_rows[j]) bump(i, +1, -1);
    if (count_ == 0) cost_ = 0.0;
  }

  // Would adding rule j push some instance above maxcover?
  bool add_breaks_maxcover(std::size_t j) const {
    const auto cap = static_cast<int32_t>(p_->params.maxcover);
    for (uint32_t i : p_->ok_rows[j])
      if (C_[i] + 1 > cap) return true;
    for (uint32_t i : p_->nok_rows[j])
      if (C_[i] + 1 > cap) return true;
    return false;
  }

  double covered_errors() const {
    return static_cast<double>(errors_) - static_cast<double>(p_->n - covered_);
  }

  bool coverage_ok() const { return static_cast<double>(covered_) >= cover_target_ - kFeasTol; }
  bool error_ok() const {
    return covered_errors() <= error_rate_ * static_cast<double>(covered_) + kFeasTol;
  }
  bool overlap_ok() const {
    return static_cast<double>(overlap_) <=
           p_->params.maxoverlap * static_cast<double>(covered_) + kFeasTol;
  }

  bool feasible() const { return over_excess_ == 0 && coverage_ok() && error_ok() && overlap_ok(); }

  // Sum of constraint shortfalls in instance units; 0 iff feasible.
  double violation() const {
    double v = static_cast<double>(over_excess_);
    v += std::max(0.0, cover_target_ - static_cast<double>(covered_) - kFeasTol);
    v += std::max(0.0, covered_errors() - error_rate_ * static_cast<double>(covered_) - kFeasTol);
    v += std::max(0.0, static_cast<double>(overlap_) -
                           p_->params.maxoverlap * static_cast<double>(covered_) - kFeasTol);
    return v;
  }

  double cover_target() const { return cover_target_; }

 private:
  void bump(uint32_t i, int32_t dp, int32_t dc) {
    const auto cap = static_cast<int32_t>(p_->params.maxcover);
    const int32_t c0 = C_[i];
    const int32_t p0 = P_[i];
    const int32_t c1 = c0 + dc;
    const int32_t p1 = p0 + dp;
    C_[i] = c1;
    P_[i] = p1;
    covered_ += static_cast<std::size_t>(c1 >= 1) - static_cast<std::size_t>(c0 >= 1);
    overlap_ += static_cast<std::size_t>(c1 >= 2) - static_cast<std::size_t>(c0 >= 2);
    errors_ += static_cast<std::size_t>(p1 <= 0) - static_cast<std::size_t>(p0 <= 0);
    over_excess_ += static_cast<std::size_t>(std::max(0, c1 - cap)) -
                    static_cast<std::size_t>(std::max(0, c0 - cap));
  }

  const SelectionProblem* p_;
  std::vector<int32_t> P_;
  std::vector<int32_t> C_;
  BitSet selected_;
  std::size_t count_ = 0;
  double cost_ = 0.0;
  std::size_t covered_ = 0;
  std::size_t overlap_ = 0;
  std::size_t errors_;
  std::size_t over_excess_ = 0;
  double cover_target_ = 0.0;
  double error_rate_ = 0.0;
};

// Fills indicator bits and objective from a selection.
SelectionSolution make_solution(const SelectionProblem& p, const BitSet& selected,
                                SolveStatus status);

}  // namespace forestore::detail
