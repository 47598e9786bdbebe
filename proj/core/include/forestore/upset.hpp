#pragma once

#include <string>
#include <vector>

#include "forestore/rules.hpp"

namespace forestore {

// Instances grouped by the exact set of rules covering them. The empty
// combination is the else bucket and is always present.
struct UpsetCombination {
  std::vector<RuleId> rules;  // ascending
  std::size_t count = 0;
  std::vector<std::size_t> class_counts;  // by true class
};

struct UpsetRule {
  RuleId id = 0;
  std::size_t cover = 0;
  ClassIndex ypred = 0;
};

struct UpsetExport {
  std::vector<UpsetCombination> combinations;  // by descending count, then rule list
  std::vector<UpsetRule> rules;
  std::size_t n = 0;
};

UpsetExport export_upset(std::span<const Rule> rules, const Dataset& ds);
std::string upset_to_json(const UpsetExport& u, const Schema& schema);

}  // namespace forestore
