#include "forestore/upset.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "forestore/errors.hpp"

namespace forestore {

UpsetExport export_upset(std::span<const Rule> rules, const Dataset& ds) {
  if (rules.empty()) throw DataError("UpSet export needs at least one rule");
  LevelBitmaps bitmaps(ds);
  std::vector<BitSet> covers;
  UpsetExport u;
  u.n = ds.size();
  for (const auto& r : rules) {
    covers.push_back(bitmaps.cover(r.condition));
    u.rules.push_back({r.id, covers.back().count(), r.ypred});
  }
  std::map<std::vector<RuleId>, UpsetCombination> groups;
  groups[{}] = {{}, 0, std::vector<std::size_t>(ds.class_count(), 0)};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<RuleId> key;
    for (std::size_t k = 0; k < rules.size(); ++k)
      if (covers[k].test(i)) key.push_back(rules[k].id);
    std::sort(key.begin(), key.end());
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) it->second = {key, 0, std::vector<std::size_t>(ds.class_count(), 0)};
    ++it->second.count;
    ++it->second.class_counts[ds.label(i)];
  }
  for (auto& [key, combo] : groups) u.combinations.push_back(std::move(combo));
  std::stable_sort(u.combinations.begin(), u.combinations.end(),
                   [](const UpsetCombination& a, const UpsetCombination& b) { return a.count > b.count; });
  return u;
}

std::string upset_to_json(const UpsetExport& u, const Schema& schema) {
  using nlohmann::json;
  json combos = json::array();
  for (const auto& c : u.combinations) {
    json classes = json::object();
    for (std::size_t k = 0; k < c.class_counts.size(); ++k) classes[schema.class_levels[k]] = c.class_counts[k];
    combos.push_back({{"rules", c.rules}, {"else", c.rules.empty()}, {"count", c.count}, {"classes", classes}});
  }
  json rules = json::array();
  for (const auto& r : u.rules)
    rules.push_back({{"id", r.id}, {"cover", r.cover}, {"ypred", schema.class_levels[r.ypred]}});
  json doc = {{"format", "forestore.upset"}, {"version", 1}, {"n", u.n}, {"rules", rules}, {"combinations", combos}};
  return doc.dump(2) + "\n";
}

}  // namespace forestore
