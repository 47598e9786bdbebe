#include "forestore/enrich.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "forestore/errors.hpp"
#include "text.hpp"

namespace forestore {

void EnrichParams::validate() const {
  if (!(arm_minconf > 0.0 && arm_minconf <= 1.0)) throw ConfigError("arm_minconf must lie in (0, 1]");
  if (!(arm_minsup > 0.0 && arm_minsup <= 1.0)) throw ConfigError("arm_minsup must lie in (0, 1]");
}

MetaTransactions build_transactions(std::span<const Rule> rules, const Dataset& ds) {
  LevelBitmaps bitmaps(ds);
  MetaTransactions t;
  t.n = ds.size();
  t.rows.resize(t.n);
  for (const auto& r : rules) {
    if (std::find(t.rule_ids.begin(), t.rule_ids.end(), r.id) != t.rule_ids.end())
      throw DataError("duplicate rule id " + std::to_string(r.id) + " in transaction pool");
    t.rule_ids.push_back(r.id);
    t.covers.push_back(bitmaps.cover(r.condition));
    t.covers.back().for_each([&](std::size_t i) { t.rows[i].push_back(r.id); });
  }
  return t;
}

std::vector<Metarule> mine_metarules(const MetaTransactions& t, std::span<const RuleId> selected,
                                     const EnrichParams& params) {
  params.validate();
  std::unordered_map<RuleId, std::size_t> index;
  for (std::size_t k = 0; k < t.rule_ids.size(); ++k) index[t.rule_ids[k]] = k;
  std::vector<RuleId> consequents(selected.begin(), selected.end());
  std::sort(consequents.begin(), consequents.end());
  consequents.erase(std::unique(consequents.begin(), consequents.end()), consequents.end());

  const double n = static_cast<double>(t.n);
  std::vector<Metarule> out;
  for (RuleId rj : consequents) {
    auto it = index.find(rj);
    if (it == index.end()) throw DataError("selected rule " + std::to_string(rj) + " is not in the pool");
    const BitSet& cj = t.covers[it->second];
    const std::size_t size_j = cj.count();
    for (std::size_t k = 0; k < t.rule_ids.size(); ++k) {
      if (t.rule_ids[k] == rj) continue;
      const BitSet& ci = t.covers[k];
      const std::size_t size_i = ci.count();
      if (size_i == 0) continue;
      const std::size_t both = ci.intersect_count(cj);
      Metarule mr;
      mr.antecedent = t.rule_ids[k];
      mr.consequent = rj;
      mr.support = static_cast<double>(both) / n;
      mr.confidence = static_cast<double>(both) / static_cast<double>(size_i);
      mr.intersect = size_j == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(size_j);
      if (mr.support >= params.arm_minsup && mr.confidence >= params.arm_minconf) out.push_back(mr);
    }
  }
  std::sort(out.begin(), out.end(), [](const Metarule& a, const Metarule& b) {
    return std::tie(a.consequent, a.antecedent) < std::tie(b.consequent, b.antecedent);
  });
  return out;
}

std::vector<EnrichedRule> select_complementary(const std::vector<Metarule>& meta,
                                               const ScoredRules& pool,
                                               std::span<const RuleId> selected) {
  std::unordered_map<RuleId, std::size_t> index;
  for (std::size_t k = 0; k < pool.size(); ++k) index[pool.rules[k].id] = k;
  auto lookup = [&](RuleId id) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("rule " + std::to_string(id) + " is not in the pool");
    return it->second;
  };

  std::vector<EnrichedRule> out;
  for (RuleId rj : selected) {
    const std::size_t kj = lookup(rj);
    const auto base_atts = pool.metrics[kj].attributes;
    out.push_back({rj, pool.rules[kj], pool.metrics[kj], 1.0, 1.0});

    std::map<std::vector<std::size_t>, const Metarule*> best;
    for (const auto& mr : meta) {
      if (mr.consequent != rj) continue;
      const std::size_t ki = lookup(mr.antecedent);
      const auto& mi = pool.metrics[ki];
      if (mi.attributes == base_atts) continue;
      auto [it, inserted] = best.try_emplace(mi.attributes, &mr);
      if (inserted) continue;
      const Metarule& cur = *it->second;
      const auto& mc = pool.metrics[lookup(cur.antecedent)];
      bool wins;
      if (mr.intersect != cur.intersect)
        wins = mr.intersect > cur.intersect;
      else if (mi.confidence != mc.confidence)
        wins = mi.confidence > mc.confidence;
      else if (mi.coverage != mc.coverage)
        wins = mi.coverage > mc.coverage;
      else if (mi.att_nbr != mc.att_nbr)
        wins = mi.att_nbr < mc.att_nbr;
      else
        wins = mr.antecedent < cur.antecedent;
      if (wins) it->second = &mr;
    }
    for (const auto& [atts, mr] : best) {
      const std::size_t ki = lookup(mr->antecedent);
      out.push_back({rj, pool.rules[ki], pool.metrics[ki], mr->intersect, mr->confidence});
    }
  }
  return out;
}

std::vector<EnrichedRule> enrich(const ScoredRules& pool, std::span<const RuleId> selected,
                                 const Dataset& ds, const EnrichParams& params) {
  const MetaTransactions t = build_transactions(pool.rules, ds);
  return select_complementary(mine_metarules(t, selected, params), pool, selected);
}

void write_enriched_csv(std::ostream& out, std::span<const EnrichedRule> rows,
                        const Schema& schema) {
  out << "ID SR,ID Rule,Condition,Ypred,Intersect,Att.,Att. nbr,Lev. nbr,Conf.,Cov.\n";
  for (const auto& r : rows) {
    out << r.base << ',' << r.rule.id << ',' << detail::csv_field(render_condition(r.rule.condition, schema))
        << ',' << detail::csv_field(schema.class_levels[r.rule.ypred]) << ',' << detail::fixed(r.intersect, 2) << ','
        << detail::csv_field(render_attributes(r.metrics.attributes)) << ',' << r.metrics.att_nbr << ','
        << r.metrics.lev_nbr << ',' << detail::fixed(r.metrics.confidence, 2) << ','
        << detail::fixed(r.metrics.coverage, 2) << '\n';
  }
}

}  // namespace forestore
