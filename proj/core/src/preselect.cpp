#include "forestore/preselect.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "forestore/errors.hpp"
#include "forestore/parallel.hpp"

namespace forestore {

void PreselectParams::validate() const {
  if (!(min_conf > 0.0 && min_conf <= 1.0)) throw ConfigError("min_conf must lie in (0, 1]");
  if (!(min_class_cov >= 0.0 && min_class_cov <= 1.0))
    throw ConfigError("min_class_cov must lie in [0, 1]");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  if (!(max_simil > 0.0 && max_simil <= 1.0)) throw ConfigError("max_simil must lie in (0, 1]");
}

ScoredRules score_rules(std::vector<Rule> rules, const Dataset& ds, std::size_t threads) {
  LevelBitmaps bitmaps(ds);
  ScoredRules out;
  out.metrics.resize(rules.size());
  out.covers.resize(rules.size());
  parallel_for(rules.size(), threads, [&](std::size_t k) {
    out.covers[k] = bitmaps.cover(rules[k].condition);
    out.metrics[k] = metrics_from_cover(rules[k], out.covers[k], ds);
  });
  out.rules = std::move(rules);
  return out;
}

std::vector<Rule> remove_redundant(std::vector<Rule> rules) {
  std::sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
    return std::tie(a.condition, a.ypred, a.id) < std::tie(b.condition, b.ypred, b.id);
  });
  auto last = std::unique(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
    return a.condition == b.condition && a.ypred == b.ypred;
  });
  rules.erase(last, rules.end());
  std::sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) { return a.id < b.id; });
  return rules;
}

namespace {

// True when rule a should be kept over rule b.
bool preferred(const Rule& a, const RuleMetrics& ma, const Rule& b, const RuleMetrics& mb) {
  if (ma.confidence != mb.confidence) return ma.confidence > mb.confidence;
  if (ma.coverage != mb.coverage) return ma.coverage > mb.coverage;
  if (ma.att_nbr != mb.att_nbr) return ma.att_nbr < mb.att_nbr;
  if (ma.lev_nbr != mb.lev_nbr) return ma.lev_nbr < mb.lev_nbr;
  return a.id < b.id;
}

ScoredRules pick(const ScoredRules& from, const std::vector<std::size_t>& keep) {
  ScoredRules out;
  for (std::size_t k : keep) {
    out.rules.push_back(from.rules[k]);
    out.metrics.push_back(from.metrics[k]);
    out.covers.push_back(from.covers[k]);
  }
  return out;
}

}  // namespace

PreselectResult preselect(std::vector<Rule> rules, const Dataset& train,
                          const PreselectParams& params, std::size_t threads) {
  params.validate();
  if (rules.empty()) throw EmptyPreselectionError("empty preselection: no input rules");
  PreselectResult result;
  result.input_count = rules.size();

  rules = remove_redundant(std::move(rules));
  result.after_dedup = rules.size();

  std::erase_if(rules, [&](const Rule& r) { return r.condition.attribute_count() > params.max_len; });
  result.after_length = rules.size();
  if (rules.empty())
    throw EmptyPreselectionError("empty preselection: every rule exceeds max_len = " +
                                 std::to_string(params.max_len));

  ScoredRules scored = score_rules(std::move(rules), train, threads);
  std::vector<std::size_t> passing;
  std::size_t pass_conf = 0;
  std::size_t pass_class_cov = 0;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    const bool conf_ok = scored.metrics[k].confidence >= params.min_conf;
    const bool cov_ok = scored.metrics[k].class_coverage >= params.min_class_cov;
    pass_conf += conf_ok;
    pass_class_cov += cov_ok;
    if (conf_ok && cov_ok) passing.push_back(k);
  }
  result.after_thresholds = passing.size();
  if (passing.empty()) {
    std::string binding = pass_conf <= pass_class_cov
                              ? "min_conf = " + std::to_string(params.min_conf)
                              : "min_class_cov = " + std::to_string(params.min_class_cov);
    if (pass_conf > 0 && pass_class_cov > 0)
      binding = "min_conf and min_class_cov jointly";
    throw EmptyPreselectionError("empty preselection: no rule passes " + binding);
  }
  ScoredRules candidates = pick(scored, passing);

  const std::size_t m = candidates.size();
  std::vector<char> removed(m, 0);
  std::vector<std::size_t> similar_removed;
  // Candidates are already in ascending id order.
  for (std::size_t i = 0; i < m; ++i) {
    if (removed[i]) continue;
    std::vector<std::size_t> group{i};
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i || removed[j]) continue;
      if (jaccard_similarity(candidates.covers[i], candidates.covers[j]) >= params.max_simil)
        group.push_back(j);
    }
    if (group.size() == 1) continue;
    std::size_t best = group.front();
    for (std::size_t g : group)
      if (preferred(candidates.rules[g], candidates.metrics[g], candidates.rules[best],
                    candidates.metrics[best]))
        best = g;
    for (std::size_t g : group) {
      if (g == best) continue;
      removed[g] = 1;
      similar_removed.push_back(g);
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < m; ++k)
    if (!removed[k]) keep.push_back(k);
  std::sort(similar_removed.begin(), similar_removed.end());

  result.psr = pick(candidates, keep);
  result.psrs = pick(candidates, similar_removed);
  result.coverage = coverage_from_covers(result.psr.rules, result.psr.covers, train);
  return result;
}

}  // namespace forestore
