#include "forestore/rules.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>

#include "forestore/errors.hpp"
#include "forestore/log.hpp"
#include "text.hpp"

namespace forestore {

Condition::Condition(std::vector<Term> terms, const Schema& schema) {
  std::map<std::size_t, std::vector<LevelIndex>> merged;
  for (auto& term : terms) {
    if (term.attribute >= schema.attribute_count())
      throw DataError("condition references unknown attribute " + std::to_string(term.attribute));
    const std::size_t vocab = schema.attributes[term.attribute].levels.size();
    std::sort(term.levels.begin(), term.levels.end());
    term.levels.erase(std::unique(term.levels.begin(), term.levels.end()), term.levels.end());
    if (term.levels.empty()) throw DataError("condition term with an empty level set");
    if (term.levels.back() >= vocab) throw DataError("condition references an unknown level");
    auto [it, inserted] = merged.try_emplace(term.attribute, term.levels);
    if (!inserted) {
      std::vector<LevelIndex> both;
      std::set_intersection(it->second.begin(), it->second.end(), term.levels.begin(),
                            term.levels.end(), std::back_inserter(both));
      if (both.empty()) throw DataError("condition term with an empty level set");
      it->second = std::move(both);
    }
  }
  for (auto& [attribute, levels] : merged) {
    if (levels.size() == schema.attributes[attribute].levels.size()) continue;
    terms_.push_back({attribute, std::move(levels)});
  }
}

std::size_t Condition::level_count() const {
  std::size_t total = 0;
  for (const auto& t : terms_) total += t.levels.size();
  return total;
}

std::vector<std::size_t> Condition::attributes() const {
  std::vector<std::size_t> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.attribute);
  return out;
}

bool Condition::covers(std::span<const LevelIndex> row) const {
  for (const auto& t : terms_) {
    if (!std::binary_search(t.levels.begin(), t.levels.end(), row[t.attribute])) return false;
  }
  return true;
}

LevelBitmaps::LevelBitmaps(const Dataset& ds) : n_(ds.size()) {
  const Schema& schema = ds.schema();
  levels_.resize(schema.attribute_count());
  for (std::size_t a = 0; a < schema.attribute_count(); ++a)
    levels_[a].assign(schema.attributes[a].levels.size(), BitSet(n_));
  class_bits_.assign(schema.class_count(), BitSet(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) levels_[a][ds.level(i, a)].set(i);
    class_bits_[ds.label(i)].set(i);
  }
}

BitSet LevelBitmaps::cover(const Condition& condition) const {
  BitSet out(n_);
  out.set_all();
  for (const auto& t : condition.terms()) {
    BitSet term_bits(n_);
    for (LevelIndex l : t.levels) {
      // Levels beyond this dataset's vocabulary match nothing.
      if (t.attribute < levels_.size() && l < levels_[t.attribute].size())
        term_bits |= levels_[t.attribute][l];
    }
    out &= term_bits;
  }
  return out;
}

std::vector<Rule> extract_rules(const Forest& forest) {
  const Schema& schema = forest.schema();
  const std::size_t p = schema.attribute_count();
  std::vector<Rule> rules;
  RuleId next_id = 1;
  for (const auto& tree : forest.trees()) {
    // allowed[a]: levels still admissible for attribute a along the path;
    // nullopt means unconstrained.
    using Allowed = std::vector<std::optional<std::vector<LevelIndex>>>;
    struct Frame {
      std::size_t node;
      Allowed allowed;
    };
    std::vector<Frame> stack;
    stack.push_back({0, Allowed(p)});
    while (!stack.empty()) {
      Frame frame = std::move(stack.back());
      stack.pop_back();
      const TreeNode& node = tree.nodes[frame.node];
      if (node.is_leaf()) {
        std::vector<Term> terms;
        bool satisfiable = true;
        for (std::size_t a = 0; a < p; ++a) {
          if (!frame.allowed[a]) continue;
          if (frame.allowed[a]->empty()) {
            satisfiable = false;
            break;
          }
          terms.push_back({a, *frame.allowed[a]});
        }
        if (satisfiable) rules.push_back({next_id++, Condition(std::move(terms), schema), node.class_index});
        continue;
      }
      const auto a = static_cast<std::size_t>(node.attribute);
      const std::size_t vocab = schema.attributes[a].levels.size();
      std::vector<LevelIndex> current;
      if (frame.allowed[a]) {
        current = *frame.allowed[a];
      } else {
        current.resize(vocab);
        for (LevelIndex l = 0; l < vocab; ++l) current[l] = l;
      }
      std::vector<LevelIndex> left;
      std::vector<LevelIndex> right;
      for (LevelIndex l : current) (node.goes_left(l) ? left : right).push_back(l);
      Allowed right_allowed = frame.allowed;
      right_allowed[a] = std::move(right);
      Allowed left_allowed = std::move(frame.allowed);
      left_allowed[a] = std::move(left);
      stack.push_back({static_cast<std::size_t>(node.right), std::move(right_allowed)});
      stack.push_back({static_cast<std::size_t>(node.left), std::move(left_allowed)});
    }
  }
  return rules;
}

RuleMetrics metrics_from_cover(const Rule& rule, const BitSet& cover, const Dataset& ds) {
  const Schema& schema = ds.schema();
  RuleMetrics m;
  const std::size_t n = ds.size();
  std::size_t covered = 0;
  std::size_t correct = 0;
  cover.for_each([&](std::size_t i) {
    ++covered;
    correct += ds.label(i) == rule.ypred;
  });
  std::size_t class_size = 0;
  for (std::size_t i = 0; i < n; ++i) class_size += ds.label(i) == rule.ypred;
  m.cover_count = covered;
  m.correct_count = correct;
  m.coverage = static_cast<double>(covered) / static_cast<double>(n);
  m.confidence = covered == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(covered);
  if (class_size == 0) {
    log_warning("rule " + std::to_string(rule.id) + " predicts a class absent from the data; class coverage set to 0");
    m.class_coverage = 0.0;
  } else {
    m.class_coverage = static_cast<double>(covered) / static_cast<double>(class_size);
  }
  m.att_nbr = rule.condition.attribute_count();
  m.lev_nbr = rule.condition.level_count();
  m.att_nbr_s = static_cast<double>(m.att_nbr) / static_cast<double>(schema.attribute_count());
  m.lev_nbr_s = static_cast<double>(m.lev_nbr) / static_cast<double>(schema.total_level_count());
  m.attributes = rule.condition.attributes();
  return m;
}

RuleMetrics evaluate_rule(const Rule& rule, const Dataset& ds) {
  BitSet cover(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (rule.condition.covers(ds.row(i))) cover.set(i);
  return metrics_from_cover(rule, cover, ds);
}

CoverageMatrices coverage_from_covers(std::span<const Rule> rules, std::span<const BitSet> covers,
                                      const Dataset& ds) {
  if (rules.size() != covers.size()) throw DataError("rule and cover counts differ");
  std::vector<BitSet> class_bits(ds.class_count(), BitSet(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) class_bits[ds.label(i)].set(i);
  CoverageMatrices out;
  out.cov_ok.reserve(rules.size());
  out.cov_nok.reserve(rules.size());
  for (std::size_t j = 0; j < rules.size(); ++j) {
    BitSet ok = covers[j];
    if (rules[j].ypred < class_bits.size())
      ok &= class_bits[rules[j].ypred];
    else
      ok = BitSet(ds.size());
    BitSet nok = covers[j];
    nok.subtract(ok);
    out.cov_ok.push_back(std::move(ok));
    out.cov_nok.push_back(std::move(nok));
  }
  return out;
}

CoverageMatrices build_coverage(std::span<const Rule> rules, const Dataset& ds) {
  LevelBitmaps bitmaps(ds);
  std::vector<BitSet> covers;
  covers.reserve(rules.size());
  for (const auto& r : rules) covers.push_back(bitmaps.cover(r.condition));
  return coverage_from_covers(rules, covers, ds);
}

double jaccard_similarity(const BitSet& a, const BitSet& b) {
  const std::size_t uni = a.union_count(b);
  if (uni == 0) return 1.0;
  return static_cast<double>(a.intersect_count(b)) / static_cast<double>(uni);
}

std::string render_condition(const Condition& condition, const Schema& schema) {
  if (condition.terms().empty()) return "TRUE";
  std::string out;
  for (const auto& t : condition.terms()) {
    if (!out.empty()) out += " & ";
    out += "X[," + std::to_string(t.attribute + 1) + "] in {";
    for (std::size_t k = 0; k < t.levels.size(); ++k) {
      if (k > 0) out += ',';
      out += schema.attributes[t.attribute].levels[t.levels[k]];
    }
    out += '}';
  }
  return out;
}

std::string render_attributes(const std::vector<std::size_t>& attributes) {
  std::string out;
  for (std::size_t k = 0; k < attributes.size(); ++k) {
    if (k > 0) out += ',';
    out += "V" + std::to_string(attributes[k] + 1);
  }
  return out;
}

namespace {

std::string fixed3(double v) { return detail::fixed(v, 3); }

}  // namespace

void write_rule_metrics_csv(std::ostream& out, std::span<const Rule> rules,
                            std::span<const RuleMetrics> metrics, const Schema& schema,
                            bool with_class_coverage) {
  if (rules.size() != metrics.size()) throw DataError("rule and metric counts differ");
  out << "id,Conf.,Cov.,Att. nbr,Lev. nbr,Att. nbr_S,Lev. nbr_S,Att.,Ypred,Condition";
  if (with_class_coverage) out << ",Class cov.";
  out << '\n';
  for (std::size_t k = 0; k < rules.size(); ++k) {
    const auto& m = metrics[k];
    out << rules[k].id << ',' << fixed3(m.confidence) << ',' << fixed3(m.coverage) << ','
        << m.att_nbr << ',' << m.lev_nbr << ',' << fixed3(m.att_nbr_s) << ','
        << fixed3(m.lev_nbr_s) << ',' << detail::csv_field(render_attributes(m.attributes)) << ','
        << detail::csv_field(schema.class_levels[rules[k].ypred]) << ','
        << detail::csv_field(render_condition(rules[k].condition, schema));
    if (with_class_coverage) out << ',' << fixed3(m.class_coverage);
    out << '\n';
  }
}

namespace {

constexpr std::array<char, 8> kCoverageMagic = {'F', 'O', 'R', 'E', 'C', 'O', 'V', '1'};

void put_u64(std::ostream& out, uint64_t v) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(bytes, 8);
}

uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("truncated coverage file");
  uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | bytes[k];
  return v;
}

}  // namespace

void write_coverage_binary(std::ostream& out, const CoverageMatrices& cov) {
  out.write(kCoverageMagic.data(), kCoverageMagic.size());
  put_u64(out, cov.rows());
  put_u64(out, cov.cols());
  for (const auto* columns : {&cov.cov_ok, &cov.cov_nok})
    for (const auto& column : *columns)
      for (uint64_t w : column.words()) put_u64(out, w);
}

CoverageMatrices read_coverage_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCoverageMagic)
    throw DataError("not a coverage matrix file");
  const uint64_t rows = get_u64(in);
  const uint64_t cols = get_u64(in);
  CoverageMatrices cov;
  for (auto* columns : {&cov.cov_ok, &cov.cov_nok}) {
    columns->assign(cols, BitSet(rows));
    for (auto& column : *columns)
      for (auto& w : column.mutable_words()) w = get_u64(in);
  }
  return cov;
}

}  // namespace forestore
