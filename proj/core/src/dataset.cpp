#include "forestore/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "forestore/errors.hpp"
#include "forestore/log.hpp"
#include "forestore/random.hpp"

namespace forestore {

std::size_t Schema::total_level_count() const {
  std::size_t total = 0;
  for (const auto& a : attributes) total += a.levels.size();
  return total;
}

std::optional<std::size_t> Schema::find_attribute(std::string_view name) const {
  for (std::size_t a = 0; a < attributes.size(); ++a)
    if (attributes[a].name == name) return a;
  return std::nullopt;
}

namespace {

void check_unique(const std::vector<std::string>& values, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& v : values) {
    if (!seen.insert(v).second) throw DataError("duplicate level '" + v + "' in " + what);
  }
}

}  // namespace

void Schema::validate() const {
  if (class_levels.size() < 2)
    throw DataError("class column '" + class_name + "' needs at least 2 levels");
  check_unique(class_levels, "class column '" + class_name + "'");
  for (const auto& a : attributes) {
    if (a.levels.empty()) throw DataError("attribute '" + a.name + "' has no levels");
    check_unique(a.levels, "attribute '" + a.name + "'");
  }
}

Dataset::Dataset(Schema schema, std::vector<LevelIndex> cells, std::vector<ClassIndex> labels)
    : schema_(std::move(schema)), cells_(std::move(cells)), labels_(std::move(labels)) {
  schema_.validate();
  if (labels_.empty()) throw DataError("dataset must contain at least one row");
  const std::size_t p = schema_.attribute_count();
  if (cells_.size() != labels_.size() * p)
    throw DataError("cell count does not match rows x attributes");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= schema_.class_count())
      throw DataError("class index out of range at row " + std::to_string(i));
    for (std::size_t a = 0; a < p; ++a) {
      if (cells_[i * p + a] >= schema_.attributes[a].levels.size())
        throw DataError("level index out of range at row " + std::to_string(i) +
                        ", attribute '" + schema_.attributes[a].name + "'");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count(), 0);
  for (ClassIndex y : labels_) ++counts[y];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const std::size_t p = attribute_count();
  std::vector<LevelIndex> cells;
  cells.reserve(rows.size() * p);
  std::vector<ClassIndex> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw DataError("subset row index out of range");
    auto src = row(r);
    cells.insert(cells.end(), src.begin(), src.end());
    labels.push_back(labels_[r]);
  }
  return Dataset(schema_, std::move(cells), std::move(labels));
}

namespace {

// Permutation old -> new that puts levels in first-appearance order; unseen
// levels follow in their previous order.
template <typename Get>
std::vector<uint32_t> first_appearance_order(std::size_t vocab, std::size_t n, Get get) {
  std::vector<uint32_t> remap(vocab, UINT32_MAX);
  uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const uint32_t v = get(i);
    if (remap[v] == UINT32_MAX) remap[v] = next++;
  }
  for (auto& r : remap)
    if (r == UINT32_MAX) r = next++;
  return remap;
}

std::vector<std::string> apply_order(const std::vector<std::string>& values,
                                     const std::vector<uint32_t>& remap) {
  std::vector<std::string> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[remap[k]] = values[k];
  return out;
}

}  // namespace

Dataset Dataset::canonical() const {
  Schema schema = schema_;
  std::vector<LevelIndex> cells = cells_;
  std::vector<ClassIndex> labels = labels_;
  const std::size_t p = attribute_count();
  for (std::size_t a = 0; a < p; ++a) {
    auto remap = first_appearance_order(schema.attributes[a].levels.size(), size(),
                                        [&](std::size_t i) { return level(i, a); });
    schema.attributes[a].levels = apply_order(schema.attributes[a].levels, remap);
    for (std::size_t i = 0; i < size(); ++i) cells[i * p + a] = remap[level(i, a)];
  }
  auto remap = first_appearance_order(class_count(), size(),
                                      [&](std::size_t i) { return labels_[i]; });
  schema.class_levels = apply_order(schema.class_levels, remap);
  for (auto& y : labels) y = remap[y];
  return Dataset(std::move(schema), std::move(cells), std::move(labels));
}

Dataset Dataset::conform_to(const Schema& target) const {
  Schema schema = target;
  const std::size_t p = target.attribute_count();
  std::vector<std::size_t> source_attr(p);
  std::vector<std::vector<LevelIndex>> level_map(p);
  for (std::size_t a = 0; a < p; ++a) {
    auto found = schema_.find_attribute(target.attributes[a].name);
    if (!found) throw DataError("attribute '" + target.attributes[a].name + "' missing");
    source_attr[a] = *found;
    auto& vocab = schema.attributes[a].levels;
    for (const auto& name : schema_.attributes[*found].levels) {
      auto it = std::find(vocab.begin(), vocab.end(), name);
      if (it == vocab.end()) {
        vocab.push_back(name);
        it = vocab.end() - 1;
      }
      level_map[a].push_back(static_cast<LevelIndex>(it - vocab.begin()));
    }
  }
  std::vector<ClassIndex> class_map;
  for (const auto& name : schema_.class_levels) {
    auto it = std::find(schema.class_levels.begin(), schema.class_levels.end(), name);
    if (it == schema.class_levels.end()) {
      schema.class_levels.push_back(name);
      it = schema.class_levels.end() - 1;
    }
    class_map.push_back(static_cast<ClassIndex>(it - schema.class_levels.begin()));
  }
  std::vector<LevelIndex> cells(size() * p);
  std::vector<ClassIndex> labels(size());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t a = 0; a < p; ++a) cells[i * p + a] = level_map[a][level(i, source_attr[a])];
    labels[i] = class_map[labels_[i]];
  }
  return Dataset(std::move(schema), std::move(cells), std::move(labels));
}

Dataset generate_xor(uint64_t seed, std::size_t n) {
  if (n < 16) throw ConfigError("generate_xor needs n >= 16");
  Rng rng(derive_seed(seed, "xor"));
  std::vector<std::size_t> per_cell(16, n / 16);
  std::vector<std::size_t> cells_order(16);
  std::iota(cells_order.begin(), cells_order.end(), 0);
  shuffle(std::span<std::size_t>(cells_order), rng);
  for (std::size_t k = 0; k < n % 16; ++k) ++per_cell[cells_order[k]];

  Schema schema;
  schema.attributes = {{"A", {"A1", "A2", "A3", "A4"}},
                       {"B", {"B1", "B2", "B3", "B4"}},
                       {"C", {"C1", "C2"}}};
  schema.class_name = "Y";
  schema.class_levels = {"0", "1"};

  struct Row {
    LevelIndex a, b, c;
    ClassIndex y;
  };
  std::vector<Row> rows;
  rows.reserve(n);
  for (LevelIndex a = 0; a < 4; ++a) {
    for (LevelIndex b = 0; b < 4; ++b) {
      // A1/A3 and B1/B3 are the even indices.
      const bool a_in_13 = (a % 2) == 0;
      const bool b_in_13 = (b % 2) == 0;
      const ClassIndex y = (a_in_13 == b_in_13) ? 1 : 0;
      const LevelIndex c = (a >= 2 && b >= 2) ? 0 : 1;
      for (std::size_t k = 0; k < per_cell[a * 4 + b]; ++k) rows.push_back({a, b, c, y});
    }
  }
  shuffle(std::span<Row>(rows), rng);
  std::vector<LevelIndex> cells;
  cells.reserve(n * 3);
  std::vector<ClassIndex> labels;
  labels.reserve(n);
  for (const auto& r : rows) {
    cells.insert(cells.end(), {r.a, r.b, r.c});
    labels.push_back(r.y);
  }
  return Dataset(std::move(schema), std::move(cells), std::move(labels)).canonical();
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    const Dataset& ds, double train_ratio, uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw ConfigError("train_ratio must lie strictly between 0 and 1");
  const std::size_t k = ds.class_count();
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.label(i)].push_back(i);

  std::vector<std::size_t> quota(k, 0);
  std::vector<double> fraction(k, 0.0);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t size = by_class[c].size();
    if (size == 0) continue;
    if (size < 2) {
      throw DataError("class '" + ds.schema().class_levels[c] +
                      "' has fewer than 2 instances; cannot stratify");
    }
    const double exact = train_ratio * static_cast<double>(size);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    fraction[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  const auto target = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(ds.size())));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fraction[a] > fraction[b]; });
  for (std::size_t c : order) {
    if (assigned >= target) break;
    if (by_class[c].empty() || fraction[c] <= 0.0) continue;
    ++quota[c];
    ++assigned;
  }
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t size = by_class[c].size();
    if (size == 0) continue;
    quota[c] = std::clamp<std::size_t>(quota[c], 1, size - 1);
  }

  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(derive_seed(seed, "split", c));
    auto& members = by_class[c];
    shuffle(std::span<std::size_t>(members), rng);
    train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_ratio,
                                             uint64_t seed) {
  auto [train, test] = stratified_split_indices(ds, train_ratio, seed);
  return {ds.subset(train), ds.subset(test)};
}

namespace {

std::string format_cut(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value);
  return buf;
}

// Type-7 sample quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Binned {
  std::vector<std::string> levels;
  std::vector<LevelIndex> codes;
};

Binned bin_column(const std::string& name, const std::vector<double>& values, std::size_t bins) {
  for (double v : values)
    if (!std::isfinite(v)) throw DataError("non-finite value in numeric column '" + name + "'");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (std::size_t k = 1; k < bins; ++k) {
    const double c = quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(bins));
    if (c >= sorted.back()) continue;  // would leave an empty top bin
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  // Drop cuts that leave an interval empty.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double lower = k == 0 ? -INFINITY : cuts[k - 1];
      const bool populated = std::any_of(sorted.begin(), sorted.end(), [&](double v) {
        return v > lower && v <= cuts[k];
      });
      if (!populated) {
        cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }
  if (cuts.empty() && bins > 1) {
    log_warning("column '" + name + "' is constant; discretized to a single level");
  }
  int precision = 6;
  std::vector<std::string> labels;
  for (;;) {
    labels.clear();
    std::vector<std::string> text;
    for (double c : cuts) text.push_back(format_cut(c, precision));
    if (cuts.empty()) {
      labels.push_back("(-inf,inf)");
    } else {
      labels.push_back("(-inf," + text.front() + "]");
      for (std::size_t k = 1; k < cuts.size(); ++k)
        labels.push_back("(" + text[k - 1] + "," + text[k] + "]");
      labels.push_back("(" + text.back() + ",inf)");
    }
    std::set<std::string> unique(text.begin(), text.end());
    if (unique.size() == text.size() || precision >= 17) break;
    precision += 2;
  }
  Binned out;
  out.levels = labels;
  out.codes.reserve(values.size());
  for (double v : values) {
    auto it = std::lower_bound(cuts.begin(), cuts.end(), v);
    out.codes.push_back(static_cast<LevelIndex>(it - cuts.begin()));
  }
  return out;
}

}  // namespace

Dataset quantile_discretize(const NumericTable& table, std::size_t bins) {
  if (bins < 2) throw ConfigError("quantile_discretize needs bins >= 2");
  if (table.columns.size() != table.column_names.size())
    throw DataError("numeric table column names do not match columns");
  const std::size_t n = table.labels.size();
  for (const auto& col : table.columns)
    if (col.size() != n) throw DataError("numeric column length differs from label count");
  Schema schema;
  schema.class_name = table.class_name;
  std::vector<std::vector<LevelIndex>> codes;
  for (std::size_t a = 0; a < table.columns.size(); ++a) {
    Binned b = bin_column(table.column_names[a], table.columns[a], bins);
    schema.attributes.push_back({table.column_names[a], std::move(b.levels)});
    codes.push_back(std::move(b.codes));
  }
  std::vector<ClassIndex> labels;
  labels.reserve(n);
  for (const auto& label : table.labels) {
    auto it = std::find(schema.class_levels.begin(), schema.class_levels.end(), label);
    if (it == schema.class_levels.end()) {
      schema.class_levels.push_back(label);
      it = schema.class_levels.end() - 1;
    }
    labels.push_back(static_cast<ClassIndex>(it - schema.class_levels.begin()));
  }
  std::vector<LevelIndex> cells(n * codes.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < codes.size(); ++a) cells[i * codes.size() + a] = codes[a][i];
  return Dataset(std::move(schema), std::move(cells), std::move(labels));
}

namespace {

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  if (begin == end) return std::nullopt;
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

Dataset dataset_from_raw(const RawTable& raw, const TargetColumn& target, std::size_t bins) {
  if (raw.header.size() < 2) throw DataError("CSV needs at least 2 columns");
  if (raw.rows.empty()) throw DataError("CSV has no data rows");
  std::size_t target_col = raw.header.size() - 1;
  if (target.name != "last") {
    auto it = std::find(raw.header.begin(), raw.header.end(), target.name);
    if (it == raw.header.end()) throw DataError("unknown target column '" + target.name + "'");
    target_col = static_cast<std::size_t>(it - raw.header.begin());
  }
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (raw.rows[r].size() != raw.header.size())
      throw DataError("ragged row " + std::to_string(r + 1));
    for (std::size_t c = 0; c < raw.header.size(); ++c) {
      if (raw.rows[r][c].empty())
        throw DataError("empty cell at data row " + std::to_string(r + 1) + ", column '" +
                        raw.header[c] + "' (missing values are not supported)");
    }
  }
  const std::size_t n = raw.rows.size();
  Schema schema;
  schema.class_name = raw.header[target_col];
  std::vector<std::vector<LevelIndex>> codes;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    if (c == target_col) continue;
    bool numeric = bins > 0;
    std::vector<double> values;
    if (numeric) {
      values.reserve(n);
      for (const auto& row : raw.rows) {
        auto v = parse_number(row[c]);
        if (!v) {
          numeric = false;
          break;
        }
        values.push_back(*v);
      }
    }
    if (numeric) {
      std::set<double> distinct(values.begin(), values.end());
      numeric = distinct.size() > bins;
    }
    if (numeric) {
      Binned b = bin_column(raw.header[c], values, bins);
      schema.attributes.push_back({raw.header[c], std::move(b.levels)});
      codes.push_back(std::move(b.codes));
      continue;
    }
    Attribute attribute{raw.header[c], {}};
    std::unordered_map<std::string, LevelIndex> index;
    std::vector<LevelIndex> column;
    column.reserve(n);
    for (const auto& row : raw.rows) {
      auto [it, inserted] = index.try_emplace(row[c], static_cast<LevelIndex>(attribute.levels.size()));
      if (inserted) attribute.levels.push_back(row[c]);
      column.push_back(it->second);
    }
    schema.attributes.push_back(std::move(attribute));
    codes.push_back(std::move(column));
  }
  std::unordered_map<std::string, ClassIndex> class_index;
  std::vector<ClassIndex> labels;
  labels.reserve(n);
  for (const auto& row : raw.rows) {
    auto [it, inserted] =
        class_index.try_emplace(row[target_col], static_cast<ClassIndex>(schema.class_levels.size()));
    if (inserted) schema.class_levels.push_back(row[target_col]);
    labels.push_back(it->second);
  }
  const std::size_t p = codes.size();
  std::vector<LevelIndex> cells(n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) cells[i * p + a] = codes[a][i];
  return Dataset(std::move(schema), std::move(cells), std::move(labels));
}

}  // namespace forestore
