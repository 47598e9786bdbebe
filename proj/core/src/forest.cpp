#include "forestore/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forestore/errors.hpp"
#include "forestore/log.hpp"
#include "forestore/parallel.hpp"
#include "forestore/random.hpp"

namespace forestore {

bool TreeNode::goes_left(LevelIndex level) const {
  return std::binary_search(left_levels.begin(), left_levels.end(), level);
}

std::size_t Tree::leaf_for(std::span<const LevelIndex> row) const {
  std::size_t k = 0;
  while (!nodes[k].is_leaf()) {
    const TreeNode& node = nodes[k];
    k = static_cast<std::size_t>(node.goes_left(row[static_cast<std::size_t>(node.attribute)])
                                     ? node.left
                                     : node.right);
  }
  return k;
}

ClassIndex Tree::predict(std::span<const LevelIndex> row) const {
  return nodes[leaf_for(row)].class_index;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Forest::Forest(Schema schema, std::vector<Tree> trees, ForestParams params)
    : schema_(std::move(schema)), trees_(std::move(trees)), params_(params) {
  if (trees_.empty()) throw DataError("forest needs at least one tree");
  for (const auto& tree : trees_) {
    if (tree.nodes.empty()) throw DataError("tree without nodes");
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        if (node.class_index >= schema_.class_count()) throw DataError("leaf class out of range");
        continue;
      }
      const auto a = static_cast<std::size_t>(node.attribute);
      if (a >= schema_.attribute_count()) throw DataError("split attribute out of range");
      const std::size_t vocab = schema_.attributes[a].levels.size();
      if (node.left_levels.empty() || node.left_levels.size() >= vocab ||
          node.left_levels.back() >= vocab ||
          !std::is_sorted(node.left_levels.begin(), node.left_levels.end()))
        throw DataError("invalid left level subset");
      const auto count = static_cast<int32_t>(tree.nodes.size());
      if (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count)
        throw DataError("invalid child index");
    }
  }
}

namespace {

struct Split {
  bool valid = false;
  std::size_t attribute = 0;
  std::vector<LevelIndex> left;
  double score = 0.0;
};

// Score = sum over children of sum_c count_c^2 / child_size. Maximizing it is
// the same as maximizing the weighted Gini decrease.
double child_term(std::span<const uint32_t> counts, uint32_t size) {
  double s = 0.0;
  for (uint32_t c : counts) s += static_cast<double>(c) * c;
  return s / size;
}

bool better(const Split& candidate, const Split& incumbent) {
  if (!incumbent.valid) return true;
  const double tol = 1e-12 * std::max(1.0, std::abs(incumbent.score));
  if (candidate.score > incumbent.score + tol) return true;
  if (candidate.score < incumbent.score - tol) return false;
  if (candidate.attribute != incumbent.attribute) return candidate.attribute < incumbent.attribute;
  return candidate.left < incumbent.left;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestParams& params, std::size_t mtry, uint64_t seed)
      : data_(data), params_(params), mtry_(mtry), rng_(seed), classes_(data.class_count()) {}

  Tree build() {
    Tree tree;
    const std::size_t n = data_.size();
    tree.bootstrap.resize(n);
    for (auto& r : tree.bootstrap) r = static_cast<uint32_t>(uniform_below(rng_, n));

    struct Pending {
      std::size_t node;
      std::vector<uint32_t> rows;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, tree.bootstrap});
    while (!stack.empty()) {
      Pending work = std::move(stack.back());
      stack.pop_back();
      std::vector<uint32_t> counts(classes_, 0);
      for (uint32_t r : work.rows) ++counts[data_.label(r)];
      {
        TreeNode& node = tree.nodes[work.node];
        node.class_counts = counts;
        node.class_index = static_cast<ClassIndex>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
      }
      const std::size_t nonzero =
          static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](uint32_t c) { return c > 0; }));
      if (nonzero <= 1 || work.rows.size() < 2 * params_.min_leaf) continue;

      Split best = find_split(work.rows, counts);
      if (!best.valid) continue;

      std::vector<uint32_t> left_rows;
      std::vector<uint32_t> right_rows;
      for (uint32_t r : work.rows) {
        const LevelIndex level = data_.level(r, best.attribute);
        if (std::binary_search(best.left.begin(), best.left.end(), level))
          left_rows.push_back(r);
        else
          right_rows.push_back(r);
      }
      const auto left_index = static_cast<int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[work.node];
      node.attribute = static_cast<int32_t>(best.attribute);
      node.left_levels = std::move(best.left);
      node.left = left_index;
      node.right = left_index + 1;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({static_cast<std::size_t>(left_index + 1), std::move(right_rows)});
      stack.push_back({static_cast<std::size_t>(left_index), std::move(left_rows)});
    }
    return tree;
  }

 private:
  Split find_split(const std::vector<uint32_t>& rows, const std::vector<uint32_t>& counts) {
    const std::size_t p = data_.attribute_count();
    std::vector<std::size_t> attributes(p);
    std::iota(attributes.begin(), attributes.end(), 0);
    // Partial Fisher-Yates draw of mtry attributes.
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(uniform_below(rng_, p - k));
      std::swap(attributes[k], attributes[j]);
    }
    std::vector<std::size_t> drawn(attributes.begin(), attributes.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(drawn.begin(), drawn.end());

    Split best;
    for (std::size_t a : drawn) consider_attribute(a, rows, counts, best);
    // Attributes constant in the node cannot split it; keep drawing.
    for (std::size_t k = mtry_; !best.valid && k < p; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(uniform_below(rng_, p - k));
      std::swap(attributes[k], attributes[j]);
      consider_attribute(attributes[k], rows, counts, best);
    }
    return best;
  }

  void consider_attribute(std::size_t a, const std::vector<uint32_t>& rows,
                          const std::vector<uint32_t>& node_counts, Split& best) {
    const std::size_t vocab = data_.schema().attributes[a].levels.size();
    // level x class contingency table
    std::vector<uint32_t> table(vocab * classes_, 0);
    std::vector<uint32_t> level_size(vocab, 0);
    for (uint32_t r : rows) {
      const LevelIndex level = data_.level(r, a);
      ++table[level * classes_ + data_.label(r)];
      ++level_size[level];
    }
    std::vector<LevelIndex> present;
    for (LevelIndex l = 0; l < vocab; ++l)
      if (level_size[l] > 0) present.push_back(l);
    if (present.size() < 2) return;

    const auto total = static_cast<uint32_t>(rows.size());
    std::vector<uint32_t> left_counts(classes_);
    std::vector<uint32_t> right_counts(classes_);
    auto evaluate = [&](const std::vector<LevelIndex>& left) {
      std::fill(left_counts.begin(), left_counts.end(), 0);
      uint32_t left_size = 0;
      for (LevelIndex l : left) {
        left_size += level_size[l];
        for (std::size_t c = 0; c < classes_; ++c) left_counts[c] += table[l * classes_ + c];
      }
      const uint32_t right_size = total - left_size;
      if (left_size < params_.min_leaf || right_size < params_.min_leaf) return;
      if (left_size == 0 || right_size == 0) return;
      for (std::size_t c = 0; c < classes_; ++c) right_counts[c] = node_counts[c] - left_counts[c];
      Split candidate;
      candidate.valid = true;
      candidate.attribute = a;
      candidate.score = child_term(left_counts, left_size) + child_term(right_counts, right_size);
      candidate.left = left;
      if (better(candidate, best)) best = std::move(candidate);
    };

    if (present.size() <= 10) {
      const uint32_t subsets = (1U << present.size()) - 1;
      std::vector<LevelIndex> left;
      for (uint32_t mask = 1; mask < subsets; ++mask) {
        left.clear();
        for (std::size_t k = 0; k < present.size(); ++k)
          if (mask & (1U << k)) left.push_back(present[k]);
        evaluate(left);
      }
      return;
    }
    // Many levels: order by the proportion of the node's majority class and
    // scan the prefix partitions.
    const auto majority = static_cast<std::size_t>(
        std::max_element(node_counts.begin(), node_counts.end()) - node_counts.begin());
    std::vector<LevelIndex> order = present;
    std::stable_sort(order.begin(), order.end(), [&](LevelIndex x, LevelIndex y) {
      const double px = static_cast<double>(table[x * classes_ + majority]) / level_size[x];
      const double py = static_cast<double>(table[y * classes_ + majority]) / level_size[y];
      return px < py;
    });
    for (std::size_t cut = 1; cut < order.size(); ++cut) {
      std::vector<LevelIndex> left(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
      std::sort(left.begin(), left.end());
      evaluate(left);
    }
  }

  const Dataset& data_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng rng_;
  std::size_t classes_;
};

}  // namespace

Forest train_forest(const Dataset& train, const ForestParams& params) {
  if (params.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (params.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  const std::size_t p = train.attribute_count();
  if (p == 0) throw ConfigError("training data has no attributes");
  std::size_t mtry = params.mtry;
  if (mtry == 0) mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
  if (mtry > p) throw ConfigError("mtry must not exceed the number of attributes");

  const auto counts = train.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    log_warning("training data holds a single class; every tree is a single leaf");

  ForestParams effective = params;
  effective.mtry = mtry;
  std::vector<Tree> trees(params.n_trees);
  parallel_for(params.n_trees, params.threads, [&](std::size_t t) {
    TreeBuilder builder(train, effective, mtry, derive_seed(params.seed, "tree", t));
    trees[t] = builder.build();
  });
  return Forest(train.schema(), std::move(trees), effective);
}

std::vector<uint32_t> forest_votes(const Forest& forest, const Dataset& ds) {
  if (ds.attribute_count() != forest.schema().attribute_count())
    throw DataError("dataset schema does not match the forest");
  const std::size_t k = ds.class_count();
  std::vector<uint32_t> votes(ds.size() * k, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto row = ds.row(i);
    for (const auto& tree : forest.trees()) ++votes[i * k + tree.predict(row)];
  }
  return votes;
}

std::vector<ClassIndex> predict_forest(const Forest& forest, const Dataset& ds) {
  const auto votes = forest_votes(forest, ds);
  const std::size_t k = ds.class_count();
  std::vector<ClassIndex> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto begin = votes.begin() + static_cast<std::ptrdiff_t>(i * k);
    out[i] = static_cast<ClassIndex>(std::max_element(begin, begin + static_cast<std::ptrdiff_t>(k)) - begin);
  }
  return out;
}

double forest_error(const Forest& forest, const Dataset& ds) {
  const auto predictions = predict_forest(forest, ds);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) wrong += predictions[i] != ds.label(i);
  return static_cast<double>(wrong) / static_cast<double>(ds.size());
}

}  // namespace forestore
