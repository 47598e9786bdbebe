#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forestore/dataset.hpp"

namespace forestore {

// One node of a binary categorical tree. Internal nodes send an instance left
// when its level for `attribute` is in `left_levels` (sorted, a proper
// non-empty subset of the vocabulary); any other level, including one unseen
// at training time, goes right. Leaves carry the majority class of the
// bootstrap rows that reached them.
struct TreeNode {
  int32_t attribute = -1;
  std::vector<LevelIndex> left_levels;
  int32_t left = -1;
  int32_t right = -1;
  ClassIndex class_index = 0;
  std::vector<uint32_t> class_counts;

  bool is_leaf() const { return attribute < 0; }
  bool goes_left(LevelIndex level) const;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  // Training-row indices drawn for this tree, with repetition.
  std::vector<uint32_t> bootstrap;

  ClassIndex predict(std::span<const LevelIndex> row) const;
  // Index of the leaf reached by `row`.
  std::size_t leaf_for(std::span<const LevelIndex> row) const;
  std::size_t leaf_count() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t mtry = 0;  // 0: floor(sqrt(#attributes)), at least 1
  std::size_t min_leaf = 1;
  uint64_t seed = 1;
  std::size_t threads = 1;  // 0: hardware concurrency; never changes the result

  // Thread count excluded: it does not affect the trained forest.
  friend bool operator==(const ForestParams& a, const ForestParams& b) {
    return a.n_trees == b.n_trees && a.mtry == b.mtry && a.min_leaf == b.min_leaf &&
           a.seed == b.seed;
  }
};

class Forest {
 public:
  Forest(Schema schema, std::vector<Tree> trees, ForestParams params);

  const Schema& schema() const { return schema_; }
  const std::vector<Tree>& trees() const { return trees_; }
  std::size_t size() const { return trees_.size(); }
  const ForestParams& params() const { return params_; }

  friend bool operator==(const Forest&, const Forest&) = default;

 private:
  Schema schema_;
  std::vector<Tree> trees_;
  ForestParams params_;
};

// Grows n_trees CART-style trees, each on a bootstrap sample of the training
// rows. At every node mtry attributes are drawn without replacement and the
// binary level-subset split with the largest Gini decrease among them is
// taken (exhaustive for <= 10 levels present in the node, ordered by class
// probability above that). A node becomes a leaf when it is pure, too small
// to honor min_leaf on both sides, or no attribute admits a split. When none
// of the mtry drawn attributes can split the node, further attributes are
// drawn one at a time until one can. Ties go to the lowest attribute index,
// then the lexicographically smallest left subset. Each tree uses its own seed derived from params.seed.
Forest train_forest(const Dataset& train, const ForestParams& params);

// Plurality vote over trees; ties go to the lowest class index. `ds` must use
// the forest's schema (see Dataset::conform_to).
std::vector<ClassIndex> predict_forest(const Forest& forest, const Dataset& ds);

// Vote counts per instance and class, row-major n x classes.
std::vector<uint32_t> forest_votes(const Forest& forest, const Dataset& ds);

// Misclassification rate of predict_forest on `ds`.
double forest_error(const Forest& forest, const Dataset& ds);

// Versioned JSON document; level subsets are stored as sorted index arrays.
std::string forest_to_json(const Forest& forest);
Forest forest_from_json(const std::string& text);
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace forestore
