#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace forestore {

using LevelIndex = uint32_t;
using ClassIndex = uint32_t;

struct Attribute {
  std::string name;
  std::vector<std::string> levels;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

// Attribute vocabularies plus the class column. Shared by a dataset, the
// forest trained on it and every rule mined from that forest.
struct Schema {
  std::vector<Attribute> attributes;
  std::string class_name;
  std::vector<std::string> class_levels;

  std::size_t attribute_count() const { return attributes.size(); }
  std::size_t class_count() const { return class_levels.size(); }
  // Sum of vocabulary sizes over all attributes.
  std::size_t total_level_count() const;
  std::optional<std::size_t> find_attribute(std::string_view name) const;

  // Throws DataError on empty or duplicate vocabularies or fewer than two
  // classes.
  void validate() const;

  friend bool operator==(const Schema&, const Schema&) = default;
};

// Categorical table: n rows of level indices plus one class label per row.
// Immutable after construction.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<LevelIndex> cells, std::vector<ClassIndex> labels);

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t attribute_count() const { return schema_.attribute_count(); }
  std::size_t class_count() const { return schema_.class_count(); }

  LevelIndex level(std::size_t row, std::size_t attribute) const {
    return cells_[row * schema_.attribute_count() + attribute];
  }
  std::span<const LevelIndex> row(std::size_t i) const {
    return {cells_.data() + i * schema_.attribute_count(), schema_.attribute_count()};
  }
  ClassIndex label(std::size_t row) const { return labels_[row]; }
  std::span<const ClassIndex> labels() const { return labels_; }

  std::vector<std::size_t> class_counts() const;

  // Rows selected by index, in the given order; schema unchanged.
  Dataset subset(std::span<const std::size_t> rows) const;

  // Same rows with every vocabulary (attributes and class) reordered to first
  // appearance. A dataset produced by load_csv is already canonical.
  Dataset canonical() const;

  // Re-expresses this dataset in `target`'s vocabularies. Attributes are
  // matched by name, classes by label. Levels unknown to `target` are appended
  // to the returned schema's vocabularies, so rules and trees built on
  // `target` treat them as "not in any subset".
  Dataset conform_to(const Schema& target) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Schema schema_;
  std::vector<LevelIndex> cells_;
  std::vector<ClassIndex> labels_;
};

// Selects the class column: a header name, or "last".
struct TargetColumn {
  std::string name = "last";
};

Dataset read_csv(std::istream& in, const TargetColumn& target = {});
Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target = {});
void write_csv(const Dataset& ds, std::ostream& out);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

// Synthetic XOR data: A in {A1..A4}, B in {B1..B4}, C in {C1,C2}; Y = 1 when
// A in {A1,A3} and B in {B1,B3}, or A in {A2,A4} and B in {B2,B4}. C is C1
// exactly when A in {A3,A4} and B in {B3,B4}. The 16 (A,B) cells hold n/16
// rows each, the remainder spread one row apiece over seeded-random cells.
// Rows are shuffled and the result is canonical.
Dataset generate_xor(uint64_t seed, std::size_t n = 840);

// Class-stratified random split. Per-class train counts are apportioned by
// largest remainder so that the total is round(train_ratio * n) and each
// class lands within one instance of train_ratio * class size; every class
// keeps at least one row on each side. Rows keep their original order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_ratio,
                                             uint64_t seed);

// Index-level variant used by the cross-validation driver.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    const Dataset& ds, double train_ratio, uint64_t seed);

// Numeric input for the fallback discretizer.
struct NumericTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;  // column-major
  std::string class_name;
  std::vector<std::string> labels;
};

// Maps each numeric column to at most `bins` intervals cut at empirical
// quantiles (linear interpolation between order statistics). Duplicate cut
// points are merged; a constant column becomes a single level with a warning.
// Labels read "(-inf,c1]", "(c1,c2]", ..., "(ck,inf)".
Dataset quantile_discretize(const NumericTable& table, std::size_t bins);

// Raw string table as read from CSV, before any typing.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_raw_csv(std::istream& in);
RawTable load_raw_csv(const std::filesystem::path& path);

// Builds a dataset from a raw table. When `bins` > 0, every non-target column
// whose cells all parse as finite numbers and that has more than `bins`
// distinct values is quantile-discretized; other columns stay categorical.
Dataset dataset_from_raw(const RawTable& raw, const TargetColumn& target,
                         std::size_t bins = 0);

}  // namespace forestore
