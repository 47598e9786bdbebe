#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "forestore/enrich.hpp"
#include "forestore/forest.hpp"
#include "forestore/preselect.hpp"
#include "forestore/selection.hpp"

namespace forestore {

struct CvParams {
  std::size_t splits = 10;
  double train_ratio = 0.7;
};

struct PipelineConfig {
  uint64_t seed = 1;
  ForestParams forest;
  PreselectParams preselect;
  SelectionParams selection;
  SolverOptions solver;
  EnrichParams enrich;
  CvParams cv;
  std::string target = "last";
  std::size_t bins = 0;  // quantile bins for numeric columns; 0 keeps them as-is
  std::size_t threads = 1;
  std::filesystem::path output_dir = "forest-ore-out";

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// INI text: "[section]" headers and "key = value" lines; '#' and ';' start
// comments. Keys are also addressable as "section.key" through
// apply_setting, which is how command-line overrides are applied.
//
//   [run]        seed target bins threads output_dir
//   [forest]     n_trees mtry min_leaf
//   [preselect]  min_conf min_class_cov max_len max_simil
//   [selection]  w0 w1 w2 w3 maxcover maxoverlap alpha beta
//   [solver]     kind exact_max_rules node_limit time_limit restarts
//   [enrich]     arm_minconf arm_minsup
//   [cv]         splits train_ratio
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);
std::string config_to_ini(const PipelineConfig& config);

}  // namespace forestore
