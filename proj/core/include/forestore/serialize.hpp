#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forestore/ensemble.hpp"
#include "forestore/rules.hpp"
#include "forestore/selection.hpp"

namespace forestore {

// Rules with the schema they index into.
struct RuleFile {
  Schema schema;
  std::vector<Rule> rules;
};

std::string rules_to_json(const Schema& schema, std::span<const Rule> rules);
RuleFile rules_from_json(const std::string& text);
void save_rules(const Schema& schema, std::span<const Rule> rules, const std::filesystem::path& path);
RuleFile load_rules(const std::filesystem::path& path);

struct ModelFile {
  Schema schema;
  RuleClassifier classifier;
};

std::string classifier_to_json(const Schema& schema, const RuleClassifier& classifier);
ModelFile classifier_from_json(const std::string& text);
void save_classifier(const Schema& schema, const RuleClassifier& classifier,
                     const std::filesystem::path& path);
ModelFile load_classifier(const std::filesystem::path& path);

// Status, objective, selected rule ids, counts of the derived indicators,
// solver statistics and remaining violations.
std::string solution_to_json(const SelectionProblem& p, const SelectionSolution& s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace forestore
