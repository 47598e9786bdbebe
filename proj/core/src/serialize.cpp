#include "forestore/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forestore/errors.hpp"
#include "forestore/forest.hpp"

namespace forestore {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json schema_json(const Schema& schema) {
  json atts = json::array();
  for (const auto& a : schema.attributes) atts.push_back({{"name", a.name}, {"levels", a.levels}});
  return {{"attributes", atts}, {"class_name", schema.class_name}, {"class_levels", schema.class_levels}};
}

Schema schema_from(const json& j) {
  Schema s;
  for (const auto& a : j.at("attributes"))
    s.attributes.push_back({a.at("name").get<std::string>(), a.at("levels").get<std::vector<std::string>>()});
  s.class_name = j.at("class_name").get<std::string>();
  s.class_levels = j.at("class_levels").get<std::vector<std::string>>();
  s.validate();
  return s;
}

void check_header(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format)
    throw DataError(std::string("not a ") + format + " document");
  if (j.value("version", 0) != kVersion)
    throw DataError(std::string("unsupported ") + format + " version");
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed document: ") + e.what());
  }
}

json rule_json(const Rule& r) {
  json terms = json::array();
  for (const auto& t : r.condition.terms()) terms.push_back({{"attribute", t.attribute}, {"levels", t.levels}});
  return {{"id", r.id}, {"ypred", r.ypred}, {"terms", terms}};
}

Rule rule_from(const json& j, const Schema& schema) {
  std::vector<Term> terms;
  for (const auto& t : j.at("terms"))
    terms.push_back({t.at("attribute").get<std::size_t>(), t.at("levels").get<std::vector<LevelIndex>>()});
  Rule r{j.at("id").get<RuleId>(), Condition(std::move(terms), schema), j.at("ypred").get<ClassIndex>()};
  if (r.ypred >= schema.class_count()) throw DataError("rule class out of range");
  return r;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string forest_to_json(const Forest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"class", node.class_index}, {"counts", node.class_counts}});
      } else {
        nodes.push_back({{"attribute", node.attribute},
                         {"left_levels", node.left_levels},
                         {"left", node.left},
                         {"right", node.right},
                         {"class", node.class_index},
                         {"counts", node.class_counts}});
      }
    }
    trees.push_back({{"bootstrap", tree.bootstrap}, {"nodes", nodes}});
  }
  const auto& p = forest.params();
  json doc = {{"format", "forestore.forest"},
              {"version", kVersion},
              {"schema", schema_json(forest.schema())},
              {"params", {{"n_trees", p.n_trees}, {"mtry", p.mtry}, {"min_leaf", p.min_leaf}, {"seed", p.seed}}},
              {"trees", trees}};
  return doc.dump() + "\n";
}

Forest forest_from_json(const std::string& text) {
  const json doc = parse(text);
  check_header(doc, "forestore.forest");
  return guarded([&] {
    Schema schema = schema_from(doc.at("schema"));
    ForestParams params;
    const auto& jp = doc.at("params");
    params.n_trees = jp.at("n_trees").get<std::size_t>();
    params.mtry = jp.at("mtry").get<std::size_t>();
    params.min_leaf = jp.at("min_leaf").get<std::size_t>();
    params.seed = jp.at("seed").get<uint64_t>();
    std::vector<Tree> trees;
    for (const auto& jt : doc.at("trees")) {
      Tree tree;
      tree.bootstrap = jt.at("bootstrap").get<std::vector<uint32_t>>();
      for (const auto& jn : jt.at("nodes")) {
        TreeNode node;
        node.class_index = jn.at("class").get<ClassIndex>();
        node.class_counts = jn.at("counts").get<std::vector<uint32_t>>();
        if (jn.contains("attribute")) {
          node.attribute = jn.at("attribute").get<int32_t>();
          node.left_levels = jn.at("left_levels").get<std::vector<LevelIndex>>();
          node.left = jn.at("left").get<int32_t>();
          node.right = jn.at("right").get<int32_t>();
        }
        tree.nodes.push_back(std::move(node));
      }
      trees.push_back(std::move(tree));
    }
    if (trees.size() != params.n_trees) throw DataError("tree count does not match n_trees");
    return Forest(std::move(schema), std::move(trees), params);
  });
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  write_text_file(path, forest_to_json(forest));
}

Forest load_forest(const std::filesystem::path& path) { return forest_from_json(read_text_file(path)); }

std::string rules_to_json(const Schema& schema, std::span<const Rule> rules) {
  json list = json::array();
  for (const auto& r : rules) list.push_back(rule_json(r));
  json doc = {{"format", "forestore.rules"}, {"version", kVersion}, {"schema", schema_json(schema)}, {"rules", list}};
  return doc.dump(1) + "\n";
}

RuleFile rules_from_json(const std::string& text) {
  const json doc = parse(text);
  check_header(doc, "forestore.rules");
  return guarded([&] {
    RuleFile f;
    f.schema = schema_from(doc.at("schema"));
    for (const auto& jr : doc.at("rules")) f.rules.push_back(rule_from(jr, f.schema));
    return f;
  });
}

void save_rules(const Schema& schema, std::span<const Rule> rules, const std::filesystem::path& path) {
  write_text_file(path, rules_to_json(schema, rules));
}

RuleFile load_rules(const std::filesystem::path& path) { return rules_from_json(read_text_file(path)); }

std::string classifier_to_json(const Schema& schema, const RuleClassifier& c) {
  json rules = json::array();
  for (const auto& r : c.rules) rules.push_back(rule_json(r));
  json trace = json::array();
  for (const auto& t : c.trace) trace.push_back({{"rule", t.rule}, {"freq", t.freq}, {"err", t.err}});
  json doc = {{"format", "forestore.model"},
              {"version", kVersion},
              {"schema", schema_json(schema)},
              {"mode", c.mode == ClassifierMode::kOrderedList ? "ordered_list" : "decision_set"},
              {"default_class", c.default_class},
              {"rules", rules},
              {"confidence", c.confidence},
              {"order", c.order},
              {"trace", trace}};
  return doc.dump(1) + "\n";
}

ModelFile classifier_from_json(const std::string& text) {
  const json doc = parse(text);
  check_header(doc, "forestore.model");
  return guarded([&] {
    ModelFile f;
    f.schema = schema_from(doc.at("schema"));
    auto& c = f.classifier;
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode == "ordered_list")
      c.mode = ClassifierMode::kOrderedList;
    else if (mode == "decision_set")
      c.mode = ClassifierMode::kDecisionSet;
    else
      throw DataError("unknown classifier mode '" + mode + "'");
    c.default_class = doc.at("default_class").get<ClassIndex>();
    if (c.default_class >= f.schema.class_count()) throw DataError("default class out of range");
    for (const auto& jr : doc.at("rules")) c.rules.push_back(rule_from(jr, f.schema));
    c.confidence = doc.at("confidence").get<std::vector<double>>();
    c.order = doc.at("order").get<std::vector<std::size_t>>();
    for (const auto& jt : doc.at("trace"))
      c.trace.push_back({jt.at("rule").get<std::size_t>(), jt.at("freq").get<double>(), jt.at("err").get<double>()});
    if (c.confidence.size() != c.rules.size()) throw DataError("confidence count does not match rules");
    for (std::size_t k : c.order)
      if (k >= c.rules.size()) throw DataError("order index out of range");
    return f;
  });
}

void save_classifier(const Schema& schema, const RuleClassifier& classifier,
                     const std::filesystem::path& path) {
  write_text_file(path, classifier_to_json(schema, classifier));
}

ModelFile load_classifier(const std::filesystem::path& path) {
  return classifier_from_json(read_text_file(path));
}

std::string solution_to_json(const SelectionProblem& p, const SelectionSolution& s) {
  json ids = json::array();
  for (std::size_t j : s.selected()) ids.push_back(p.rule_ids[j]);
  json violations = json::array();
  for (const auto& v : s.diagnostics)
    violations.push_back({{"constraint", v.constraint}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"slack", v.slack}});
  json doc = {{"format", "forestore.selection"},
              {"version", kVersion},
              {"status", to_string(s.status)},
              {"objective", s.objective},
              {"selected_rule_ids", ids},
              {"m", p.m},
              {"n", p.n},
              {"init_error", p.init_error},
              {"covered", s.is_covered.count()},
              {"errors", s.is_error.count()},
              {"overlap", s.is_overlap.count()},
              {"params",
               {{"w0", p.params.w0},
                {"w1", p.params.w1},
                {"w2", p.params.w2},
                {"w3", p.params.w3},
                {"maxcover", p.params.maxcover},
                {"maxoverlap", p.params.maxoverlap},
                {"alpha", p.params.alpha},
                {"beta", p.params.beta}}},
              {"stats",
               {{"solver", s.stats.solver},
                {"nodes", s.stats.nodes},
                {"iterations", s.stats.iterations},
                {"seconds", s.stats.seconds}}},
              {"violations", violations}};
  return doc.dump(2) + "\n";
}

}  // namespace forestore
