#include "forestore/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "forestore/errors.hpp"
#include "text.hpp"

namespace forestore {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

uint64_t to_uint(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed", [](auto& c, auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"run.target", [](auto& c, auto&, auto& v) { c.target = v; }},
      {"run.bins", [](auto& c, auto& k, auto& v) { c.bins = to_uint(k, v); }},
      {"run.threads", [](auto& c, auto& k, auto& v) { c.threads = to_uint(k, v); }},
      {"run.output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"forest.n_trees", [](auto& c, auto& k, auto& v) { c.forest.n_trees = to_uint(k, v); }},
      {"forest.mtry", [](auto& c, auto& k, auto& v) { c.forest.mtry = to_uint(k, v); }},
      {"forest.min_leaf", [](auto& c, auto& k, auto& v) { c.forest.min_leaf = to_uint(k, v); }},
      {"preselect.min_conf", [](auto& c, auto& k, auto& v) { c.preselect.min_conf = to_double(k, v); }},
      {"preselect.min_class_cov", [](auto& c, auto& k, auto& v) { c.preselect.min_class_cov = to_double(k, v); }},
      {"preselect.max_len", [](auto& c, auto& k, auto& v) { c.preselect.max_len = to_uint(k, v); }},
      {"preselect.max_simil", [](auto& c, auto& k, auto& v) { c.preselect.max_simil = to_double(k, v); }},
      {"selection.w0", [](auto& c, auto& k, auto& v) { c.selection.w0 = to_double(k, v); }},
      {"selection.w1", [](auto& c, auto& k, auto& v) { c.selection.w1 = to_double(k, v); }},
      {"selection.w2", [](auto& c, auto& k, auto& v) { c.selection.w2 = to_double(k, v); }},
      {"selection.w3", [](auto& c, auto& k, auto& v) { c.selection.w3 = to_double(k, v); }},
      {"selection.maxcover", [](auto& c, auto& k, auto& v) { c.selection.maxcover = to_uint(k, v); }},
      {"selection.maxoverlap", [](auto& c, auto& k, auto& v) { c.selection.maxoverlap = to_double(k, v); }},
      {"selection.alpha", [](auto& c, auto& k, auto& v) { c.selection.alpha = to_double(k, v); }},
      {"selection.beta", [](auto& c, auto& k, auto& v) { c.selection.beta = to_double(k, v); }},
      {"solver.kind", [](auto& c, auto&, auto& v) { c.solver.kind = parse_solver_kind(v); }},
      {"solver.exact_max_rules", [](auto& c, auto& k, auto& v) { c.solver.exact_max_rules = to_uint(k, v); }},
      {"solver.node_limit", [](auto& c, auto& k, auto& v) { c.solver.node_limit = to_uint(k, v); }},
      {"solver.time_limit", [](auto& c, auto& k, auto& v) { c.solver.time_limit = to_double(k, v); }},
      {"solver.restarts", [](auto& c, auto& k, auto& v) { c.solver.heuristic.restarts = to_uint(k, v); }},
      {"enrich.arm_minconf", [](auto& c, auto& k, auto& v) { c.enrich.arm_minconf = to_double(k, v); }},
      {"enrich.arm_minsup", [](auto& c, auto& k, auto& v) { c.enrich.arm_minsup = to_double(k, v); }},
      {"cv.splits", [](auto& c, auto& k, auto& v) { c.cv.splits = to_uint(k, v); }},
      {"cv.train_ratio", [](auto& c, auto& k, auto& v) { c.cv.train_ratio = to_double(k, v); }},
  };
  return table;
}

std::string kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kExact: return "exact";
    case SolverKind::kHeuristic: return "heuristic";
    case SolverKind::kAuto: break;
  }
  return "auto";
}

}  // namespace

void PipelineConfig::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("[") + section + "] " + e.what());
    }
  };
  if (forest.n_trees < 1) throw ConfigError("[forest] n_trees must be >= 1");
  if (forest.min_leaf < 1) throw ConfigError("[forest] min_leaf must be >= 1");
  wrap("preselect", [&] { preselect.validate(); });
  wrap("selection", [&] { selection.validate(); });
  wrap("enrich", [&] { enrich.validate(); });
  if (solver.heuristic.restarts < 1) throw ConfigError("[solver] restarts must be >= 1");
  if (solver.time_limit < 0) throw ConfigError("[solver] time_limit must be >= 0");
  if (cv.splits < 1) throw ConfigError("[cv] splits must be >= 1");
  if (!(cv.train_ratio > 0.0 && cv.train_ratio < 1.0)) throw ConfigError("[cv] train_ratio must lie in (0, 1)");
  if (bins == 1) throw ConfigError("[run] bins must be 0 or >= 2");
  if (target.empty()) throw ConfigError("[run] target must not be empty");
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(config, key, value);
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig config;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    std::string text = trim(std::string_view(line).substr(0, comment));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    apply_setting(config, section + "." + key, value);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

std::string config_to_ini(const PipelineConfig& c) {
  using detail::shortest;
  std::ostringstream out;
  out << "[run]\nseed = " << c.seed << "\ntarget = " << c.target << "\nbins = " << c.bins
      << "\nthreads = " << c.threads << "\noutput_dir = " << c.output_dir.string() << "\n\n";
  out << "[forest]\nn_trees = " << c.forest.n_trees << "\nmtry = " << c.forest.mtry
      << "\nmin_leaf = " << c.forest.min_leaf << "\n\n";
  out << "[preselect]\nmin_conf = " << shortest(c.preselect.min_conf)
      << "\nmin_class_cov = " << shortest(c.preselect.min_class_cov)
      << "\nmax_len = " << c.preselect.max_len << "\nmax_simil = " << shortest(c.preselect.max_simil)
      << "\n\n";
  out << "[selection]\nw0 = " << shortest(c.selection.w0) << "\nw1 = " << shortest(c.selection.w1)
      << "\nw2 = " << shortest(c.selection.w2) << "\nw3 = " << shortest(c.selection.w3)
      << "\nmaxcover = " << c.selection.maxcover << "\nmaxoverlap = " << shortest(c.selection.maxoverlap)
      << "\nalpha = " << shortest(c.selection.alpha) << "\nbeta = " << shortest(c.selection.beta) << "\n\n";
  out << "[solver]\nkind = " << kind_name(c.solver.kind) << "\nexact_max_rules = " << c.solver.exact_max_rules
      << "\nnode_limit = " << c.solver.node_limit << "\ntime_limit = " << shortest(c.solver.time_limit)
      << "\nrestarts = " << c.solver.heuristic.restarts << "\n\n";
  out << "[enrich]\narm_minconf = " << shortest(c.enrich.arm_minconf)
      << "\narm_minsup = " << shortest(c.enrich.arm_minsup) << "\n\n";
  out << "[cv]\nsplits = " << c.cv.splits << "\ntrain_ratio = " << shortest(c.cv.train_ratio) << "\n";
  return out.str();
}

}  // namespace forestore
