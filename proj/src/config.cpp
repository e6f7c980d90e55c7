#include "cmnl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cmnl/error.hpp"

namespace cmnl {

Problem parse_problem(const std::string& name) {
  if (name == "pricing") return Problem::pricing;
  if (name == "assortment") return Problem::assortment;
  throw ConfigError("unknown problem '" + name + "'");
}

std::string to_string(Problem problem) {
  return problem == Problem::pricing ? "pricing" : "assortment";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "onssc") return PolicyKind::onssc;
  if (name == "onsp") return PolicyKind::onsp;
  if (name == "ofu_mnl") return PolicyKind::ofu_mnl;
  if (name == "corollary1") return PolicyKind::corollary1;
  if (name == "oracle") return PolicyKind::oracle;
  throw ConfigError("unknown policy '" + name + "'");
}

std::string to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::onssc: return "onssc";
    case PolicyKind::onsp: return "onsp";
    case PolicyKind::ofu_mnl: return "ofu_mnl";
    case PolicyKind::corollary1: return "corollary1";
    case PolicyKind::oracle: return "oracle";
  }
  return "unknown";
}

std::vector<std::uint64_t> ExperimentConfig::default_seeds(std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = i;
  return seeds;
}

bool ExperimentConfig::uses_known_sensitivity() const {
  return policy == PolicyKind::corollary1 || known_sensitivity;
}

bool ExperimentConfig::uses_shocks() const {
  return policy == PolicyKind::onssc && shocks;
}

double ExperimentConfig::resolved_delta() const {
  if (delta > 0.0) return delta;
  const double kt = static_cast<double>(env.K) * static_cast<double>(T);
  return 1.0 / (kt * kt);
}

void ExperimentConfig::validate() const {
  if (T < 1) throw ConfigError("T must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  const bool pricing = problem == Problem::pricing;
  if (pricing && policy == PolicyKind::ofu_mnl) {
    throw ConfigError("policy ofu_mnl requires problem = assortment");
  }
  if (!pricing && policy != PolicyKind::ofu_mnl && policy != PolicyKind::oracle) {
    throw ConfigError("policy " + to_string(policy) + " requires problem = pricing");
  }
  env.validate(pricing);
  if (pricing && uses_known_sensitivity() && env.k != 1) {
    throw ConfigError("known-sensitivity pricing prices a single product; set env.k = 1");
  }
  if (!(fixed_point_tol > 0.0)) throw ConfigError("pricing.fixed_point_tol must be positive");
  if (onsp_kappa < 0.0 || onsp_epsilon < 0.0 || !(onsp_eta_scale > 0.0)) {
    throw ConfigError("onsp knobs: kappa, epsilon >= 0 and eta_scale > 0");
  }
  if (delta < 0.0 || delta >= 1.0) throw ConfigError("ofu.delta must lie in [0, 1)");
  if (!(mle_tol > 0.0)) throw ConfigError("ofu.mle_tol must be positive");
  if (refit_every < 1) throw ConfigError("ofu.refit_every must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = std::find_if_not(s.begin(), s.end(),
                                      [](unsigned char c) { return std::isspace(c); });
  const auto end = std::find_if_not(s.rbegin(), s.rend(),
                                    [](unsigned char c) { return std::isspace(c); }).base();
  return begin < end ? std::string(begin, end) : std::string();
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(to_uint("seeds", item));
      continue;
    }
    const auto lo = to_uint("seeds", trim(item.substr(0, dots)));
    const auto hi = to_uint("seeds", trim(item.substr(dots + 2)));
    if (hi < lo) throw ConfigError("seeds: empty range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("seeds: no seeds in '" + text + "'");
  return seeds;
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (values.count(key)) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in, path);
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "name") c.name = value;
  else if (key == "problem") c.problem = parse_problem(value);
  else if (key == "policy") c.policy = parse_policy(value);
  else if (key == "T") c.T = to_uint(key, value);
  else if (key == "seeds") c.seeds = parse_seed_list(value);
  else if (key == "jobs") c.jobs = to_uint(key, value);
  else if (key == "out") c.out_dir = value;
  else if (key == "env.d") c.env.d = to_uint(key, value);
  else if (key == "env.K") c.env.K = to_uint(key, value);
  else if (key == "env.N") c.env.N = to_uint(key, value);
  else if (key == "env.k") c.env.k = to_uint(key, value);
  else if (key == "env.W") c.env.W = to_double(key, value);
  else if (key == "env.L") c.env.L = to_double(key, value);
  else if (key == "env.context_kind") c.env.context_kind = parse_context_kind(value);
  else if (key == "pricing.known_sensitivity") c.known_sensitivity = to_bool(key, value);
  else if (key == "pricing.shocks") c.shocks = to_bool(key, value);
  else if (key == "pricing.fixed_point_tol") c.fixed_point_tol = to_double(key, value);
  else if (key == "onsp.kappa") c.onsp_kappa = to_double(key, value);
  else if (key == "onsp.eta_scale") c.onsp_eta_scale = to_double(key, value);
  else if (key == "onsp.epsilon") c.onsp_epsilon = to_double(key, value);
  else if (key == "ofu.delta") c.delta = to_double(key, value);
  else if (key == "ofu.mle_tol") c.mle_tol = to_double(key, value);
  else if (key == "ofu.refit_every") c.refit_every = to_uint(key, value);
  else if (key == "ofu.track_coverage") c.track_coverage = to_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig config_from_key_values(const KeyValues& values) {
  ExperimentConfig config;
  for (const auto& [key, value] : values) apply_setting(config, key, value);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_key_values(read_key_values(path));
}

KeyValues to_key_values(const ExperimentConfig& c) {
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(c.seeds[i]);
  }
  return {
      {"name", c.name},
      {"problem", to_string(c.problem)},
      {"policy", to_string(c.policy)},
      {"T", std::to_string(c.T)},
      {"seeds", seeds},
      {"jobs", std::to_string(c.jobs)},
      {"out", c.out_dir},
      {"env.d", std::to_string(c.env.d)},
      {"env.K", std::to_string(c.env.K)},
      {"env.N", std::to_string(c.env.N)},
      {"env.k", std::to_string(c.env.k)},
      {"env.W", format_double(c.env.W)},
      {"env.L", format_double(c.env.L)},
      {"env.context_kind", to_string(c.env.context_kind)},
      {"pricing.known_sensitivity", c.known_sensitivity ? "true" : "false"},
      {"pricing.shocks", c.shocks ? "true" : "false"},
      {"pricing.fixed_point_tol", format_double(c.fixed_point_tol)},
      {"onsp.kappa", format_double(c.onsp_kappa)},
      {"onsp.eta_scale", format_double(c.onsp_eta_scale)},
      {"onsp.epsilon", format_double(c.onsp_epsilon)},
      {"ofu.delta", format_double(c.delta)},
      {"ofu.mle_tol", format_double(c.mle_tol)},
      {"ofu.refit_every", std::to_string(c.refit_every)},
      {"ofu.track_coverage", c.track_coverage ? "true" : "false"},
  };
}

}  // namespace cmnl
