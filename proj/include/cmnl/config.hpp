#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "cmnl/env.hpp"

namespace cmnl {

enum class Problem { pricing, assortment };

/// onssc: shocked online Newton pricing. corollary1: the same learner with a
/// known unit price sensitivity, one product and no shocks. onsp: the
/// exp-concavity baseline. ofu_mnl: optimistic assortments. oracle: acts on
/// the true parameter (zero regret, used for checks).
enum class PolicyKind { onssc, onsp, ofu_mnl, corollary1, oracle };

Problem parse_problem(const std::string& name);
std::string to_string(Problem problem);
PolicyKind parse_policy(const std::string& name);
std::string to_string(PolicyKind policy);

struct ExperimentConfig {
  std::string name = "run";
  Problem problem = Problem::pricing;
  PolicyKind policy = PolicyKind::onssc;
  std::size_t T = 1000;
  std::vector<std::uint64_t> seeds = default_seeds(20);
  EnvConfig env;

  // pricing
  /// Utility x'theta - p with theta in R^d instead of learning alpha.
  bool known_sensitivity = false;
  bool shocks = true;
  double fixed_point_tol = 1e-12;
  double onsp_kappa = 0.0;
  double onsp_eta_scale = 0.5;
  double onsp_epsilon = 0.0;

  // assortment
  /// Zero selects 1 / (K^2 T^2).
  double delta = 0.0;
  double mle_tol = 1e-8;
  std::size_t refit_every = 1;
  /// Test theta* against the exact confidence set every period (costs O(t) per period).
  bool track_coverage = false;

  std::string out_dir = "out";
  std::size_t jobs = 1;

  /// Known sensitivity as actually used (corollary1 forces it).
  bool uses_known_sensitivity() const;
  bool uses_shocks() const;
  double resolved_delta() const;

  /// Throws ConfigError on T = 0, empty seeds, a policy that does not fit the
  /// problem, or an invalid environment.
  void validate() const;

  static std::vector<std::uint64_t> default_seeds(std::size_t count);
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
KeyValues parse_key_values(std::istream& in, const std::string& source = "<input>");
KeyValues read_key_values(const std::string& path);

/// Applies one dotted key (e.g. `env.context_kind`); unknown keys and
/// malformed values raise ConfigError naming the key.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig config_from_key_values(const KeyValues& values);
ExperimentConfig load_config(const std::string& path);

/// Every setting with its resolved value, in the same key syntax.
KeyValues to_key_values(const ExperimentConfig& config);

/// "1,2,5" or ranges "0..19" (inclusive), mixed freely.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace cmnl
