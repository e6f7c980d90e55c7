#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cmnl/config.hpp"
#include "cmnl/ons_pricing.hpp"

namespace cmnl {

struct TrajectoryRecord {
  std::size_t t = 0;
  std::uint64_t seed = 0;
  std::string policy;
  double instant_regret = 0.0;
  double cum_regret = 0.0;
  /// |gamma_t - gamma*| (pricing) or |theta_hat_t - theta*| (assortment) for
  /// the estimate acting in period t.
  double est_error = 0.0;
  /// Pricing: running minimum of q_j q_0 at the true parameter and posted
  /// prices. Assortment: kappa*_{2,t} of the period.
  double kappa_diag = 0.0;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<TrajectoryRecord> records;
  /// Scalar run diagnostics (acceptance rate, feasibility extremes, coverage...).
  std::map<std::string, double> diagnostics;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<ReplicationResult> replications;  // in config.seeds order
  double wall_seconds = 0.0;

  bool all_ok() const;
  /// Records of the successful replications, seed-major then t.
  std::vector<TrajectoryRecord> records() const;
};

/// Regret below this (relative to the optimal value) is treated as rounding
/// and clamped to zero; anything more negative is an error.
inline constexpr double kRegretSlack = 1e-9;

/// Builds the pricing policy named by the config for a model and true parameter.
std::unique_ptr<PricingPolicy> make_pricing_policy(const ExperimentConfig& config,
                                                   const PricingModel& model,
                                                   const Vector& truth,
                                                   const ContextMatrix& first_ctx);

/// One seed of the online pricing protocol. Exceptions propagate.
ReplicationResult run_pricing(const ExperimentConfig& config, std::uint64_t seed);

/// One seed of the online assortment protocol. Exceptions propagate.
ReplicationResult run_assortment(const ExperimentConfig& config, std::uint64_t seed);

/// Dispatches on config.problem and captures any error in the result.
ReplicationResult run_replication(const ExperimentConfig& config, std::uint64_t seed);

/// Runs every seed, config.jobs at a time; results are ordered by seed position
/// so the output does not depend on scheduling.
RunResult run_experiment(const ExperimentConfig& config);

/// Mergeable mean / variance accumulator (Welford, pairwise merge).
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Sample variance; 0 with fewer than two observations.
  double variance() const;
  double stddev() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SummaryRow {
  std::string policy;
  std::size_t t = 0;
  std::size_t n = 0;
  double mean_cum_regret = 0.0;
  double std_cum_regret = 0.0;
};

/// Per-(policy, t) statistics of cumulative regret across seeds. Batches of
/// seeds can be aggregated separately and merged.
class Aggregator {
 public:
  void add(const TrajectoryRecord& record);
  void add(const std::vector<TrajectoryRecord>& records);
  void merge(const Aggregator& other);
  /// Sorted by policy, then t.
  std::vector<SummaryRow> rows() const;
  /// Mean cumulative regret of `policy` at period t; throws if absent.
  double mean_at(const std::string& policy, std::size_t t) const;

 private:
  std::map<std::pair<std::string, std::size_t>, RunningStats> stats_;
};

std::vector<SummaryRow> aggregate(const std::vector<TrajectoryRecord>& records);

}  // namespace cmnl
