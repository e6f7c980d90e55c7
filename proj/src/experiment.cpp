#include "cmnl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "cmnl/env.hpp"
#include "cmnl/mnl_core.hpp"
#include "cmnl/ofu_mnl.hpp"
#include "cmnl/price_oracle.hpp"

namespace cmnl {

bool RunResult::all_ok() const {
  return std::all_of(replications.begin(), replications.end(),
                     [](const ReplicationResult& r) { return r.ok; });
}

std::vector<TrajectoryRecord> RunResult::records() const {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : replications) {
    if (r.ok) out.insert(out.end(), r.records.begin(), r.records.end());
  }
  return out;
}

namespace {

double clamp_regret(double regret, double optimum, std::size_t t) {
  if (regret >= 0.0) return regret;
  if (regret >= -kRegretSlack * std::max(1.0, std::abs(optimum))) return 0.0;
  throw Error("negative regret " + std::to_string(regret) + " at t = " + std::to_string(t) +
              "; the benchmark action is not optimal");
}

}  // namespace

std::unique_ptr<PricingPolicy> make_pricing_policy(const ExperimentConfig& config,
                                                   const PricingModel& model,
                                                   const Vector& truth,
                                                   const ContextMatrix& first_ctx) {
  switch (config.policy) {
    case PolicyKind::onssc:
    case PolicyKind::corollary1: {
      OnsOptions options;
      options.shocks = config.uses_shocks();
      options.fixed_point_tol = config.fixed_point_tol;
      return std::make_unique<OnsPricer>(model, options, first_ctx);
    }
    case PolicyKind::onsp: {
      OnspOptions options;
      options.kappa = config.onsp_kappa;
      options.eta_scale = config.onsp_eta_scale;
      options.epsilon = config.onsp_epsilon;
      options.fixed_point_tol = config.fixed_point_tol;
      return std::make_unique<OnspPricer>(model, options, first_ctx);
    }
    case PolicyKind::oracle:
      return std::make_unique<OraclePricer>(model, truth, config.fixed_point_tol);
    case PolicyKind::ofu_mnl:
      break;
  }
  throw ConfigError("policy " + to_string(config.policy) + " cannot price");
}

ReplicationResult run_pricing(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const EnvConfig& env = config.env;
  const bool known = config.uses_known_sensitivity();
  RngStreams rng(seed);
  PricingModel model(env.d, env.W, env.L, env.K, known);

  ReplicationResult result;
  result.seed = seed;

  Vector truth;
  Vector alpha;
  if (known) {
    truth = sample_theta_star(env.d, env.W, rng.parameters);
  } else {
    const auto draw = sample_pricing_params(env.d, env.W, env.L, env.context_kind,
                                            rng.parameters);
    truth = draw.params.stacked();
    alpha = draw.params.alpha;
    result.diagnostics["acceptance_rate"] = draw.acceptance_rate;
    result.diagnostics["parameter_draws"] = static_cast<double>(draw.attempts);
  }
  result.diagnostics["truth_norm"] = truth.norm();
  result.diagnostics["p_max"] = model.p_max();

  const std::size_t k = known ? 1 : env.k;
  auto next_context = [&](std::size_t t) {
    return known ? gen_context(env.context_kind, t, env.d, k, rng.contexts)
                 : gen_feasible_context(env.context_kind, t, env.d, k, alpha, env.L,
                                        rng.contexts);
  };

  ContextMatrix ctx = next_context(1);
  auto policy = make_pricing_policy(config, model, truth, ctx);

  double cum = 0.0;
  double kappa = std::numeric_limits<double>::infinity();
  double min_price = std::numeric_limits<double>::infinity();
  double max_price = -std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  double min_sensitivity = std::numeric_limits<double>::infinity();
  result.records.reserve(config.T);

  for (std::size_t t = 1; t <= config.T; ++t) {
    ContextMatrix ctx_next = next_context(t + 1);
    const double est_error = (policy->parameters() - truth).norm();
    const PriceDecision decision = policy->select_prices(ctx, rng.shocks);
    min_price = std::min(min_price, decision.prices.minCoeff());
    max_price = std::max(max_price, decision.prices.maxCoeff());

    const ProbVector probs = model.probabilities(truth, ctx, decision.prices);
    const PurchaseOutcome outcome = sample_purchase(probs, rng.demand);

    const Vector best = model.greedy_prices(truth, ctx, config.fixed_point_tol);
    const double optimum = model.revenue(truth, ctx, best);
    const double regret =
        clamp_regret(optimum - model.revenue(truth, ctx, decision.prices), optimum, t);
    cum += regret;
    kappa = std::min(kappa, curvature_terms(probs).minCoeff());

    policy->observe(ctx, decision.prices, outcome, ctx_next);

    const Vector& w = policy->parameters();
    max_norm = std::max(max_norm, w.norm());
    if (!known) {
      const Vector sens = model.sensitivities(w, ctx_next);
      min_sensitivity = std::min(min_sensitivity, sens.minCoeff());
    }

    result.records.push_back({t, seed, to_string(config.policy), regret, cum, est_error, kappa});
    ctx = std::move(ctx_next);
  }

  result.diagnostics["min_price"] = min_price;
  result.diagnostics["max_price"] = max_price;
  result.diagnostics["max_param_norm"] = max_norm;
  if (!known) result.diagnostics["min_sensitivity"] = min_sensitivity;
  result.diagnostics["empirical_kappa1"] = kappa;
  result.ok = true;
  return result;
}

namespace {

bool same_set(Assortment a, Assortment b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

ReplicationResult run_assortment(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const EnvConfig& env = config.env;
  RngStreams rng(seed);

  ReplicationResult result;
  result.seed = seed;
  const Vector truth = sample_theta_star(env.d, env.W, rng.parameters);
  result.diagnostics["truth_norm"] = truth.norm();

  OfuOptions options;
  options.delta = config.resolved_delta();
  options.mle_tol = config.mle_tol;
  options.refit_every = config.refit_every;
  OfuMnlLearner learner(env.d, env.K, env.W, options);
  const bool oracle = config.policy == PolicyKind::oracle;

  double cum = 0.0;
  Kappa2Tracker kappa2;
  double max_kappa_star = 0.0;
  bool covered = true;
  std::size_t first_miss = 0;
  result.records.reserve(config.T);

  for (std::size_t t = 1; t <= config.T; ++t) {
    const ContextMatrix candidates = gen_context(env.context_kind, t, env.d, env.N, rng.contexts);
    const Assortment best = optimal_assortment(truth, candidates, env.K);
    Assortment offered;
    double est_error = 0.0;
    if (oracle) {
      offered = best;
      est_error = 0.0;
    } else {
      offered = learner.select(candidates);
      const ConfidenceSet& cs = learner.confidence_set();
      est_error = (cs.theta_hat - truth).norm();
      if (config.track_coverage && covered &&
          !in_confidence_set(truth, cs, learner.history())) {
        covered = false;
        first_miss = t;
      }
    }

    const ProbVector probs = purchase_probs_assortment(truth, candidates, offered);
    const PurchaseOutcome outcome = sample_purchase(probs, rng.demand);
    kappa2.update(probs);

    const double optimum = expected_sales(truth, candidates, best);
    const double regret =
        same_set(offered, best)
            ? 0.0
            : clamp_regret(optimum - expected_sales(truth, candidates, offered), optimum, t);
    cum += regret;
    const double kappa_star = kappa_star_t(truth, candidates, env.K);
    max_kappa_star = std::max(max_kappa_star, kappa_star);

    if (!oracle) learner.observe(candidates, offered, outcome);
    result.records.push_back(
        {t, seed, to_string(config.policy), regret, cum, est_error, kappa_star});
  }

  result.diagnostics["empirical_kappa2"] = kappa2.value();
  result.diagnostics["max_kappa_star"] = max_kappa_star;
  result.diagnostics["delta"] = options.delta;
  if (config.track_coverage && !oracle) {
    result.diagnostics["covered_all_t"] = covered ? 1.0 : 0.0;
    if (!covered) result.diagnostics["first_miss_t"] = static_cast<double>(first_miss);
  }
  result.ok = true;
  return result;
}

ReplicationResult run_replication(const ExperimentConfig& config, std::uint64_t seed) {
  try {
    return config.problem == Problem::pricing ? run_pricing(config, seed)
                                              : run_assortment(config, seed);
  } catch (const std::exception& e) {
    ReplicationResult failed;
    failed.seed = seed;
    failed.ok = false;
    failed.error = e.what();
    return failed;
  }
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunResult run;
  run.config = config;
  run.replications.resize(config.seeds.size());
  const auto start = std::chrono::steady_clock::now();

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      run.replications[i] = run_replication(config, config.seeds[i]);
    }
  };
  const std::size_t workers = std::min(config.jobs, config.seeds.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double n = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / n;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
  n_ += other.n_;
}

double RunningStats::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

void Aggregator::add(const TrajectoryRecord& record) {
  stats_[{record.policy, record.t}].add(record.cum_regret);
}

void Aggregator::add(const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records) add(r);
}

void Aggregator::merge(const Aggregator& other) {
  for (const auto& [key, s] : other.stats_) stats_[key].merge(s);
}

std::vector<SummaryRow> Aggregator::rows() const {
  std::vector<SummaryRow> out;
  out.reserve(stats_.size());
  for (const auto& [key, s] : stats_) {
    out.push_back({key.first, key.second, s.count(), s.mean(), s.stddev()});
  }
  return out;
}

double Aggregator::mean_at(const std::string& policy, std::size_t t) const {
  const auto it = stats_.find({policy, t});
  if (it == stats_.end()) {
    throw Error("no records for policy " + policy + " at t = " + std::to_string(t));
  }
  return it->second.mean();
}

std::vector<SummaryRow> aggregate(const std::vector<TrajectoryRecord>& records) {
  Aggregator agg;
  agg.add(records);
  return agg.rows();
}

}  // namespace cmnl
