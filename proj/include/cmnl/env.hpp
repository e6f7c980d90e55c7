#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "cmnl/types.hpp"

namespace cmnl {

enum class ContextKind { gaussian, exponential, adversarial_epoch };

ContextKind parse_context_kind(const std::string& name);
std::string to_string(ContextKind kind);

struct EnvConfig {
  std::size_t d = 2;
  /// Assortment size (assortment) or maximum consideration-set size (pricing).
  std::size_t K = 1;
  /// Candidate items per period (assortment).
  std::size_t N = 1;
  /// Products priced per period (pricing); at most K.
  std::size_t k = 1;
  double W = 1.0;
  double L = 0.1;
  ContextKind context_kind = ContextKind::gaussian;
  std::uint64_t seed = 0;

  /// Throws ConfigError when the invariants d >= 1, 1 <= K <= N, W > 0, L > 0
  /// or the adversarial d = 2, k = 1 restriction are violated.
  void validate(bool pricing) const;
};

/// Independent generators per concern, so toggling one (e.g. shocks) never
/// perturbs the draws of another.
enum class Stream : std::uint64_t { parameters = 1, contexts = 2, demand = 3, shocks = 4 };

Rng make_stream(std::uint64_t seed, Stream stream);

struct RngStreams {
  explicit RngStreams(std::uint64_t seed);
  Rng parameters;
  Rng contexts;
  Rng demand;
  Rng shocks;
};

/// theta* = Y Z / |Z| with Y ~ U[0, W] and Z ~ N(0, I_d).
Vector sample_theta_star(std::size_t d, double W, Rng& rng);

struct PricingParamsDraw {
  PricingParams params;
  /// Fraction of probe context rows with x'alpha >= L.
  double acceptance_rate = 0.0;
  std::size_t probe_size = 0;
  std::size_t probe_accepted = 0;
  /// Number of parameter draws made before one passed the acceptance guardrail.
  std::size_t attempts = 0;
};

inline constexpr std::size_t kAcceptanceProbeSize = 2000;
inline constexpr double kMinAcceptanceRate = 0.01;

/// (theta, alpha) = Y Z / |Z| with Y ~ U[0, W], Z ~ N(0, I_2d) and alpha's
/// coordinates folded onto the positive orthant. A probe batch of contexts
/// estimates the rate x'alpha >= L; draws below 1% are retried and a
/// ConfigError is raised if none qualifies. Adversarial contexts cannot be
/// rejected, so they require every probe row to qualify.
PricingParamsDraw sample_pricing_params(std::size_t d, double W, double L,
                                        ContextKind kind, Rng& rng);

/// Epoch index floor(log2 t) + 1; epoch k covers periods 2^{k-1} .. 2^k - 1.
std::size_t adversarial_epoch(std::size_t t);

/// k rows of unit norm: normalized N(0, I) or Exp(1) draws, or the
/// alternating epoch construction ([1,0] in odd epochs, [0,1] in even ones).
ContextMatrix gen_context(ContextKind kind, std::size_t t, std::size_t d, std::size_t k,
                          Rng& rng);

/// gen_context with each row redrawn until x'alpha >= L.
ContextMatrix gen_feasible_context(ContextKind kind, std::size_t t, std::size_t d,
                                   std::size_t k, const Vector& alpha, double L,
                                   Rng& rng, std::size_t max_attempts = 100000);

/// Categorical draw; index 0 is the outside option.
PurchaseOutcome sample_purchase(const ProbVector& probs, Rng& rng);

}  // namespace cmnl
