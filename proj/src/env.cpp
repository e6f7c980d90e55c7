#include "cmnl/env.hpp"

#include <cmath>

namespace cmnl {

ContextKind parse_context_kind(const std::string& name) {
  if (name == "gaussian") return ContextKind::gaussian;
  if (name == "exponential") return ContextKind::exponential;
  if (name == "adversarial" || name == "adversarial_epoch") return ContextKind::adversarial_epoch;
  throw ConfigError("unknown context kind '" + name + "'");
}

std::string to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::gaussian: return "gaussian";
    case ContextKind::exponential: return "exponential";
    case ContextKind::adversarial_epoch: return "adversarial_epoch";
  }
  return "unknown";
}

void EnvConfig::validate(bool pricing) const {
  if (d < 1) throw ConfigError("env: d must be >= 1");
  if (K < 1) throw ConfigError("env: K must be >= 1");
  if (!(W > 0.0)) throw ConfigError("env: W must be positive");
  if (pricing) {
    if (!(L > 0.0)) throw ConfigError("env: L must be positive");
    if (k < 1 || k > K) throw ConfigError("env: need 1 <= k <= K");
  } else if (N < K) {
    throw ConfigError("env: need K <= N");
  }
  if (context_kind == ContextKind::adversarial_epoch) {
    if (d != 2) throw ConfigError("env: adversarial contexts require d = 2");
    if (pricing ? k != 1 : N != 1) throw ConfigError("env: adversarial contexts require a single context row");
  }
}

Rng make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x6d6e6cu};
  return Rng(seq);
}

RngStreams::RngStreams(std::uint64_t seed)
    : parameters(make_stream(seed, Stream::parameters)),
      contexts(make_stream(seed, Stream::contexts)),
      demand(make_stream(seed, Stream::demand)),
      shocks(make_stream(seed, Stream::shocks)) {}

namespace {

Vector unit_gaussian(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(static_cast<Eigen::Index>(n));
  do {
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  } while (z.norm() == 0.0);
  return z / z.norm();
}

Vector context_row(ContextKind kind, std::size_t t, std::size_t d, Rng& rng) {
  switch (kind) {
    case ContextKind::gaussian:
      return unit_gaussian(d, rng);
    case ContextKind::exponential: {
      std::exponential_distribution<double> expo(1.0);
      Vector z(static_cast<Eigen::Index>(d));
      do {
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = expo(rng);
      } while (z.norm() == 0.0);
      return z / z.norm();
    }
    case ContextKind::adversarial_epoch: {
      if (d != 2) throw ConfigError("adversarial contexts require d = 2");
      Vector x = Vector::Zero(2);
      x(adversarial_epoch(t) % 2 == 0 ? 1 : 0) = 1.0;
      return x;
    }
  }
  throw ConfigError("unknown context kind");
}

}  // namespace

Vector sample_theta_star(std::size_t d, double W, Rng& rng) {
  if (d == 0) throw ConfigError("sample_theta_star: d must be >= 1");
  if (W < 0.0) throw ConfigError("sample_theta_star: W must be >= 0");
  std::uniform_real_distribution<double> uni(0.0, W);
  const double radius = W > 0.0 ? uni(rng) : 0.0;
  return radius * unit_gaussian(d, rng);
}

PricingParamsDraw sample_pricing_params(std::size_t d, double W, double L,
                                        ContextKind kind, Rng& rng) {
  if (d == 0 || !(W > 0.0) || !(L > 0.0)) {
    throw ConfigError("sample_pricing_params: need d >= 1, W > 0, L > 0");
  }
  constexpr std::size_t kMaxDraws = 200;
  const bool adversarial = kind == ContextKind::adversarial_epoch;
  const std::size_t probe = adversarial ? 2 : kAcceptanceProbeSize;
  double best_rate = 0.0;
  std::uniform_real_distribution<double> uni(0.0, W);

  for (std::size_t attempt = 1; attempt <= kMaxDraws; ++attempt) {
    const double radius = uni(rng);
    Vector gamma = radius * unit_gaussian(2 * d, rng);
    const auto dd = static_cast<Eigen::Index>(d);
    gamma.tail(dd) = gamma.tail(dd).cwiseAbs();
    PricingParamsDraw draw{PricingParams::from_stacked(gamma), 0.0, probe, 0, attempt};

    for (std::size_t i = 0; i < probe; ++i) {
      // Adversarial probes cover one period from each epoch parity.
      const Vector x = context_row(kind, adversarial ? i + 1 : 1, d, rng);
      if (x.dot(draw.params.alpha) >= L) ++draw.probe_accepted;
    }
    draw.acceptance_rate =
        static_cast<double>(draw.probe_accepted) / static_cast<double>(probe);
    best_rate = std::max(best_rate, draw.acceptance_rate);
    const bool ok = adversarial ? draw.probe_accepted == probe
                                : draw.acceptance_rate >= kMinAcceptanceRate;
    if (ok) return draw;
  }
  throw ConfigError("sample_pricing_params: best acceptance rate " +
                    std::to_string(best_rate) + " for x'alpha >= L; L = " +
                    std::to_string(L) + " is too large for W = " + std::to_string(W) +
                    ", d = " + std::to_string(d));
}

std::size_t adversarial_epoch(std::size_t t) {
  if (t == 0) throw ConfigError("adversarial_epoch: periods start at 1");
  std::size_t k = 0;
  while (t > 0) {
    t >>= 1;
    ++k;
  }
  return k;
}

ContextMatrix gen_context(ContextKind kind, std::size_t t, std::size_t d, std::size_t k,
                          Rng& rng) {
  if (k == 0 || d == 0) throw ConfigError("gen_context: need k >= 1, d >= 1");
  if (kind == ContextKind::adversarial_epoch && (d != 2 || k != 1)) {
    throw ConfigError("gen_context: adversarial contexts require d = 2 and k = 1");
  }
  Matrix rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < rows.rows(); ++j) rows.row(j) = context_row(kind, t, d, rng);
  return ContextMatrix(std::move(rows));
}

ContextMatrix gen_feasible_context(ContextKind kind, std::size_t t, std::size_t d,
                                   std::size_t k, const Vector& alpha, double L,
                                   Rng& rng, std::size_t max_attempts) {
  if (static_cast<std::size_t>(alpha.size()) != d) {
    throw DimensionError("gen_feasible_context: alpha length does not match d");
  }
  Matrix rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    std::size_t tries = 0;
    Vector x;
    do {
      if (++tries > max_attempts) {
        throw ConfigError("gen_feasible_context: no context row with x'alpha >= L after " +
                          std::to_string(max_attempts) + " draws");
      }
      x = context_row(kind, t, d, rng);
    } while (x.dot(alpha) < L);
    rows.row(j) = x;
  }
  return ContextMatrix(std::move(rows));
}

PurchaseOutcome sample_purchase(const ProbVector& probs, Rng& rng) {
  if (probs.size() == 0) throw DimensionError("sample_purchase: empty probability vector");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng) * probs.sum();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    acc += probs(j);
    if (u < acc) return PurchaseOutcome{static_cast<std::size_t>(j)};
  }
  // Rounding can leave u at the very top; fall back to the last positive cell.
  for (Eigen::Index j = probs.size() - 1; j >= 0; --j) {
    if (probs(j) > 0.0) return PurchaseOutcome{static_cast<std::size_t>(j)};
  }
  return PurchaseOutcome{0};
}

}  // namespace cmnl
