#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include "cmnl/env.hpp"
#include "cmnl/error.hpp"
#include "cmnl/mnl_core.hpp"
#include "oracles.hpp"

using namespace cmnl;

namespace {

Vector vec(std::initializer_list<double> init) {
  Vector v(static_cast<Eigen::Index>(init.size()));
  Eigen::Index i = 0;
  for (double x : init) v(i++) = x;
  return v;
}

double chi_square_pvalue(const std::vector<double>& counts, const Vector& probs) {
  double n = 0.0, stat = 0.0;
  for (double c : counts) n += c;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs(static_cast<Eigen::Index>(i));
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("config validation") {
  EnvConfig cfg;
  CHECK_NOTHROW(cfg.validate(true));
  cfg.d = 0;
  CHECK_THROWS_AS(cfg.validate(true), ConfigError);
  cfg = EnvConfig{};
  cfg.K = 3;
  cfg.N = 2;
  CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  cfg = EnvConfig{};
  cfg.W = 0.0;
  CHECK_THROWS_AS(cfg.validate(true), ConfigError);
  cfg = EnvConfig{};
  cfg.L = 0.0;
  CHECK_THROWS_AS(cfg.validate(true), ConfigError);
  cfg = EnvConfig{};
  cfg.context_kind = ContextKind::adversarial_epoch;
  cfg.d = 3;
  CHECK_THROWS_AS(cfg.validate(true), ConfigError);
  cfg.d = 2;
  cfg.K = cfg.k = 2;
  CHECK_THROWS_AS(cfg.validate(true), ConfigError);
  CHECK(parse_context_kind("adversarial") == ContextKind::adversarial_epoch);
  CHECK(to_string(parse_context_kind("exponential")) == "exponential");
  CHECK_THROWS_AS(parse_context_kind("uniform"), ConfigError);
}

TEST_CASE("true parameter draws") {
  Rng rng(1);
  CHECK(sample_theta_star(3, 0.0, rng).norm() == 0.0);
  const double W = 2.5;
  std::vector<double> norms;
  for (int i = 0; i < 100000; ++i) {
    const double n = sample_theta_star(4, W, rng).norm();
    CHECK(n <= W);
    norms.push_back(n);
  }
  const double p = oracle::ks_pvalue(norms, [&](double x) { return std::clamp(x / W, 0.0, 1.0); });
  CHECK(p > 0.001);
}

TEST_CASE("named streams are distinct and reproducible") {
  RngStreams a(7), b(7), c(8);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.demand() == b.demand());
  CHECK(a.contexts() != c.contexts());
  Rng s1 = make_stream(7, Stream::shocks), s2 = make_stream(7, Stream::demand);
  CHECK(s1() != s2());
  // Draining the shock stream leaves demand untouched.
  RngStreams x(9), y(9);
  for (int i = 0; i < 1000; ++i) x.shocks();
  CHECK(x.demand() == y.demand());
}

TEST_CASE("adversarial epochs") {
  CHECK(adversarial_epoch(1) == 1);
  CHECK(adversarial_epoch(2) == 2);
  CHECK(adversarial_epoch(3) == 2);
  CHECK(adversarial_epoch(4) == 3);
  CHECK(adversarial_epoch(1023) == 10);
  CHECK(adversarial_epoch(1024) == 11);
  Rng rng(1);
  CHECK((gen_context(ContextKind::adversarial_epoch, 1, 2, 1, rng).rows() - Matrix{{1.0, 0.0}}).norm() == 0.0);
  CHECK((gen_context(ContextKind::adversarial_epoch, 2, 2, 1, rng).rows() - Matrix{{0.0, 1.0}}).norm() == 0.0);
  CHECK((gen_context(ContextKind::adversarial_epoch, 3, 2, 1, rng).rows() - Matrix{{0.0, 1.0}}).norm() == 0.0);
  CHECK((gen_context(ContextKind::adversarial_epoch, 5, 2, 1, rng).rows() - Matrix{{1.0, 0.0}}).norm() == 0.0);
  CHECK_THROWS_AS(gen_context(ContextKind::adversarial_epoch, 1, 3, 1, rng), ConfigError);
  CHECK_THROWS_AS(gen_context(ContextKind::adversarial_epoch, 1, 2, 2, rng), ConfigError);
}

TEST_CASE("context rows have unit norm") {
  Rng rng(2);
  for (auto kind : {ContextKind::gaussian, ContextKind::exponential}) {
    for (int i = 0; i < 1000; ++i) {
      const auto ctx = gen_context(kind, static_cast<std::size_t>(i + 1), 5, 3, rng);
      CHECK(ctx.size() == 3);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(ctx.row(j).norm() - 1.0) <= 1e-12);
        if (kind == ContextKind::exponential) CHECK(ctx.row(j).minCoeff() >= 0.0);
      }
    }
  }
}

TEST_CASE("pricing parameter draws satisfy the constraints") {
  Rng rng(3);
  for (auto kind : {ContextKind::gaussian, ContextKind::exponential, ContextKind::adversarial_epoch}) {
    for (int rep = 0; rep < 50; ++rep) {
      const double W = 1.0, L = 0.1;
      const auto draw = sample_pricing_params(2, W, L, kind, rng);
      CHECK(draw.params.stacked().norm() <= W + 1e-12);
      CHECK(draw.params.alpha.minCoeff() >= 0.0);
      for (std::size_t t = 1; t <= 40; ++t) {
        const auto ctx = gen_feasible_context(kind, t, 2, kind == ContextKind::adversarial_epoch ? 1 : 3,
                                              draw.params.alpha, L, rng);
        CHECK((ctx.rows() * draw.params.alpha).minCoeff() >= L);
      }
    }
  }
}

TEST_CASE("one-dimensional draws") {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const auto draw = sample_pricing_params(1, 1.0, 0.3, ContextKind::exponential, rng);
    CHECK(draw.params.alpha(0) >= 0.3);
    CHECK(draw.params.alpha(0) <= 1.0);
    CHECK(draw.acceptance_rate == 1.0);
  }
}

TEST_CASE("logged acceptance rate matches a replay") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double W = 1.0, L = 0.4;
    Rng rng(seed), replay(seed);
    const auto draw = sample_pricing_params(3, W, L, ContextKind::gaussian, rng);
    CHECK(draw.probe_size == kAcceptanceProbeSize);
    CHECK(draw.acceptance_rate ==
          static_cast<double>(draw.probe_accepted) / static_cast<double>(draw.probe_size));
    CHECK(draw.acceptance_rate >= kMinAcceptanceRate);
    std::uniform_real_distribution<double> uni(0.0, W);
    std::size_t accepted = 0;
    Vector gamma;
    for (std::size_t a = 0; a < draw.attempts; ++a) {
      const double radius = uni(replay);
      gamma = radius * gen_context(ContextKind::gaussian, 1, 6, 1, replay).rows().row(0).transpose();
      gamma.tail(3) = gamma.tail(3).cwiseAbs();
      accepted = 0;
      for (std::size_t i = 0; i < kAcceptanceProbeSize; ++i) {
        const auto x = gen_context(ContextKind::gaussian, 1, 3, 1, replay);
        if (x.rows().row(0).dot(gamma.tail(3)) >= L) ++accepted;
      }
    }
    CHECK(accepted == draw.probe_accepted);
    CHECK((gamma - draw.params.stacked()).norm() == 0.0);
  }
}

TEST_CASE("impossible constraint raises a config error") {
  Rng rng(5);
  CHECK_THROWS_AS(sample_pricing_params(2, 1.0, 2.0, ContextKind::gaussian, rng), ConfigError);
  CHECK_THROWS_AS(sample_pricing_params(2, 1.0, 0.0, ContextKind::gaussian, rng), ConfigError);
  CHECK_THROWS_AS(gen_feasible_context(ContextKind::gaussian, 1, 2, 1, vec({0.1, 0.1}), 0.5, rng, 1000),
                  Error);
}

TEST_CASE("purchase draws") {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) CHECK(sample_purchase(vec({1, 0, 0}), rng).chosen == 0);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += static_cast<int>(sample_purchase(vec({0.5, 0.5}), rng).chosen);
  CHECK(std::abs(ones - n / 2) <= 3.0 * std::sqrt(n * 0.25));

  const ProbVector q = choice_probabilities(vec({0.4, -1.0, 1.2, 0.0}));
  std::vector<double> counts(5, 0.0);
  for (int i = 0; i < n; ++i) counts[sample_purchase(q, rng).chosen] += 1.0;
  CHECK(chi_square_pvalue(counts, q) > 0.001);
}

}  // TEST_SUITE
