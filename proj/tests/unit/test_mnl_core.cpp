#include <cmath>

#include <doctest.h>

#include "cmnl/mnl_core.hpp"
#include "oracles.hpp"

using namespace cmnl;

namespace {

ContextMatrix rows(std::initializer_list<std::initializer_list<double>> init) {
  Matrix m(static_cast<Eigen::Index>(init.size()), static_cast<Eigen::Index>(init.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : init) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return ContextMatrix(m);
}

Vector vec(std::initializer_list<double> init) {
  Vector v(static_cast<Eigen::Index>(init.size()));
  Eigen::Index i = 0;
  for (double x : init) v(i++) = x;
  return v;
}

PricingParams params(Vector theta, Vector alpha) { return {std::move(theta), std::move(alpha)}; }

}  // namespace

TEST_SUITE("mnl_core") {

TEST_CASE("context rows must lie in the unit ball") {
  CHECK_THROWS_AS(ContextMatrix(Matrix::Constant(1, 2, 1.0)), InfeasibleError);
  CHECK_THROWS_AS(ContextMatrix(Matrix(0, 2)), DimensionError);
  Matrix bad(1, 2);
  bad << std::nan(""), 0.0;
  CHECK_THROWS(ContextMatrix(bad));
  CHECK_NOTHROW(ContextMatrix(Matrix::Constant(1, 2, std::sqrt(0.5))));
}

TEST_CASE("pricing probabilities: examples") {
  const auto p1 = purchase_probs_pricing(params(vec({0, 0}), vec({1, 0})), rows({{1, 0}}), vec({0}));
  CHECK(p1(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p1(1) == doctest::Approx(0.5).epsilon(1e-15));

  const auto p2 = purchase_probs_pricing(params(vec({0, 0}), vec({1, 0})),
                                         rows({{1, 0}, {1, 0}}), vec({0, 0}));
  for (int j = 0; j < 3; ++j) CHECK(p2(j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto p3 = purchase_probs_pricing(params(vec({1, 0}), vec({1, 0})), rows({{1, 0}}), vec({0.5}));
  const double e = std::exp(0.5);
  CHECK(p3(1) == doctest::Approx(e / (1 + e)).epsilon(1e-14));
}

TEST_CASE("pricing probabilities: dimension errors") {
  const auto ctx = rows({{1, 0}});
  CHECK_THROWS_AS(purchase_probs_pricing(params(vec({0}), vec({1})), ctx, vec({0})), DimensionError);
  CHECK_THROWS_AS(purchase_probs_pricing(params(vec({0, 0}), vec({1, 0})), ctx, vec({0, 1})),
                  DimensionError);
}

TEST_CASE("assortment probabilities: examples and errors") {
  Rng rng(3);
  const ContextMatrix cands(oracle::context_rows(6, 3, rng));
  const auto q = purchase_probs_assortment(Vector::Zero(3), cands, {0, 2, 5});
  for (int j = 0; j < 4; ++j) CHECK(q(j) == doctest::Approx(0.25).epsilon(1e-15));

  const auto single = purchase_probs_assortment(vec({0, 1}), rows({{1, 0}}), {0});
  CHECK(single(0) == doctest::Approx(0.5));
  CHECK(single(1) == doctest::Approx(0.5));

  const auto two = purchase_probs_assortment(vec({1, 0}), rows({{1, 0}, {0, 1}}), {0, 1});
  const double e = std::exp(1.0);
  CHECK(two(0) == doctest::Approx(1 / (2 + e)).epsilon(1e-15));
  CHECK(two(1) == doctest::Approx(e / (2 + e)).epsilon(1e-15));
  CHECK(two(2) == doctest::Approx(1 / (2 + e)).epsilon(1e-15));

  CHECK_THROWS_AS(purchase_probs_assortment(vec({1, 0}), rows({{1, 0}}), {}), DimensionError);
  CHECK_THROWS_AS(purchase_probs_assortment(vec({1, 0}), rows({{1, 0}}), {1}), DimensionError);
}

TEST_CASE("probability vectors are positive, normalized and shift-stable") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index k = 1 + rep % 6;
    Vector util(k);
    std::vector<long double> ul(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) ul[static_cast<std::size_t>(j)] = util(j) = u(rng);
    const auto q = choice_probabilities(util);
    const auto ref = oracle::mnl_probs(ul);
    CHECK((q.array() > 0.0).all());
    CHECK(std::abs(q.sum() - 1.0) <= 1e-12);
    for (Eigen::Index j = 0; j <= k; ++j) {
      CHECK(std::abs(q(j) - static_cast<double>(ref[static_cast<std::size_t>(j)])) <= 1e-12);
    }
  }
  const auto huge = choice_probabilities(vec({800.0, 799.0}));
  CHECK(std::isfinite(huge.sum()));
  CHECK(huge(1) / huge(2) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("augmented features") {
  const auto z = augmented_features(rows({{0.6, 0.8}}), vec({2.0}));
  CHECK(z(0, 0) == 0.6);
  CHECK(z(0, 3) == doctest::Approx(-1.6));
  Rng rng(2);
  const double p_max = 4.0;
  for (int rep = 0; rep < 50; ++rep) {
    const ContextMatrix ctx(oracle::context_rows(3, 4, rng));
    const Vector p = Vector::Random(3).cwiseAbs() * p_max;
    const auto zz = augmented_features(ctx, p);
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(zz.row(j).norm() <= (1 + p_max) * ctx.rows().row(j).norm() + 1e-12);
    }
  }
}

TEST_CASE("log loss: examples") {
  const PurchaseOutcome bought{1};
  CHECK(log_loss_pricing(params(vec({0, 0}), vec({1, 0})), rows({{1, 0}}), vec({0}), bought) ==
        doctest::Approx(std::log(2.0)));

  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto in = oracle::feasible_pricing(3, 3, 1.0, 0.1, rng);
    const ContextMatrix ctx(in.x);
    const Vector p = Vector::Random(3).cwiseAbs() * 3.0;
    const auto q = purchase_probs_pricing(params(in.theta, in.alpha), ctx, p);
    for (std::size_t c = 0; c <= 3; ++c) {
      const double l = log_loss_pricing(params(in.theta, in.alpha), ctx, p, {c});
      CHECK(l >= 0.0);
      CHECK(l == doctest::Approx(-std::log(q(static_cast<Eigen::Index>(c)))).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient: expectation over outcomes vanishes") {
  Rng rng(7);
  const auto in = oracle::feasible_pricing(2, 3, 1.0, 0.1, rng);
  const ContextMatrix ctx(in.x);
  const Vector p = vec({1.0, 2.0, 0.5});
  const auto pp = params(in.theta, in.alpha);
  const auto q = purchase_probs_pricing(pp, ctx, p);
  Vector mean = Vector::Zero(4);
  for (std::size_t c = 0; c <= 3; ++c) {
    mean += q(static_cast<Eigen::Index>(c)) * grad_log_loss_pricing(pp, ctx, p, {c});
  }
  CHECK(mean.norm() <= 1e-14);
}

TEST_CASE("gradient: single product hand expansion") {
  const auto pp = params(vec({0.3, -0.2}), vec({0.5, 0.1}));
  const auto ctx = rows({{1, 0}});
  const double q1 = 1.0 / (1.0 + std::exp(-(0.3 - 0.5 * 1.0)));
  for (std::size_t y = 0; y <= 1; ++y) {
    const Vector g = grad_log_loss_pricing(pp, ctx, vec({1.0}), {y});
    const Vector expected = (q1 - static_cast<double>(y)) * vec({1, 0, -1, 0});
    CHECK((g - expected).norm() <= 1e-15);
  }
}

TEST_CASE("gradient and Hessian match finite differences") {
  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index d = 1 + rep % 4, k = 1 + rep % 5;
    const auto in = oracle::feasible_pricing(d, k, 2.0, 0.1, rng);
    const ContextMatrix ctx(in.x);
    const Vector p = (Vector::Random(k).array() + 1.5).matrix();
    const std::size_t chosen = static_cast<std::size_t>(rep) % static_cast<std::size_t>(k + 1);
    const Matrix z = augmented_features(ctx, p);
    const Vector gamma = PricingParams{in.theta, in.alpha}.stacked();
    auto f = [&](const Vector& g) { return oracle::nll(z, Vector(), g, chosen); };
    auto grad = [&](const Vector& g) {
      return grad_log_loss_pricing(PricingParams::from_stacked(g), ctx, p, {chosen});
    };
    const Vector g = grad(gamma);
    CHECK(oracle::rel_err(g, oracle::fd_gradient(f, gamma)) < 1e-5);
    const Matrix h = hessian_log_loss_pricing(PricingParams::from_stacked(gamma), ctx, p);
    CHECK(oracle::rel_err(h, oracle::fd_jacobian(grad, gamma)) < 1e-4);
    CHECK((h - h.transpose()).norm() == 0.0);
    CHECK(oracle::min_eig(h) >= -1e-10);
  }
}

TEST_CASE("assortment gradient and Hessian match finite differences") {
  Rng rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index d = 2 + rep % 4;
    const ContextMatrix cands(oracle::context_rows(8, d, rng));
    const Assortment s = {static_cast<std::size_t>(rep % 8), static_cast<std::size_t>((rep + 3) % 8)};
    const Vector theta = oracle::in_ball(d, 3.0, rng);
    const std::size_t chosen = static_cast<std::size_t>(rep % 3);
    const Matrix z = cands.select(s).rows();
    auto f = [&](const Vector& t) { return oracle::nll(z, Vector(), t, chosen); };
    auto grad = [&](const Vector& t) { return grad_log_loss_assortment(t, cands, s, {chosen}); };
    CHECK(log_loss_assortment(theta, cands, s, {chosen}) == doctest::Approx(f(theta)).epsilon(1e-12));
    CHECK(oracle::rel_err(grad(theta), oracle::fd_gradient(f, theta)) < 1e-5);
    CHECK(oracle::rel_err(hessian_log_loss_assortment(theta, cands, s),
                          oracle::fd_jacobian(grad, theta)) < 1e-4);
  }
}

TEST_CASE("Hessian of one product is the logistic Hessian") {
  const auto pp = params(vec({0.2, 0.4}), vec({0.3, 0.6}));
  const auto ctx = rows({{0.6, 0.8}});
  const Vector p = vec({1.7});
  const double q = purchase_probs_pricing(pp, ctx, p)(1);
  const Matrix z = augmented_features(ctx, p);
  const Matrix expected = q * (1 - q) * z.transpose() * z;
  CHECK((hessian_log_loss_pricing(pp, ctx, p) - expected).norm() <= 1e-15);

  const Vector theta = vec({0.5, -1.0});
  const double qa = purchase_probs_assortment(theta, ctx, {0})(1);
  const Matrix xa = ctx.rows();
  CHECK((hessian_log_loss_assortment(theta, ctx, {0}) - qa * (1 - qa) * xa.transpose() * xa).norm() <=
        1e-15);
}

TEST_CASE("Hessian sandwich and gradient outer-product bound") {
  Rng rng(19);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index d = 1 + rep % 3, k = 1 + rep % 4;
    const auto in = oracle::feasible_pricing(d, k, 1.5, 0.1, rng);
    const ContextMatrix ctx(in.x);
    const Vector p = (Vector::Random(k).array() + 2.0).matrix();
    const auto pp = params(in.theta, in.alpha);
    const Matrix z = augmented_features(ctx, p);
    const Matrix h = hessian_log_loss_pricing(pp, ctx, p);
    const Vector kappa = curvature_terms(purchase_probs_pricing(pp, ctx, p));
    const Matrix lower = z.transpose() * kappa.asDiagonal() * z;
    const Matrix upper = 2.0 * z.transpose() * z;
    CHECK(oracle::min_eig(h - lower) >= -1e-10);
    CHECK(oracle::min_eig(upper - h) >= -1e-10);
    for (std::size_t c = 0; c <= static_cast<std::size_t>(k); ++c) {
      const Vector g = grad_log_loss_pricing(pp, ctx, p, {c});
      CHECK(oracle::min_eig(upper - g * g.transpose()) >= -1e-10);
    }
  }
}

TEST_CASE("self-concordance constant") {
  CHECK(self_concordance_constant(1, 0.0) == doctest::Approx(std::sqrt(6.0)));
  CHECK(self_concordance_constant(4, 0.0) == doctest::Approx(2 * std::sqrt(6.0)));
  CHECK(self_concordance_constant(1, 3.0) == doctest::Approx(4 * std::sqrt(6.0)));
}

TEST_CASE("self-concordance Hessian comparison") {
  Rng rng(23);
  const double W = 1.0, p_max = 3.0;
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index d = 1 + rep % 3, k = 1 + rep % 3;
    const ContextMatrix ctx(oracle::context_rows(k, d, rng));
    const Vector p = Vector::Random(k).cwiseAbs() * p_max;
    const MnlLoss loss = pricing_loss(ctx, p, {0});
    const double m = self_concordance_constant(static_cast<std::size_t>(k), p_max);
    const Vector x = oracle::in_ball(2 * d, W, rng);
    const Vector y = rep % 3 == 0 ? Vector(-x.normalized() * W) : oracle::in_ball(2 * d, W, rng);

    const auto same = check_self_concordance(loss, x, x, m);
    CHECK(same.holds);
    CHECK(same.margin >= -1e-12);

    const auto pair = check_self_concordance(loss, x, y, m);
    CHECK(pair.holds);
    const Matrix diff = loss.hessian(y) - std::exp(-m * (y - x).norm()) * loss.hessian(x);
    CHECK(oracle::min_eig(diff) >= -1e-10);
    CHECK(pair.margin == doctest::Approx(oracle::min_eig(diff)).epsilon(1e-6).scale(1e-12));
  }
}

TEST_CASE("known-sensitivity loss uses the price as an offset") {
  const auto ctx = rows({{0.6, 0.8}});
  const MnlLoss loss(ctx.rows(), vec({-1.5}), {1});
  const Vector theta = vec({1.0, 0.5});
  CHECK(loss.utilities(theta)(0) == doctest::Approx(0.6 + 0.4 - 1.5));
  CHECK(loss.value(theta) == doctest::Approx(oracle::nll(ctx.rows(), vec({-1.5}), theta, 1)));
}

}  // TEST_SUITE
