#include "cmnl/ofu_mnl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmnl/mnl_core.hpp"

namespace cmnl {

namespace {

void check_theta(const Vector& theta, const AssortmentHistory& history) {
  if (static_cast<std::size_t>(theta.size()) != history.dim()) {
    throw DimensionError("ofu_mnl: parameter length does not match feature width");
  }
}

// Shared pass over the history: loss value, gradient and Hessian without the
// ridge term. Null outputs are skipped.
void accumulate_history(const Vector& theta, const AssortmentHistory& history,
                        double* value, Vector* grad, Matrix* hess) {
  for (const AssortmentRecord& rec : history.records()) {
    const Vector u = rec.offered * theta;
    const ProbVector q = choice_probabilities(u);
    const Vector w = q.tail(q.size() - 1);
    if (value) {
      const double shift = std::max(0.0, u.maxCoeff());
      const double lse = shift + std::log(std::exp(-shift) + (u.array() - shift).exp().sum());
      *value += lse - (rec.outcome.chosen == 0
                           ? 0.0
                           : u(static_cast<Eigen::Index>(rec.outcome.chosen - 1)));
    }
    if (grad) {
      Vector residual = w;
      if (rec.outcome.chosen > 0) residual(static_cast<Eigen::Index>(rec.outcome.chosen - 1)) -= 1.0;
      grad->noalias() += rec.offered.transpose() * residual;
    }
    if (hess) {
      const Vector mean = rec.offered.transpose() * w;
      hess->noalias() += rec.offered.transpose() * w.asDiagonal() * rec.offered;
      hess->noalias() -= mean * mean.transpose();
    }
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void AssortmentHistory::add(const ContextMatrix& candidates, const Assortment& offered,
                            PurchaseOutcome outcome) {
  if (candidates.dim() != d_) {
    throw DimensionError("AssortmentHistory: context width does not match");
  }
  if (offered.empty()) throw DimensionError("AssortmentHistory: empty assortment");
  if (outcome.chosen > offered.size()) {
    throw DimensionError("AssortmentHistory: outcome index out of range");
  }
  AssortmentRecord rec{candidates.select(offered).rows(), outcome};
  if (outcome.chosen > 0) {
    purchased_ += rec.offered.row(static_cast<Eigen::Index>(outcome.chosen - 1)).transpose();
  }
  records_.push_back(std::move(rec));
}

double assortment_lambda(std::size_t t, std::size_t d, std::size_t K) {
  if (t == 0) throw ConfigError("assortment_lambda: periods start at 1");
  if (t == 1) return 1.0;
  return static_cast<double>(d) * std::log(static_cast<double>(t * K));
}

double gamma_radius(std::size_t t, std::size_t d, std::size_t K, double lambda,
                    double delta, double W) {
  if (!(lambda > 0.0) || !(delta > 0.0) || t == 0 || d == 0 || K == 0) {
    throw ConfigError("gamma_radius: need positive lambda, delta, t, d, K");
  }
  const double dd = static_cast<double>(d);
  const double sl = std::sqrt(lambda);
  const double inner =
      (4.0 / delta) * (1.0 + 2.0 * static_cast<double>(t) * static_cast<double>(K) / (dd * lambda));
  return sl * (W + 0.5) + (2.0 * dd / sl) * std::log(inner);
}

double optimism_inflation(std::size_t K, double W) {
  return 1.0 + std::sqrt(6.0 * static_cast<double>(K)) * W;
}

double regularized_loss(const Vector& theta, const AssortmentHistory& history,
                        double lambda) {
  check_theta(theta, history);
  double value = 0.5 * lambda * theta.squaredNorm();
  accumulate_history(theta, history, &value, nullptr, nullptr);
  return value;
}

Vector regularized_gradient(const Vector& theta, const AssortmentHistory& history,
                            double lambda) {
  check_theta(theta, history);
  Vector grad = lambda * theta;
  accumulate_history(theta, history, nullptr, &grad, nullptr);
  return grad;
}

Matrix regularized_hessian(const Vector& theta, const AssortmentHistory& history,
                           double lambda) {
  check_theta(theta, history);
  Matrix hess = lambda * Matrix::Identity(theta.size(), theta.size());
  accumulate_history(theta, history, nullptr, nullptr, &hess);
  return symmetrized(hess);
}

Vector g_map(const Vector& theta, const AssortmentHistory& history, double lambda) {
  check_theta(theta, history);
  Vector g = lambda * theta;
  for (const AssortmentRecord& rec : history.records()) {
    const ProbVector q = choice_probabilities(rec.offered * theta);
    g.noalias() += rec.offered.transpose() * q.tail(q.size() - 1);
  }
  return g;
}

MleFit fit_mle(const AssortmentHistory& history, double lambda, double tol,
               const std::optional<Vector>& warm_start) {
  if (!(lambda > 0.0)) throw ConfigError("fit_mle: lambda must be positive");
  const auto d = static_cast<Eigen::Index>(history.dim());
  Vector theta = warm_start ? *warm_start : Vector::Zero(d);
  check_theta(theta, history);

  MleFit fit;
  for (std::size_t it = 0; it <= kMleMaxIter; ++it) {
    double value = 0.5 * lambda * theta.squaredNorm();
    Vector grad = lambda * theta;
    Matrix hess = lambda * Matrix::Identity(d, d);
    accumulate_history(theta, history, &value, &grad, &hess);
    fit.grad_norm = grad.norm();
    fit.iterations = it;
    if (fit.grad_norm <= tol) {
      fit.theta = theta;
      return fit;
    }
    if (it == kMleMaxIter) break;

    const Vector step = -symmetrized(hess).llt().solve(grad);
    const double decrement2 = -grad.dot(step);
    double s = 1.0;
    // Inside the quadratic-convergence region the full step is taken; the
    // objective differences there are below rounding noise.
    if (decrement2 > 0.25) {
      while (s > 1e-12) {
        const double trial = regularized_loss(theta + s * step, history, lambda);
        if (trial <= value - 1e-4 * s * decrement2) break;
        s *= 0.5;
      }
    }
    theta += s * step;
  }
  throw ConvergenceError("fit_mle: gradient tolerance not reached in " +
                             std::to_string(kMleMaxIter) + " iterations",
                         fit.grad_norm);
}

ConfidenceSet build_confidence_set(const AssortmentHistory& history, std::size_t t,
                                   double delta, double lambda, double W,
                                   std::size_t K, double mle_tol,
                                   const std::optional<Vector>& warm_start) {
  ConfidenceSet cs;
  cs.t = t;
  cs.lambda = lambda;
  cs.theta_hat = fit_mle(history, lambda, mle_tol, warm_start).theta;
  cs.hessian = regularized_hessian(cs.theta_hat, history, lambda);
  cs.hessian_chol.compute(cs.hessian);
  cs.radius = gamma_radius(t, history.dim(), K, lambda, delta, W);
  cs.inflation = optimism_inflation(K, W);
  cs.g_hat = g_map(cs.theta_hat, history, lambda);
  return cs;
}

double confidence_distance(const Vector& theta, const ConfidenceSet& cs,
                           const AssortmentHistory& history) {
  const Vector diff = g_map(theta, history, cs.lambda) - cs.g_hat;
  const Matrix h = regularized_hessian(theta, history, cs.lambda);
  return std::sqrt(std::max(0.0, diff.dot(h.llt().solve(diff))));
}

bool in_confidence_set(const Vector& theta, const ConfidenceSet& cs,
                       const AssortmentHistory& history) {
  return confidence_distance(theta, cs, history) <= cs.radius;
}

Vector optimistic_param(const Vector& x, const ConfidenceSet& cs) {
  if (x.size() != cs.theta_hat.size()) {
    throw DimensionError("optimistic_param: feature width does not match");
  }
  const Vector hinv_x = cs.hessian_chol.solve(x);
  const double norm = std::sqrt(std::max(0.0, x.dot(hinv_x)));
  if (norm == 0.0) return cs.theta_hat;
  return cs.theta_hat + (cs.optimistic_radius() / norm) * hinv_x;
}

double optimistic_utility(const Vector& x, const ConfidenceSet& cs) {
  if (x.size() != cs.theta_hat.size()) {
    throw DimensionError("optimistic_utility: feature width does not match");
  }
  const double norm = std::sqrt(std::max(0.0, x.dot(cs.hessian_chol.solve(x))));
  return x.dot(cs.theta_hat) + cs.optimistic_radius() * norm;
}

Assortment top_k(const Vector& scores, std::size_t K) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (K == 0 || K > n) throw DimensionError("top_k: need 1 <= K <= number of items");
  Assortment idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  idx.resize(K);
  return idx;
}

Assortment select_assortment(const ContextMatrix& candidates, const ConfidenceSet& cs,
                             std::size_t K) {
  Vector scores(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    scores(static_cast<Eigen::Index>(j)) =
        optimistic_utility(candidates.row(j).transpose(), cs);
  }
  return top_k(scores, K);
}

Assortment optimal_assortment(const Vector& theta, const ContextMatrix& candidates,
                              std::size_t K) {
  if (static_cast<std::size_t>(theta.size()) != candidates.dim()) {
    throw DimensionError("optimal_assortment: parameter length does not match");
  }
  return top_k(candidates.rows() * theta, K);
}

double expected_sales(const Vector& theta, const ContextMatrix& candidates,
                      const Assortment& assortment) {
  const ProbVector q = purchase_probs_assortment(theta, candidates, assortment);
  return 1.0 - q(0);
}

ProbVector generalized_probabilities(const ContextMatrix& candidates,
                                     const Assortment& assortment,
                                     const Matrix& params) {
  if (params.rows() != static_cast<Eigen::Index>(candidates.dim()) ||
      params.cols() != static_cast<Eigen::Index>(candidates.size())) {
    throw DimensionError("generalized_probabilities: need a d x N parameter matrix");
  }
  if (assortment.empty()) throw DimensionError("generalized_probabilities: empty assortment");
  Vector u(static_cast<Eigen::Index>(assortment.size()));
  for (std::size_t i = 0; i < assortment.size(); ++i) {
    const std::size_t j = assortment[i];
    if (j >= candidates.size()) throw DimensionError("generalized_probabilities: index out of range");
    u(static_cast<Eigen::Index>(i)) = candidates.row(j).dot(params.col(static_cast<Eigen::Index>(j)));
  }
  return choice_probabilities(u);
}

double kappa_star_t(const Vector& theta, const ContextMatrix& candidates, std::size_t K) {
  const Assortment best = optimal_assortment(theta, candidates, K);
  return curvature_terms(purchase_probs_assortment(theta, candidates, best)).sum();
}

void Kappa2Tracker::update(const ProbVector& probs) {
  const Vector terms = curvature_terms(probs);
  if (terms.size() == 0) return;
  value_ = empty_ ? terms.minCoeff() : std::min(value_, terms.minCoeff());
  empty_ = false;
}

double empirical_kappa2(const std::vector<ProbVector>& realized) {
  Kappa2Tracker tracker;
  for (const ProbVector& q : realized) tracker.update(q);
  return tracker.value();
}

OfuMnlLearner::OfuMnlLearner(std::size_t d, std::size_t K, double W, OfuOptions options)
    : d_(d), K_(K), W_(W), options_(std::move(options)), history_(d) {
  if (d == 0 || K == 0) throw ConfigError("OfuMnlLearner: d and K must be >= 1");
  if (!(W > 0.0)) throw ConfigError("OfuMnlLearner: W must be positive");
  if (!(options_.delta > 0.0 && options_.delta < 1.0)) {
    throw ConfigError("OfuMnlLearner: delta must lie in (0, 1)");
  }
  if (options_.refit_every == 0) options_.refit_every = 1;
}

double OfuMnlLearner::lambda(std::size_t t) const {
  return options_.lambda ? options_.lambda(t) : assortment_lambda(t, d_, K_);
}

Assortment OfuMnlLearner::select(const ContextMatrix& candidates) {
  if (candidates.dim() != d_) throw DimensionError("OfuMnlLearner: context width mismatch");
  const double lam = lambda(t_);
  const bool refit = !warm_ || (t_ - 1) % options_.refit_every == 0;
  if (refit) {
    cs_ = build_confidence_set(history_, t_, options_.delta, lam, W_, K_,
                               options_.mle_tol, warm_);
    warm_ = cs_.theta_hat;
  } else {
    cs_.t = t_;
    cs_.lambda = lam;
    cs_.hessian = regularized_hessian(cs_.theta_hat, history_, lam);
    cs_.hessian_chol.compute(cs_.hessian);
    cs_.radius = gamma_radius(t_, d_, K_, lam, options_.delta, W_);
    cs_.g_hat = g_map(cs_.theta_hat, history_, lam);
  }
  return select_assortment(candidates, cs_, K_);
}

void OfuMnlLearner::observe(const ContextMatrix& candidates, const Assortment& offered,
                            PurchaseOutcome outcome) {
  history_.add(candidates, offered, outcome);
  ++t_;
}

}  // namespace cmnl
