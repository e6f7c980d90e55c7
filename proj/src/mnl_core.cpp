#include "cmnl/mnl_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cmnl {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

void check_pricing_args(const PricingParams& params, const ContextMatrix& ctx,
                        const Vector& prices) {
  require(params.theta.size() == params.alpha.size(),
          "pricing: theta and alpha lengths differ");
  require(static_cast<std::size_t>(params.theta.size()) == ctx.dim(),
          "pricing: parameter length does not match context width");
  require(static_cast<std::size_t>(prices.size()) == ctx.size(),
          "pricing: price count does not match context rows");
  require(prices.allFinite(), "pricing: prices must be finite");
}

Matrix offered_rows(const ContextMatrix& ctx, const Assortment& assortment) {
  if (assortment.empty()) throw DimensionError("assortment: empty set");
  Matrix z(static_cast<Eigen::Index>(assortment.size()),
           static_cast<Eigen::Index>(ctx.dim()));
  for (std::size_t i = 0; i < assortment.size(); ++i) {
    if (assortment[i] >= ctx.size()) {
      throw DimensionError("assortment: index " + std::to_string(assortment[i]) +
                           " out of range");
    }
    z.row(static_cast<Eigen::Index>(i)) = ctx.row(assortment[i]);
  }
  return z;
}

}  // namespace

ProbVector choice_probabilities(const Vector& utilities) {
  const Eigen::Index k = utilities.size();
  const double shift = std::max(0.0, k > 0 ? utilities.maxCoeff() : 0.0);
  ProbVector probs(k + 1);
  probs(0) = std::exp(-shift);
  for (Eigen::Index j = 0; j < k; ++j) probs(j + 1) = std::exp(utilities(j) - shift);
  probs /= probs.sum();
  return probs;
}

Matrix augmented_features(const ContextMatrix& ctx, const Vector& prices) {
  require(static_cast<std::size_t>(prices.size()) == ctx.size(),
          "augmented_features: price count does not match context rows");
  const Eigen::Index d = static_cast<Eigen::Index>(ctx.dim());
  Matrix z(ctx.rows().rows(), 2 * d);
  z.leftCols(d) = ctx.rows();
  z.rightCols(d) = -(prices.asDiagonal() * ctx.rows());
  return z;
}

Vector pricing_utilities(const PricingParams& params, const ContextMatrix& ctx,
                         const Vector& prices) {
  check_pricing_args(params, ctx, prices);
  const Vector base = ctx.rows() * params.theta;
  const Vector sens = ctx.rows() * params.alpha;
  return base - sens.cwiseProduct(prices);
}

ProbVector purchase_probs_pricing(const PricingParams& params,
                                  const ContextMatrix& ctx,
                                  const Vector& prices) {
  return choice_probabilities(pricing_utilities(params, ctx, prices));
}

ProbVector purchase_probs_assortment(const Vector& theta,
                                     const ContextMatrix& ctx,
                                     const Assortment& assortment) {
  require(static_cast<std::size_t>(theta.size()) == ctx.dim(),
          "assortment: theta length does not match context width");
  return choice_probabilities(offered_rows(ctx, assortment) * theta);
}

Vector curvature_terms(const ProbVector& probs) {
  return probs.tail(probs.size() - 1) * probs(0);
}

MnlLoss::MnlLoss(Matrix features, Vector offset, PurchaseOutcome outcome)
    : features_(std::move(features)),
      offset_(std::move(offset)),
      outcome_(outcome) {
  require(features_.rows() >= 1, "MnlLoss: no products");
  require(offset_.size() == features_.rows(),
          "MnlLoss: offset length does not match product count");
  require(outcome_.chosen <= size(), "MnlLoss: outcome index out of range");
}

MnlLoss::MnlLoss(Matrix features, PurchaseOutcome outcome)
    : MnlLoss(features, Vector::Zero(features.rows()), outcome) {}

void MnlLoss::check_beta(const Vector& beta) const {
  require(beta.size() == features_.cols(),
          "MnlLoss: parameter length does not match feature width");
}

Vector MnlLoss::utilities(const Vector& beta) const {
  check_beta(beta);
  return features_ * beta + offset_;
}

ProbVector MnlLoss::probabilities(const Vector& beta) const {
  return choice_probabilities(utilities(beta));
}

double MnlLoss::value(const Vector& beta) const {
  // -log q_c computed as log-sum-exp minus the chosen utility.
  const Vector u = utilities(beta);
  const double shift = std::max(0.0, u.maxCoeff());
  const double lse = shift + std::log(std::exp(-shift) + (u.array() - shift).exp().sum());
  const double chosen_u =
      outcome_.chosen == 0 ? 0.0 : u(static_cast<Eigen::Index>(outcome_.chosen - 1));
  return lse - chosen_u;
}

Vector MnlLoss::gradient(const Vector& beta) const {
  const ProbVector q = probabilities(beta);
  Vector residual = q.tail(q.size() - 1);
  if (outcome_.chosen > 0) residual(static_cast<Eigen::Index>(outcome_.chosen - 1)) -= 1.0;
  return features_.transpose() * residual;
}

Matrix MnlLoss::hessian(const Vector& beta) const {
  const ProbVector q = probabilities(beta);
  const Vector w = q.tail(q.size() - 1);
  const Vector mean = features_.transpose() * w;
  Matrix h = features_.transpose() * w.asDiagonal() * features_;
  h.noalias() -= mean * mean.transpose();
  return 0.5 * (h + h.transpose());
}

void MnlLoss::accumulate(const Vector& beta, Vector& grad, Matrix& hess) const {
  const ProbVector q = probabilities(beta);
  const Vector w = q.tail(q.size() - 1);
  Vector residual = w;
  if (outcome_.chosen > 0) residual(static_cast<Eigen::Index>(outcome_.chosen - 1)) -= 1.0;
  grad.noalias() += features_.transpose() * residual;
  const Vector mean = features_.transpose() * w;
  hess.noalias() += features_.transpose() * w.asDiagonal() * features_;
  hess.noalias() -= mean * mean.transpose();
}

MnlLoss pricing_loss(const ContextMatrix& ctx, const Vector& prices,
                     PurchaseOutcome outcome) {
  return MnlLoss(augmented_features(ctx, prices), outcome);
}

MnlLoss assortment_loss(const ContextMatrix& ctx, const Assortment& assortment,
                        PurchaseOutcome outcome) {
  return MnlLoss(offered_rows(ctx, assortment), outcome);
}

double log_loss_pricing(const PricingParams& params, const ContextMatrix& ctx,
                        const Vector& prices, PurchaseOutcome outcome) {
  check_pricing_args(params, ctx, prices);
  return pricing_loss(ctx, prices, outcome).value(params.stacked());
}

Vector grad_log_loss_pricing(const PricingParams& params,
                             const ContextMatrix& ctx, const Vector& prices,
                             PurchaseOutcome outcome) {
  check_pricing_args(params, ctx, prices);
  return pricing_loss(ctx, prices, outcome).gradient(params.stacked());
}

Matrix hessian_log_loss_pricing(const PricingParams& params,
                                const ContextMatrix& ctx, const Vector& prices) {
  check_pricing_args(params, ctx, prices);
  return pricing_loss(ctx, prices).hessian(params.stacked());
}

double log_loss_assortment(const Vector& theta, const ContextMatrix& ctx,
                           const Assortment& assortment,
                           PurchaseOutcome outcome) {
  return assortment_loss(ctx, assortment, outcome).value(theta);
}

Vector grad_log_loss_assortment(const Vector& theta, const ContextMatrix& ctx,
                                const Assortment& assortment,
                                PurchaseOutcome outcome) {
  return assortment_loss(ctx, assortment, outcome).gradient(theta);
}

Matrix hessian_log_loss_assortment(const Vector& theta,
                                   const ContextMatrix& ctx,
                                   const Assortment& assortment) {
  return assortment_loss(ctx, assortment).hessian(theta);
}

double self_concordance_constant(std::size_t k, double p_max) {
  if (k == 0) throw DimensionError("self_concordance_constant: k must be >= 1");
  if (p_max < 0) throw InfeasibleError("self_concordance_constant: p_max < 0");
  return (1.0 + p_max) * std::sqrt(6.0 * static_cast<double>(k));
}

double min_symmetric_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SelfConcordanceCheck check_self_concordance(const MnlLoss& loss,
                                            const Vector& x, const Vector& y,
                                            double m_f, double rel_tol) {
  const Matrix hx = loss.hessian(x);
  const Matrix hy = loss.hessian(y);
  const double shrink = std::exp(-m_f * (y - x).norm());
  SelfConcordanceCheck out;
  out.margin = min_symmetric_eigenvalue(hy - shrink * hx);
  const auto spectral = [](const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  };
  out.scale = std::max(spectral(hx), spectral(hy));
  out.holds = out.margin >= -rel_tol * out.scale;
  return out;
}

}  // namespace cmnl
