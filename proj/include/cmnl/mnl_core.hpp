#pragma once

#include <cstddef>

#include "cmnl/types.hpp"

namespace cmnl {

/// MNL probabilities with a zero-utility outside option.
///
/// Returns a vector of length k + 1: entry 0 is 1 / (1 + sum_i exp(u_i)) and
/// entry j is exp(u_{j-1}) / (1 + sum_i exp(u_i)). The largest of the utilities
/// and the outside option's zero is subtracted before exponentiation. Feasible
/// parameters keep |u| <= W (1 + p_max), so natural-scale storage does not
/// underflow for the bounded problems this library solves.
ProbVector choice_probabilities(const Vector& utilities);

/// Rows [x_j, -p_j x_j] (k x 2d), the features that make utilities linear in
/// the stacked parameter (theta, alpha).
Matrix augmented_features(const ContextMatrix& ctx, const Vector& prices);

Vector pricing_utilities(const PricingParams& params, const ContextMatrix& ctx,
                         const Vector& prices);

ProbVector purchase_probs_pricing(const PricingParams& params,
                                  const ContextMatrix& ctx,
                                  const Vector& prices);

/// Probabilities over S u {0}; entry i + 1 belongs to assortment[i].
ProbVector purchase_probs_assortment(const Vector& theta,
                                     const ContextMatrix& ctx,
                                     const Assortment& assortment);

/// q_j * q_0 for every offered product (length k); the per-instance quantity
/// whose minimum over the feasible set defines the kappa constants.
Vector curvature_terms(const ProbVector& probs);

/// One period's negative log-likelihood as a function of a parameter vector:
///
///   l(b) = -sum_j y_j u_j(b) + log(1 + sum_j exp(u_j(b))),  u = Z b + offset.
///
/// Pricing with unknown sensitivities uses Z = augmented features and a zero
/// offset, pricing with a known unit sensitivity uses Z = X and offset = -p,
/// and assortments use the offered rows of X.
class MnlLoss {
 public:
  MnlLoss(Matrix features, Vector offset, PurchaseOutcome outcome = {});
  MnlLoss(Matrix features, PurchaseOutcome outcome = {});

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  const Matrix& features() const { return features_; }
  PurchaseOutcome outcome() const { return outcome_; }

  Vector utilities(const Vector& beta) const;
  ProbVector probabilities(const Vector& beta) const;

  double value(const Vector& beta) const;
  /// sum_j (q_j - y_j) z_j
  Vector gradient(const Vector& beta) const;
  /// sum_j q_j z_j z_j' - (sum_j q_j z_j)(sum_j q_j z_j)'; independent of y.
  Matrix hessian(const Vector& beta) const;

  /// Accumulates the gradient and Hessian into the given buffers.
  void accumulate(const Vector& beta, Vector& grad, Matrix& hess) const;

 private:
  void check_beta(const Vector& beta) const;

  Matrix features_;
  Vector offset_;
  PurchaseOutcome outcome_;
};

MnlLoss pricing_loss(const ContextMatrix& ctx, const Vector& prices,
                     PurchaseOutcome outcome = {});
MnlLoss assortment_loss(const ContextMatrix& ctx, const Assortment& assortment,
                        PurchaseOutcome outcome = {});

double log_loss_pricing(const PricingParams& params, const ContextMatrix& ctx,
                        const Vector& prices, PurchaseOutcome outcome);
Vector grad_log_loss_pricing(const PricingParams& params,
                             const ContextMatrix& ctx, const Vector& prices,
                             PurchaseOutcome outcome);
Matrix hessian_log_loss_pricing(const PricingParams& params,
                                const ContextMatrix& ctx, const Vector& prices);

double log_loss_assortment(const Vector& theta, const ContextMatrix& ctx,
                           const Assortment& assortment,
                           PurchaseOutcome outcome);
Vector grad_log_loss_assortment(const Vector& theta, const ContextMatrix& ctx,
                                const Assortment& assortment,
                                PurchaseOutcome outcome);
Matrix hessian_log_loss_assortment(const Vector& theta,
                                   const ContextMatrix& ctx,
                                   const Assortment& assortment);

/// Self-concordant-like constant (1 + p_max) sqrt(6 k) of a k-product loss.
/// Pass p_max = 0 for assortment losses (feature norm bound 1).
double self_concordance_constant(std::size_t k, double p_max);

/// Smallest eigenvalue of a symmetric matrix.
double min_symmetric_eigenvalue(const Matrix& m);

struct SelfConcordanceCheck {
  bool holds = false;
  /// min eig(hess(y) - exp(-M |y - x|) hess(x)); >= 0 when the comparison holds.
  double margin = 0.0;
  /// Larger spectral norm of the two Hessians; the tolerance is relative to it.
  double scale = 0.0;
};

/// Checks exp(-M_f |y - x|_2) hess f(x) <= hess f(y) in the Loewner order.
SelfConcordanceCheck check_self_concordance(const MnlLoss& loss,
                                            const Vector& x, const Vector& y,
                                            double m_f, double rel_tol = 1e-9);

}  // namespace cmnl
