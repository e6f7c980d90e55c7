#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cmnl/types.hpp"

namespace cmnl {

/// One past period: the offered rows (|S| x d) and the observed choice.
struct AssortmentRecord {
  Matrix offered;
  PurchaseOutcome outcome;
};

class AssortmentHistory {
 public:
  explicit AssortmentHistory(std::size_t d) : d_(d), purchased_(Vector::Zero(static_cast<Eigen::Index>(d))) {}

  void add(const ContextMatrix& candidates, const Assortment& offered,
           PurchaseOutcome outcome);

  std::size_t dim() const { return d_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<AssortmentRecord>& records() const { return records_; }
  /// sum_s sum_j y_{s,j} x_{s,j}
  const Vector& purchased_features() const { return purchased_; }

 private:
  std::size_t d_;
  std::vector<AssortmentRecord> records_;
  Vector purchased_;
};

/// lambda_1 = 1 and lambda_t = d ln(t K) for t >= 2.
double assortment_lambda(std::size_t t, std::size_t d, std::size_t K);

/// gamma_t(delta) = sqrt(lambda)(W + 1/2)
///                  + (2d / sqrt(lambda)) ln((4/delta)(1 + 2tK / (d lambda))).
double gamma_radius(std::size_t t, std::size_t d, std::size_t K, double lambda,
                    double delta, double W);

/// 1 + sqrt(6K) W, the factor relating the g-distance to the H-distance.
double optimism_inflation(std::size_t K, double W);

/// Regularized negative log-likelihood
///   L(theta) = -sum_s sum_{j in S_s} y_{s,j} log q_{s,j}(S_s, theta) + lambda/2 |theta|^2
double regularized_loss(const Vector& theta, const AssortmentHistory& history,
                        double lambda);
Vector regularized_gradient(const Vector& theta, const AssortmentHistory& history,
                            double lambda);
/// H_t(theta): summed MNL Hessians plus lambda I.
Matrix regularized_hessian(const Vector& theta, const AssortmentHistory& history,
                           double lambda);

/// g_t(theta) = sum_s sum_{j in S_s} q_{s,j}(S_s, theta) x_{s,j} + lambda theta.
Vector g_map(const Vector& theta, const AssortmentHistory& history, double lambda);

struct MleFit {
  Vector theta;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

inline constexpr double kDefaultMleTol = 1e-8;
inline constexpr std::size_t kMleMaxIter = 100;

/// Damped Newton with Armijo backtracking; stops when |grad L| <= tol.
MleFit fit_mle(const AssortmentHistory& history, double lambda,
               double tol = kDefaultMleTol,
               const std::optional<Vector>& warm_start = std::nullopt);

struct ConfidenceSet {
  std::size_t t = 1;
  Vector theta_hat;
  Matrix hessian;  // H_t(theta_hat)
  Eigen::LLT<Matrix> hessian_chol;
  double radius = 0.0;     // gamma_t(delta)
  double inflation = 1.0;  // 1 + sqrt(6K) W
  double lambda = 1.0;
  Vector g_hat;            // g_t(theta_hat)

  double optimistic_radius() const { return inflation * radius; }
};

/// Fits the MLE on the first t-1 periods and evaluates H_t(theta_hat) and
/// gamma_t(delta).
ConfidenceSet build_confidence_set(const AssortmentHistory& history, std::size_t t,
                                   double delta, double lambda, double W,
                                   std::size_t K, double mle_tol = kDefaultMleTol,
                                   const std::optional<Vector>& warm_start = std::nullopt);

/// |g_t(theta) - g_t(theta_hat)| in the H_t(theta)^{-1} norm.
double confidence_distance(const Vector& theta, const ConfidenceSet& cs,
                           const AssortmentHistory& history);

/// Exact membership test theta in C_t(delta); H_t is re-evaluated at theta.
bool in_confidence_set(const Vector& theta, const ConfidenceSet& cs,
                       const AssortmentHistory& history);

/// argmax of x'theta over the ellipsoid |theta - theta_hat|_H <= r with
/// r = inflation * radius, i.e. theta_hat + r H^{-1}x / |x|_{H^{-1}}.
Vector optimistic_param(const Vector& x, const ConfidenceSet& cs);

/// x'theta_hat + r |x|_{H^{-1}}, the value x'optimistic_param(x, cs).
double optimistic_utility(const Vector& x, const ConfidenceSet& cs);

/// Indices of the K largest scores in descending order; ties go to the
/// lower index.
Assortment top_k(const Vector& scores, std::size_t K);

/// The K candidates with the highest optimistic utility.
Assortment select_assortment(const ContextMatrix& candidates, const ConfidenceSet& cs,
                             std::size_t K);

/// Top-K true utilities, which maximize expected sales under unit revenues.
Assortment optimal_assortment(const Vector& theta, const ContextMatrix& candidates,
                              std::size_t K);

/// sum_{j in S} q_j(S, theta).
double expected_sales(const Vector& theta, const ContextMatrix& candidates,
                      const Assortment& assortment);

/// Choice probabilities when product j uses its own parameter column
/// params.col(j); reduces to the plain MNL when all columns are equal.
ProbVector generalized_probabilities(const ContextMatrix& candidates,
                                     const Assortment& assortment,
                                     const Matrix& params);

/// sum_{j in S*} q_j(S*, theta) q_0(S*, theta) for the optimal S*.
double kappa_star_t(const Vector& theta, const ContextMatrix& candidates, std::size_t K);

/// Running minimum of q_j q_0 over realized offers at the true parameter.
class Kappa2Tracker {
 public:
  void update(const ProbVector& probs);
  double value() const { return value_; }
  bool empty() const { return empty_; }

 private:
  double value_ = 1.0;
  bool empty_ = true;
};

double empirical_kappa2(const std::vector<ProbVector>& realized);

struct OfuOptions {
  double delta = 0.05;
  /// Defaults to assortment_lambda(t, d, K).
  std::function<double(std::size_t)> lambda;
  double mle_tol = kDefaultMleTol;
  /// Refit the MLE every this many periods; the Hessian is refreshed every period.
  std::size_t refit_every = 1;
};

/// Optimistic MNL assortment learner. Each period it refits the regularized
/// MLE, builds the confidence set and offers the K items with the highest
/// optimistic utilities.
class OfuMnlLearner {
 public:
  OfuMnlLearner(std::size_t d, std::size_t K, double W, OfuOptions options);

  Assortment select(const ContextMatrix& candidates);
  void observe(const ContextMatrix& candidates, const Assortment& offered,
               PurchaseOutcome outcome);

  std::size_t period() const { return t_; }
  const AssortmentHistory& history() const { return history_; }
  /// Confidence set used by the last select() call.
  const ConfidenceSet& confidence_set() const { return cs_; }
  double lambda(std::size_t t) const;

 private:
  std::size_t d_;
  std::size_t K_;
  double W_;
  OfuOptions options_;
  AssortmentHistory history_;
  ConfidenceSet cs_;
  std::optional<Vector> warm_;
  std::size_t t_ = 1;
};

}  // namespace cmnl
