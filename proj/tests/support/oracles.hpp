// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numerical routines.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cmnl/types.hpp"

namespace oracle {

using cmnl::Matrix;
using cmnl::Rng;
using cmnl::Vector;

inline Vector unit_vector(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = n(rng);
  return z / z.norm();
}

/// Uniform in the d-ball of the given radius.
inline Vector in_ball(Eigen::Index d, double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return radius * std::pow(u(rng), 1.0 / static_cast<double>(d)) * unit_vector(d, rng);
}

/// k rows with norm in (0, 1].
inline Matrix context_rows(Eigen::Index k, Eigen::Index d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Matrix x(k, d);
  for (Eigen::Index j = 0; j < k; ++j) x.row(j) = u(rng) * unit_vector(d, rng).transpose();
  return x;
}

struct PricingInstance {
  Vector theta;
  Vector alpha;
  Matrix x;  // k x d
  double W = 1.0;
  double L = 0.1;
};

/// Parameters with |(theta, alpha)| <= W and rows with x'alpha >= L.
inline PricingInstance feasible_pricing(Eigen::Index d, Eigen::Index k, double W, double L,
                                        Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PricingInstance in;
  in.W = W;
  in.L = L;
  const double a = W * (0.5 + 0.5 * u(rng));
  in.alpha = a * unit_vector(d, rng).cwiseAbs();
  in.theta = in_ball(d, std::sqrt(std::max(0.0, W * W - a * a)), rng);
  in.x.resize(k, d);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector row;
    do {
      row = (0.5 + 0.5 * u(rng)) * unit_vector(d, rng);
    } while (row.dot(in.alpha) < L);
    in.x.row(j) = row.transpose();
  }
  return in;
}

/// MNL probabilities in long double without any shift (utilities must be moderate).
inline std::vector<long double> mnl_probs(const std::vector<long double>& u) {
  long double denom = 1.0L;
  for (long double v : u) denom += std::exp(v);
  std::vector<long double> q(u.size() + 1);
  q[0] = 1.0L / denom;
  for (std::size_t j = 0; j < u.size(); ++j) q[j + 1] = std::exp(u[j]) / denom;
  return q;
}

/// Negative log-likelihood written out directly: -u_y + log(1 + sum exp u).
inline double nll(const Matrix& z, const Vector& offset, const Vector& beta, std::size_t chosen) {
  std::vector<long double> u(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    long double s = offset.size() ? offset(j) : 0.0L;
    for (Eigen::Index i = 0; i < z.cols(); ++i) s += static_cast<long double>(z(j, i)) * beta(i);
    u[static_cast<std::size_t>(j)] = s;
  }
  const auto q = mnl_probs(u);
  return static_cast<double>(-std::log(q[chosen]));
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double h = 1e-5) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    j.col(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return j;
}

/// |a - b| / max(|b|, floor), in the max norm.
inline double rel_err(const Matrix& a, const Matrix& b, double floor = 1e-6) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

inline double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Plain bisection for the root of a decreasing function on [lo, hi].
inline double bisect_decreasing(const std::function<double(double)>& g, double lo, double hi,
                                int iters = 400) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Principal branch of Lambert W for z >= 0 by Halley iteration.
inline double lambert_w(double z) {
  double w = std::log1p(z);
  for (int i = 0; i < 100; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
    w -= step;
    if (std::abs(step) < 1e-17 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

/// Projection of y onto {|x| <= r, A x >= b} in the H-norm by enumerating
/// every active set of half-spaces, with the ball either inactive or active
/// (ball multiplier found by bisection). Returns the best feasible candidate.
struct QpAnswer {
  Vector x;
  bool found = false;
};

inline Vector equality_qp(const Matrix& Q, const Vector& c, const Matrix& Aeq, const Vector& beq,
                          bool* ok) {
  const Eigen::Index n = Q.rows(), m = Aeq.rows();
  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = Q;
  kkt.topRightCorner(n, m) = Aeq.transpose();
  kkt.bottomLeftCorner(m, n) = Aeq;
  Vector rhs(n + m);
  rhs << c, beq;
  Eigen::FullPivLU<Matrix> lu(kkt);
  *ok = lu.isInvertible();
  if (!*ok) return Vector::Zero(n);
  return lu.solve(rhs).head(n);
}

inline QpAnswer enumerate_projection(const Vector& y, const Matrix& H, double r, const Matrix& A,
                                     const Vector& b, double feas_tol = 1e-9) {
  const Eigen::Index n = y.size(), m = A.rows();
  QpAnswer best;
  double best_obj = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& x) {
    if (x.norm() > r * (1.0 + feas_tol) + feas_tol) return;
    if (m > 0 && ((A * x - b).array() < -feas_tol).any()) return;
    const double obj = (x - y).dot(H * (x - y));
    if (obj < best_obj) {
      best_obj = obj;
      best.x = x;
      best.found = true;
    }
  };
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (mask & (1u << i)) rows.push_back(i);
    }
    if (static_cast<Eigen::Index>(rows.size()) > n) continue;
    Matrix Aeq(static_cast<Eigen::Index>(rows.size()), n);
    Vector beq(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Aeq.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
      beq(static_cast<Eigen::Index>(i)) = b(rows[i]);
    }
    bool ok = false;
    auto solve_nu = [&](double nu) {
      return equality_qp(H + nu * Matrix::Identity(n, n), H * y, Aeq, beq, &ok);
    };
    const Vector x0 = solve_nu(0.0);
    if (!ok) continue;
    consider(x0);
    if (x0.norm() <= r) continue;
    double lo = 0.0, hi = 1.0;
    while (solve_nu(hi).norm() > r && hi < 1e15) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (solve_nu(mid).norm() > r ? lo : hi) = mid;
    }
    consider(solve_nu(hi));
  }
  return best;
}

/// Minimizes a smooth convex function by Barzilai-Borwein gradient descent
/// with central-difference gradients.
inline Vector bb_minimize(const std::function<double(const Vector&)>& f, Vector x,
                          int iters = 5000, double gtol = 1e-9) {
  Vector g = fd_gradient(f, x, 1e-5);
  double step = 1e-2;
  for (int it = 0; it < iters && g.norm() > gtol; ++it) {
    const Vector x_new = x - step * g;
    const Vector g_new = fd_gradient(f, x_new, 1e-5);
    const Vector s = x_new - x, yv = g_new - g;
    const double sy = s.dot(yv);
    step = sy > 0.0 ? s.squaredNorm() / sy : 1e-2;
    x = x_new;
    g = g_new;
  }
  return x;
}

/// Asymptotic Kolmogorov survival function P(K > lambda).
inline double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    s += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

/// KS p-value of a sample against a continuous CDF.
inline double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace oracle
