#include "cmnl/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cmnl {

namespace {

constexpr int kRootIterations = 300;

}  // namespace

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.norm() > radius + tol) return false;
  if (normals.rows() == 0) return true;
  return ((normals * x - offsets).array() >= -tol).all();
}

FeasibleSet FeasibleSet::ball(Eigen::Index n, double radius) {
  return FeasibleSet{radius, Matrix(0, n), Vector(0)};
}

HalfspaceQpSolution solve_halfspace_qp(const Matrix& Q, const Vector& c,
                                       const Matrix& A, const Vector& b) {
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success) {
    throw InfeasibleError("solve_halfspace_qp: metric is not positive definite");
  }
  const Vector x0 = llt.solve(c);
  const Eigen::Index m = A.rows();
  if (m == 0) return {x0, Vector(0)};

  // Dual: min 1/2 l'Ml - l'r over l >= 0, gradient M l - r = A x(l) - b.
  const Matrix qinv_at = llt.solve(A.transpose());
  const Matrix M = A * qinv_at;
  const Vector r = b - A * x0;
  const double tol = 1e-13 * (1.0 + r.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());

  Vector lambda = Vector::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const int cap = 10 * static_cast<int>(m) + 50;

  for (int outer = 0;; ++outer) {
    if (outer > cap) {
      throw ConvergenceError("solve_halfspace_qp: active set did not settle",
                             (M * lambda - r).minCoeff());
    }
    const Vector slack = M * lambda - r;
    Eigen::Index enter = -1;
    double worst = -tol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && slack(i) < worst) {
        worst = slack(i);
        enter = i;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;

    for (int inner = 0;; ++inner) {
      if (inner > cap) {
        throw ConvergenceError("solve_halfspace_qp: inner loop did not settle", worst);
      }
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
      }
      const auto p = static_cast<Eigen::Index>(idx.size());
      Matrix mpp(p, p);
      Vector rp(p);
      for (Eigen::Index a = 0; a < p; ++a) {
        rp(a) = r(idx[a]);
        for (Eigen::Index c2 = 0; c2 < p; ++c2) mpp(a, c2) = M(idx[a], idx[c2]);
      }
      const Vector zp = mpp.completeOrthogonalDecomposition().solve(rp);
      const Vector dp = rp - mpp * zp;
      if (dp.norm() > 1e-9 * (1.0 + rp.norm())) {
        // Dependent normals: the dual is unbounded below on this face along
        // d (M d = 0, r'd > 0). A nonnegative d is a Farkas certificate that
        // A x >= b is empty; otherwise walk along d until a multiplier hits zero.
        if (dp.minCoeff() >= -1e-12 * dp.norm()) {
          throw InfeasibleError("solve_halfspace_qp: half-spaces have empty intersection");
        }
        double step = std::numeric_limits<double>::infinity();
        Eigen::Index leave = -1;
        for (Eigen::Index a = 0; a < p; ++a) {
          if (dp(a) < 0.0 && lambda(idx[a]) / -dp(a) < step) {
            step = lambda(idx[a]) / -dp(a);
            leave = idx[a];
          }
        }
        for (Eigen::Index a = 0; a < p; ++a) lambda(idx[a]) += step * dp(a);
        lambda(leave) = 0.0;
        passive[static_cast<std::size_t>(leave)] = false;
        for (Eigen::Index i = 0; i < m; ++i) lambda(i) = std::max(0.0, lambda(i));
        continue;
      }
      Vector z = Vector::Zero(m);
      for (Eigen::Index a = 0; a < p; ++a) z(idx[a]) = zp(a);

      if ((zp.array() > 0.0).all()) {
        lambda = z;
        break;
      }
      double step = 1.0;
      for (Eigen::Index a = 0; a < p; ++a) {
        const Eigen::Index i = idx[a];
        if (z(i) <= 0.0) step = std::min(step, lambda(i) / (lambda(i) - z(i)));
      }
      lambda += step * (z - lambda);
      for (Eigen::Index a = 0; a < p; ++a) {
        const Eigen::Index i = idx[a];
        if (lambda(i) <= 1e-300 || (z(i) <= 0.0 && step == lambda(i) / (lambda(i) - z(i)))) {
          lambda(i) = 0.0;
          passive[static_cast<std::size_t>(i)] = false;
        }
      }
    }
  }
  return {x0 + qinv_at * lambda, lambda};
}

KktResiduals kkt_residuals(const Vector& y, const Matrix& H, const FeasibleSet& set,
                           const Vector& x, double nu, const Vector& lambda) {
  KktResiduals k;
  const Vector hd = H * (x - y);
  Vector station = hd + nu * x;
  if (set.constraints() > 0) station -= set.normals.transpose() * lambda;
  k.stationarity = station.cwiseAbs().maxCoeff() / (1.0 + hd.cwiseAbs().maxCoeff());

  const double ball_gap = x.norm() - set.radius;
  k.primal = std::max(0.0, ball_gap);
  k.complementarity = nu * std::abs(ball_gap) + std::max(0.0, -nu);
  if (set.constraints() > 0) {
    const Vector s = set.normals * x - set.offsets;
    k.primal = std::max(k.primal, std::max(0.0, -s.minCoeff()));
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      k.complementarity = std::max(k.complementarity, std::abs(lambda(i) * s(i)));
      k.complementarity = std::max(k.complementarity, -lambda(i));
    }
  }
  return k;
}

Projection project_h_norm(const Vector& y, const Matrix& H, const FeasibleSet& set) {
  const Eigen::Index n = y.size();
  if (H.rows() != n || H.cols() != n || set.normals.cols() != n ||
      set.normals.rows() != set.offsets.size()) {
    throw DimensionError("project_h_norm: inconsistent dimensions");
  }
  if (!(set.radius > 0.0)) throw InfeasibleError("project_h_norm: radius must be positive");

  const auto finish = [&](Vector x, double nu, Vector lambda) {
    Projection p{std::move(x), nu, std::move(lambda), {}};
    p.kkt = kkt_residuals(y, H, set, p.point, p.ball_multiplier, p.halfspace_multipliers);
    return p;
  };

  if (set.contains(y)) return finish(y, 0.0, Vector::Zero(set.offsets.size()));

  const Vector hy = H * y;
  const Matrix eye = Matrix::Identity(n, n);
  const auto solve_at = [&](double nu) {
    return solve_halfspace_qp(H + nu * eye, hy, set.normals, set.offsets);
  };
  const double R = set.radius;

  HalfspaceQpSolution free = solve_at(0.0);
  if (free.x.norm() <= R) return finish(free.x, 0.0, free.lambda);

  // The penalized minimizer's norm is nonincreasing in nu; bracket the root.
  double lo = 0.0;
  double f_lo = free.x.norm() - R;
  double hi = std::max(1.0, H.cwiseAbs().maxCoeff());
  HalfspaceQpSolution hi_sol = solve_at(hi);
  double f_hi = hi_sol.x.norm() - R;
  while (f_hi > 0.0) {
    if (hi > 1e18) {
      const double min_norm =
          solve_halfspace_qp(eye, Vector::Zero(n), set.normals, set.offsets).x.norm();
      if (min_norm > R * (1.0 + 1e-12)) {
        throw InfeasibleError("project_h_norm: ball and half-spaces do not intersect");
      }
      return finish(hi_sol.x, hi, hi_sol.lambda);
    }
    lo = hi;
    f_lo = f_hi;
    hi *= 4.0;
    hi_sol = solve_at(hi);
    f_hi = hi_sol.x.norm() - R;
  }

  // Illinois regula falsi, keeping the feasible (f <= 0) end as the answer.
  int side = 0;
  double hi_gap = f_hi;
  for (int it = 0; it < kRootIterations; ++it) {
    if (-hi_gap <= 1e-14 * R || hi - lo <= 1e-15 * hi) break;
    double nu = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(nu > lo && nu < hi)) nu = 0.5 * (lo + hi);
    HalfspaceQpSolution sol = solve_at(nu);
    const double f = sol.x.norm() - R;
    if (f > 0.0) {
      lo = nu;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = nu;
      f_hi = f;
      hi_gap = f;
      hi_sol = std::move(sol);
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  return finish(hi_sol.x, hi, hi_sol.lambda);
}

}  // namespace cmnl
