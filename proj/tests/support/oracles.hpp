#pragma once
// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the library's solvers or its eigen-based inverse norm.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// y^T A^+ y via SVD; +inf when y leaves the column space (relative tolerance `tol`).
inline double pinv_norm_sq(const Matrix& a, const Vector& y, double tol = 1e-7) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  double value = 0.0;
  Vector resid = y;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) <= 1e-10 * top || top == 0.0) continue;
    const double c = svd.matrixU().col(k).dot(y);
    value += c * c / s(k);
    resid -= c * svd.matrixU().col(k);
  }
  if (resid.norm() > tol * y.norm()) return kInf;
  return value;
}

/// Rows of `x` weighted by p: sum p_i x_i x_i^T.
inline Matrix design(const Matrix& x, const Vector& p) {
  Matrix a = Matrix::Zero(x.cols(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) a += p(i) * x.row(i).transpose() * x.row(i);
  return a;
}

inline Matrix centered_cov(const Matrix& x, const Vector& p) {
  Vector mean = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) mean += p(i) * x.row(i).transpose();
  Matrix a = Matrix::Zero(x.cols(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector c = x.row(i).transpose() - mean;
    a += p(i) * c * c.transpose();
  }
  return a;
}

/// max_j w_j y_j^T A(p)^+ y_j for raw source rows.
inline double xy_value(const Matrix& x, const std::vector<Vector>& ys, const Vector& p,
                       const std::vector<double>& w = {}) {
  const Matrix a = design(x, p);
  double best = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const double v = pinv_norm_sq(a, ys[j]);
    if (!std::isfinite(v)) return kInf;
    best = std::max(best, (w.empty() ? 1.0 : w[j]) * v);
  }
  return best;
}

/// Minimum of f over the simplex grid {p : p_i = k_i / res, sum k_i = res}.
inline double simplex_grid_min(std::size_t k, int res, const std::function<double(const Vector&)>& f,
                               Vector* argmin = nullptr) {
  double best = kInf;
  std::vector<int> counts(k, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == k) {
      counts[i] = left;
      Vector p(static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < k; ++j) p(static_cast<Eigen::Index>(j)) = double(counts[j]) / res;
      const double v = f(p);
      if (v < best) {
        best = v;
        if (argmin) *argmin = p;
      }
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, res);
  return best;
}

/// Random unit vectors in R^d (rows).
inline Matrix unit_rows(std::size_t k, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    x.row(i).normalize();
  }
  return x;
}

/// Battery instance: source rows, and an active set drawn from the source's affine hull.
struct BatteryInstance {
  Matrix source;
  Matrix active;
  Vector theta;
};

inline BatteryInstance battery_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t d = 2 + rng() % 7;       // 2..8
  const std::size_t k = 3 + rng() % 18;      // 3..20
  const std::size_t a = 2 + rng() % 9;       // 2..10
  BatteryInstance inst;
  inst.source = unit_rows(k, d, rng);
  inst.active.resize(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d));
  std::exponential_distribution<double> ex(1.0);
  std::vector<bool> used(k, false);
  for (Eigen::Index r = 0; r < inst.active.rows(); ++r) {
    const std::size_t pick = rng() % k;
    if (r > 0 && rng() % 2 == 0 && !used[pick]) {
      used[pick] = true;
      inst.active.row(r) = inst.source.row(static_cast<Eigen::Index>(pick));
    } else {
      Vector c(static_cast<Eigen::Index>(k));
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = ex(rng);
      c /= c.sum();
      inst.active.row(r) = c.transpose() * inst.source;
    }
  }
  std::normal_distribution<double> g;
  inst.theta.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < inst.theta.size(); ++j) inst.theta(j) = g(rng);
  return inst;
}

/// Closed-form phase length (natural log, arguments clamped at e).
inline double phase_length_formula(double v, double eps, double dl, double d, double r1, double r2) {
  const double e = std::exp(1.0);
  return std::ceil(r1 * v / (eps * eps) * std::log(std::max(e, v / (eps * dl))) +
                   r2 * 32.0 * d * std::sqrt(v) / eps * std::log(std::max(e, d / dl)));
}

}  // namespace oracle
