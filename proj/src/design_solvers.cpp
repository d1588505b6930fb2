#include "semibai/design_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semibai {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t argmax_lowest(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

Policy finalize_policy(Vector w, double floor) {
  w = w.cwiseMax(0.0);
  if (floor > 0.0) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w(i) < floor) w(i) = 0.0;
    }
  }
  return Policy(w / w.sum());
}

// Source vectors with nonzero norm, expressed in an orthonormal basis of their span.
struct ReducedSource {
  Matrix basis;               // d x r
  Matrix coords;              // K x r (zero rows for ignored arms)
  std::vector<bool> usable;   // nonzero vectors
  std::size_t usable_count = 0;

  explicit ReducedSource(const FeatureSet& vectors) {
    basis = span_basis(vectors.rows());
    coords = vectors.rows() * basis;
    usable.resize(vectors.count());
    for (std::size_t i = 0; i < vectors.count(); ++i) {
      usable[i] = vectors.rows().row(static_cast<Eigen::Index>(i)).squaredNorm() > 0.0 &&
                  coords.row(static_cast<Eigen::Index>(i)).squaredNorm() > 0.0;
      if (usable[i]) ++usable_count;
    }
  }

  Eigen::Index rank() const { return basis.cols(); }

  Vector uniform_weights() const {
    Vector w = Vector::Zero(coords.rows());
    for (std::size_t i = 0; i < usable.size(); ++i) {
      if (usable[i]) w(static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(usable_count);
    }
    return w;
  }

  Matrix design(const Vector& p) const { return coords.transpose() * p.asDiagonal() * coords; }
};

// Log-barrier interior-point solver for
//   min t  s.t.  w_j y_j^T A(q)^-1 y_j <= t,  q >= 0,  sum q = 1,
// with A(q) = V^T diag(q) V in reduced coordinates (A is positive definite on the interior).
class XyBarrier {
 public:
  struct Result {
    Vector weights;
    double lower_bound = 0.0;
    int newton_steps = 0;
  };

  XyBarrier(const Matrix& v, const Matrix& y, const Vector& w, double ridge)
      : v_(v), y_(y), w_(w), ridge_(ridge) {}

  Result solve(const SolverConfig& cfg) {
    const Eigen::Index n = v_.rows();
    const Eigen::Index m = y_.cols();
    Vector q = Vector::Constant(n, 1.0 / static_cast<double>(n));
    State st = evaluate(q);
    double t = 1.05 * st.phi.maxCoeff() + 1e-12;
    const auto constraints = static_cast<double>(m + n);
    double sigma = constraints / std::max(st.phi.maxCoeff(), 1e-300);

    Result res;
    res.weights = q;
    int steps = 0;
    while (steps < cfg.max_iters) {
      // Centering by damped Newton on F = sigma t - sum log(t - phi_j) - sum log q_i.
      for (int inner = 0; inner < 100 && steps < cfg.max_iters; ++inner, ++steps) {
        const Vector s = (t - st.phi.array()).matrix();
        const Vector inv_s = s.cwiseInverse();
        const Matrix bsq = st.b.cwiseAbs2();                              // m x n
        const Matrix grad_phi = -(w_.asDiagonal() * bsq);                  // m x n
        Vector grad(n + 1);
        grad.head(n) = grad_phi.transpose() * inv_s - q.cwiseInverse();
        grad(n) = sigma - inv_s.sum();

        const Vector inv_s2 = inv_s.cwiseAbs2();
        Matrix hess = Matrix::Zero(n + 2, n + 2);
        const Matrix curv = st.b.transpose() * (w_.cwiseProduct(inv_s)).asDiagonal() * st.b;
        hess.topLeftCorner(n, n) = 2.0 * curv.cwiseProduct(st.q_mat) +
                                   grad_phi.transpose() * inv_s2.asDiagonal() * grad_phi;
        hess.topLeftCorner(n, n).diagonal() += q.cwiseInverse().cwiseAbs2();
        const Vector cross = -(grad_phi.transpose() * inv_s2);
        hess.block(0, n, n, 1) = cross;
        hess.block(n, 0, 1, n) = cross.transpose();
        hess(n, n) = inv_s2.sum();
        hess.block(0, n + 1, n, 1).setOnes();
        hess.block(n + 1, 0, 1, n).setOnes();

        Vector rhs = Vector::Zero(n + 2);
        rhs.head(n + 1) = -grad;
        const Vector sol = hess.partialPivLu().solve(rhs);
        const Vector dq = sol.head(n);
        const double dt = sol(n);
        const double decrement = -(grad.head(n).dot(dq) + grad(n) * dt);
        if (!(decrement > 1e-10)) break;

        const double f0 = barrier_value(sigma, t, q, st);
        double alpha = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (dq(i) < 0.0) alpha = std::min(alpha, -0.99 * q(i) / dq(i));
        }
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
          const Vector q_new = q + alpha * dq;
          const double t_new = t + alpha * dt;
          State trial = evaluate(q_new);
          if (!trial.ok || !((t_new - trial.phi.array()) > 0.0).all()) continue;
          if (barrier_value(sigma, t_new, q_new, trial) <= f0 - 0.25 * alpha * decrement) {
            q = q_new;
            t = t_new;
            st = std::move(trial);
            accepted = true;
            break;
          }
        }
        if (!accepted) break;
      }

      const Vector s = (t - st.phi.array()).matrix();
      Vector lambda = s.cwiseInverse();
      lambda /= lambda.sum();
      const double lb = lower_bound(st, lambda);
      if (lb > res.lower_bound || res.newton_steps == 0) {
        res.lower_bound = std::max(res.lower_bound, lb);
      }
      res.weights = q;
      res.newton_steps = steps;
      const double upper = st.phi.maxCoeff();
      if (upper - res.lower_bound <= 0.5 * cfg.target_gap * upper) break;
      sigma *= 8.0;
    }
    res.newton_steps = steps;
    return res;
  }

 private:
  struct State {
    bool ok = false;
    Vector phi;     // m
    Matrix z;       // r x m, A^-1 y
    Matrix b;       // m x n, y_j^T A^-1 v_i
    Matrix q_mat;   // n x n, V A^-1 V^T
  };

  State evaluate(const Vector& q) const {
    State st;
    if ((q.array() <= 0.0).any()) return st;
    Matrix a = v_.transpose() * q.asDiagonal() * v_;
    a.diagonal().array() += ridge_;
    const Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) return st;
    st.z = llt.solve(y_);
    st.phi = w_.cwiseProduct(y_.cwiseProduct(st.z).colwise().sum().transpose());
    st.b = st.z.transpose() * v_.transpose();
    const Matrix half = llt.matrixL().solve(v_.transpose());
    st.q_mat = half.transpose() * half;
    st.ok = st.phi.allFinite();
    return st;
  }

  double barrier_value(double sigma, double t, const Vector& q, const State& st) const {
    return sigma * t - (t - st.phi.array()).log().sum() - q.array().log().sum();
  }

  // For fixed lambda, g(q) = sum_j lambda_j phi_j(q) is convex with <grad g, q> = -g, so
  // min_q g >= 2 g(q) - max_i h_i where h_i = -dg/dq_i. Weak duality makes this a lower
  // bound on the minimax value. The ridge shifts <grad g, q> by ridge * sum lw_j |z_j|^2.
  double lower_bound(const State& st, const Vector& lambda) const {
    const Vector lw = lambda.cwiseProduct(w_);
    const Vector h = st.b.cwiseAbs2().transpose() * lw;
    const double ridge_term = ridge_ * st.z.cwiseAbs2().colwise().sum().dot(lw.transpose());
    return 2.0 * lambda.dot(st.phi) - ridge_term - h.maxCoeff();
  }

  const Matrix& v_;
  const Matrix& y_;
  const Vector& w_;
  double ridge_;
};

std::vector<double> resolve_weights(const std::vector<double>& weights, std::size_t m) {
  if (weights.empty()) return std::vector<double>(m, 1.0);
  if (weights.size() != m) throw ContractError("contrast weight count mismatch");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ContractError("contrast weights must be positive");
  }
  return weights;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters < 1) throw ContractError("max_iters must be >= 1");
  if (!(target_gap > 0.0)) throw ContractError("target_gap must be > 0");
  if (ridge < 0.0) throw ContractError("ridge must be >= 0");
  if (min_weight_floor < 0.0) throw ContractError("min_weight_floor must be >= 0");
}

std::vector<Vector> pairwise_contrasts(const FeatureSet& active) {
  if (active.count() > kMaxActiveForContrasts) {
    throw ContractError("active set of size " + std::to_string(active.count()) +
                        " exceeds the pairwise contrast cap of " +
                        std::to_string(kMaxActiveForContrasts));
  }
  std::vector<Vector> out;
  out.reserve(active.count() * (active.count() - 1) / 2);
  for (std::size_t u = 0; u < active.count(); ++u) {
    for (std::size_t v = u + 1; v < active.count(); ++v) {
      Vector diff = active.vector(u) - active.vector(v);
      if (diff.squaredNorm() > 0.0) out.push_back(std::move(diff));
    }
  }
  return out;
}

double xy_linear_objective(const FeatureSet& source_vectors, const std::vector<Vector>& contrasts,
                           const Policy& p, const std::vector<double>& weights) {
  const auto w = resolve_weights(weights, contrasts.size());
  const PsdMatrix a(source_vectors.rows().transpose() * p.weights().asDiagonal() *
                    source_vectors.rows());
  const GeneralizedInverseNorm norm(a);
  double best = 0.0;
  for (std::size_t j = 0; j < contrasts.size(); ++j) {
    const NormValue nv = norm(contrasts[j]);
    if (nv.is_infinite()) return kInf;
    best = std::max(best, w[j] * nv.value);
  }
  return best;
}

DesignSolution solve_xy_linear(const FeatureSet& source_vectors,
                               const std::vector<Vector>& contrasts, const SolverConfig& cfg,
                               const std::vector<double>& weights) {
  cfg.validate();
  if (contrasts.empty()) throw ContractError("solve_xy_linear needs at least one contrast");
  const auto w_all = resolve_weights(weights, contrasts.size());
  const ReducedSource src(source_vectors);

  DesignSolution sol;
  // Identifiability: every contrast must lie in span(source).
  std::vector<Eigen::Index> live;
  for (std::size_t j = 0; j < contrasts.size(); ++j) {
    if (static_cast<std::size_t>(contrasts[j].size()) != source_vectors.dim()) {
      throw ContractError("contrast dimension mismatch");
    }
    if (contrasts[j].squaredNorm() == 0.0) continue;
    if (src.rank() == 0 || !in_span(src.basis, contrasts[j])) {
      sol.policy = src.usable_count > 0 ? Policy(src.uniform_weights())
                                        : Policy::uniform(source_vectors.count());
      sol.objective = kInf;
      sol.duality_gap = kInf;
      sol.converged = false;
      return sol;
    }
    live.push_back(static_cast<Eigen::Index>(j));
  }
  if (live.empty()) {
    sol.policy = src.usable_count > 0 ? Policy(src.uniform_weights())
                                      : Policy::uniform(source_vectors.count());
    sol.objective = 0.0;
    sol.converged = true;
    return sol;
  }

  const Eigen::Index r = src.rank();
  const auto m = static_cast<Eigen::Index>(live.size());
  Matrix y(r, m);
  Vector wy(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto src_j = static_cast<std::size_t>(live[static_cast<std::size_t>(j)]);
    y.col(j) = src.basis.transpose() * contrasts[src_j];
    wy(j) = w_all[src_j];
  }
  std::vector<Eigen::Index> arms;
  for (std::size_t i = 0; i < src.usable.size(); ++i) {
    if (src.usable[i]) arms.push_back(static_cast<Eigen::Index>(i));
  }
  const auto n = static_cast<Eigen::Index>(arms.size());
  Matrix v(n, r);
  for (Eigen::Index i = 0; i < n; ++i) v.row(i) = src.coords.row(arms[static_cast<std::size_t>(i)]);

  const double ridge = cfg.ridge * v.squaredNorm() / static_cast<double>(n * r);
  XyBarrier barrier(v, y, wy, ridge);
  const XyBarrier::Result res = barrier.solve(cfg);

  Vector full = Vector::Zero(static_cast<Eigen::Index>(source_vectors.count()));
  for (Eigen::Index i = 0; i < n; ++i) full(arms[static_cast<std::size_t>(i)]) = res.weights(i);
  sol.policy = finalize_policy(full, cfg.min_weight_floor);
  sol.iterations = res.newton_steps;
  sol.objective = xy_linear_objective(source_vectors, contrasts, sol.policy, weights);
  if (!std::isfinite(sol.objective)) {
    sol.duality_gap = kInf;
    sol.converged = false;
    return sol;
  }
  sol.duality_gap = sol.objective > 0.0
                        ? std::max(0.0, (sol.objective - res.lower_bound) / sol.objective)
                        : 0.0;
  sol.converged = sol.duality_gap <= cfg.target_gap;
  sol.certificates["lower_bound"] = res.lower_bound;
  return sol;
}

double g_linear_objective(const FeatureSet& vectors, const Policy& p) {
  const PsdMatrix a(vectors.rows().transpose() * p.weights().asDiagonal() * vectors.rows());
  const GeneralizedInverseNorm norm(a);
  double best = 0.0;
  for (std::size_t i = 0; i < vectors.count(); ++i) {
    const Vector x = vectors.vector(i);
    if (x.squaredNorm() == 0.0) continue;
    const NormValue nv = norm(x);
    if (nv.is_infinite()) return kInf;
    best = std::max(best, nv.value);
  }
  return best;
}

DesignSolution solve_g_optimal_linear(const FeatureSet& vectors, const SolverConfig& cfg) {
  cfg.validate();
  const ReducedSource src(vectors);
  if (src.usable_count == 0 || src.rank() == 0) {
    throw ContractError("G-optimal design needs at least one nonzero vector");
  }
  const auto r = static_cast<double>(src.rank());
  const Matrix& v = src.coords;
  const Eigen::Index k = v.rows();

  // Fedorov-Wynn iterations on log det; the max leverage certifies the G value.
  Vector p = src.uniform_weights();
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Eigen::LLT<Matrix> llt(src.design(p));
    const Vector lev = llt.matrixL().solve(v.transpose()).colwise().squaredNorm().transpose();
    Vector lev_usable = lev;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!src.usable[static_cast<std::size_t>(i)]) lev_usable(i) = -kInf;
    }
    const std::size_t top = argmax_lowest(lev_usable);
    const double lmax = lev(static_cast<Eigen::Index>(top));
    const double toward_gain = lmax / r - 1.0;
    if (toward_gain <= cfg.target_gap) break;

    if (cfg.away_steps) {
      std::size_t low = static_cast<std::size_t>(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        if (p(i) > 0.0 && (low == static_cast<std::size_t>(k) ||
                           lev(i) < lev(static_cast<Eigen::Index>(low)))) {
          low = static_cast<std::size_t>(i);
        }
      }
      const double pl = p(static_cast<Eigen::Index>(low));
      const double lmin = lev(static_cast<Eigen::Index>(low));
      if (low != static_cast<std::size_t>(k) && pl < 1.0 && 1.0 - lmin / r > toward_gain) {
        const double drop = -pl / (1.0 - pl);
        const double gamma = lmin > 1.0 ? std::max((lmin - r) / (r * (lmin - 1.0)), drop) : drop;
        p *= (1.0 - gamma);
        p(static_cast<Eigen::Index>(low)) += gamma;
        p = p.cwiseMax(0.0);
        p /= p.sum();
        continue;
      }
    }
    const double gamma = (lmax - r) / (r * (lmax - 1.0));
    p *= (1.0 - gamma);
    p(static_cast<Eigen::Index>(top)) += gamma;
    p /= p.sum();
  }

  DesignSolution sol;
  sol.policy = finalize_policy(p, cfg.min_weight_floor);
  sol.iterations = it;
  sol.objective = g_linear_objective(vectors, sol.policy);
  sol.duality_gap = std::isfinite(sol.objective) ? std::max(0.0, sol.objective / r - 1.0) : kInf;
  sol.converged = sol.duality_gap <= cfg.target_gap;
  sol.certificates["rank"] = r;
  return sol;
}

DesignSolution g_opt_semiparametric(const FeatureSet& source, std::size_t anchor,
                                    const SolverConfig& cfg) {
  if (source.count() < 2) throw ContractError("g_opt_semiparametric needs K >= 2");
  if (anchor >= source.count()) throw ContractError("anchor index out of range");
  const FeatureSet shifted = source.shifted(source.vector(anchor));
  DesignSolution lin = solve_g_optimal_linear(shifted, cfg);

  Vector q = lin.policy.weights();
  q(static_cast<Eigen::Index>(anchor)) = 0.0;
  q /= q.sum();
  Vector w = 0.5 * q;
  w(static_cast<Eigen::Index>(anchor)) += 0.5;

  DesignSolution sol;
  sol.policy = Policy(w);
  sol.iterations = lin.iterations;
  sol.duality_gap = lin.duality_gap;

  const PsdMatrix cov = sigma_cov(source, sol.policy);
  const GeneralizedInverseNorm norm(cov);
  const Vector mean = policy_mean(source, sol.policy);
  double m_hat = 0.0;
  double g_hat = 0.0;
  for (std::size_t i = 0; i < source.count(); ++i) {
    const Vector centered = source.vector(i) - mean;
    const NormValue c = norm(centered);
    m_hat = c.is_infinite() ? kInf : std::max(m_hat, c.value);
    const Vector x = source.vector(i);
    if (x.squaredNorm() > 0.0) {
      const NormValue g = norm(x);
      g_hat = g.is_infinite() ? kInf : std::max(g_hat, g.value);
    }
  }
  const double bound = 32.0 * static_cast<double>(source.dim());
  sol.objective = m_hat;
  sol.certificates["M_hat"] = m_hat;
  sol.certificates["M_bound"] = bound;
  sol.certificates["G_hat"] = g_hat;
  sol.certificates["linear_objective"] = lin.objective;
  sol.converged = lin.converged && m_hat <= bound;
  return sol;
}

DesignSolution xor_design(const FeatureSet& active, const FeatureSet& source, std::size_t anchor,
                          const SolverConfig& cfg) {
  if (active.count() < 2) throw ContractError("xor_design needs at least two active vectors");
  if (anchor >= source.count()) throw ContractError("anchor index out of range");
  if (active.dim() != source.dim()) throw ContractError("active/source dimension mismatch");
  const auto contrasts = pairwise_contrasts(active);
  if (contrasts.empty()) throw ContractError("active set has no distinct pair");

  const FeatureSet shifted = source.shifted(source.vector(anchor));
  const DesignSolution lin = solve_xy_linear(shifted, contrasts, cfg);

  DesignSolution sol;
  sol.iterations = lin.iterations;
  sol.duality_gap = lin.duality_gap;
  sol.certificates["linear_objective"] = lin.objective;
  sol.certificates["linear_gap"] = lin.duality_gap;
  if (!std::isfinite(lin.objective)) {
    sol.policy = Policy::point_mass(source.count(), anchor);
    sol.objective = kInf;
    sol.converged = false;
    return sol;
  }
  Vector q = lin.policy.weights();
  q(static_cast<Eigen::Index>(anchor)) = 0.0;
  q /= q.sum();
  Vector w = 0.5 * q;
  w(static_cast<Eigen::Index>(anchor)) += 0.5;
  sol.policy = Policy(w);
  const NormValue v = v_cov_eval(active, source, sol.policy);
  sol.objective = v.is_infinite() ? kInf : v.value;
  sol.converged = lin.converged && !v.is_infinite();
  return sol;
}

Policy mixture_policy(const Policy& a, const Policy& b) {
  if (a.size() != b.size()) throw ContractError("mixture of policies with different lengths");
  return Policy(0.5 * (a.weights() + b.weights()));
}

}  // namespace semibai
