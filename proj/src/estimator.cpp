#include "semibai/estimator.hpp"

#include <stdexcept>

namespace semibai {

RegressionState init_state(const FeatureSet& source, const Policy& p, double beta) {
  return init_state_centered(source, policy_mean(source, p), beta);
}

RegressionState init_state_centered(const FeatureSet& source, const Vector& center, double beta) {
  if (!(beta >= 0.0)) throw ContractError("ridge parameter must be >= 0");
  if (static_cast<std::size_t>(center.size()) != source.dim()) {
    throw ContractError("center dimension mismatch");
  }
  RegressionState st;
  st.source = source;
  st.center = center;
  const auto d = static_cast<Eigen::Index>(source.dim());
  st.B = Matrix::Zero(d, d);
  st.b = Vector::Zero(d);
  st.beta = beta;
  return st;
}

void update(RegressionState& state, std::size_t arm, double reward) {
  if (arm >= state.source.count()) {
    throw ContractError("arm index " + std::to_string(arm) + " out of range");
  }
  const Vector x = state.source.row(arm).transpose() - state.center;
  state.B.noalias() += x * x.transpose();
  state.b.noalias() += reward * x;
  ++state.n;
}

void update_counts(RegressionState& state, std::size_t arm, std::uint64_t count,
                   double reward_sum) {
  if (arm >= state.source.count()) {
    throw ContractError("arm index " + std::to_string(arm) + " out of range");
  }
  if (count == 0) return;
  const Vector x = state.source.row(arm).transpose() - state.center;
  state.B.noalias() += static_cast<double>(count) * (x * x.transpose());
  state.b.noalias() += reward_sum * x;
  state.n += count;
}

Estimate fit(const RegressionState& state) {
  Matrix a = state.B;
  a.diagonal().array() += state.beta;
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("regression system is singular; use beta > 0");
  }
  // LLT succeeds on PSD-but-singular inputs with zero pivots; catch that explicitly.
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
    throw std::runtime_error("regression system is singular; use beta > 0");
  }
  Estimate est{llt.solve(state.b)};
  if (!est.theta_hat.allFinite()) throw std::runtime_error("non-finite regression estimate");
  return est;
}

RegressionState merge(const RegressionState& a, const RegressionState& b) {
  if (!(a.source == b.source) || a.center != b.center || a.beta != b.beta) {
    throw ContractError("merged regression states must share source, center and beta");
  }
  RegressionState out = a;
  out.B += b.B;
  out.b += b.b;
  out.n += b.n;
  return out;
}

}  // namespace semibai
