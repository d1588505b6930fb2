#include "semibai/design_core.hpp"

#include <algorithm>
#include <cmath>

namespace semibai {

namespace {

void require_same_count(const FeatureSet& features, const Policy& p) {
  if (features.count() != p.size()) {
    throw ContractError("policy length " + std::to_string(p.size()) +
                        " does not match feature count " + std::to_string(features.count()));
  }
}

}  // namespace

FeatureSet::FeatureSet(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.cols() == 0) {
    throw ContractError("feature set needs at least one vector of positive dimension");
  }
  if (!rows_.allFinite()) throw ContractError("feature set contains non-finite entries");
}

FeatureSet::FeatureSet(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw ContractError("feature set needs at least one vector of positive dimension");
  }
  const auto d = rows.front().size();
  rows_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw ContractError("feature vector " + std::to_string(i) + " has dimension " +
                          std::to_string(rows[i].size()) + ", expected " + std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      rows_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (!rows_.allFinite()) throw ContractError("feature set contains non-finite entries");
}

Vector FeatureSet::vector(std::size_t i) const {
  if (i >= count()) throw ContractError("feature index " + std::to_string(i) + " out of range");
  return rows_.row(static_cast<Eigen::Index>(i)).transpose();
}

FeatureSet FeatureSet::shifted(const Vector& anchor_vector) const {
  if (static_cast<std::size_t>(anchor_vector.size()) != dim()) {
    throw ContractError("shift vector dimension mismatch");
  }
  Matrix out = rows_;
  out.rowwise() -= anchor_vector.transpose();
  return FeatureSet(std::move(out));
}

FeatureSet FeatureSet::subset(const std::vector<std::size_t>& indices) const {
  Matrix out(static_cast<Eigen::Index>(indices.size()), rows_.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= count()) throw ContractError("subset index out of range");
    out.row(static_cast<Eigen::Index>(k)) = rows_.row(static_cast<Eigen::Index>(indices[k]));
  }
  return FeatureSet(std::move(out));
}

void FeatureSet::check_unit_ball() const {
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    const double n = rows_.row(i).norm();
    if (n > 1.0 + 1e-9) {
      throw ContractError("feature vector " + std::to_string(i) + " has norm " +
                          std::to_string(n) + " > 1");
    }
  }
}

bool FeatureSet::operator==(const FeatureSet& other) const {
  return rows_.rows() == other.rows_.rows() && rows_.cols() == other.rows_.cols() &&
         rows_ == other.rows_;
}

Policy::Policy(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw ContractError("policy must have at least one weight");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_(i) >= 0.0)) {
      throw ContractError("policy weight " + std::to_string(i) + " is negative or NaN");
    }
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-9) {
    throw ContractError("policy weights sum to " + std::to_string(weights_.sum()) + ", not 1");
  }
}

Policy Policy::uniform(std::size_t k) {
  if (k == 0) throw ContractError("uniform policy over zero arms");
  return Policy(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
}

Policy Policy::point_mass(std::size_t k, std::size_t index) {
  if (index >= k) throw ContractError("point mass index out of range");
  Vector w = Vector::Zero(static_cast<Eigen::Index>(k));
  w(static_cast<Eigen::Index>(index)) = 1.0;
  return Policy(std::move(w));
}

PsdMatrix::PsdMatrix(Matrix entries, double rank_tol)
    : entries_(std::move(entries)), rank_tol_(rank_tol) {
  if (entries_.rows() != entries_.cols()) throw ContractError("PSD matrix must be square");
  const double scale = std::max(entries_.cwiseAbs().maxCoeff(), 1e-300);
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ContractError("PSD matrix is not symmetric");
  }
  entries_ = 0.5 * (entries_ + entries_.transpose());
}

Vector PsdMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double PsdMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

std::size_t PsdMatrix::rank() const {
  const Vector ev = eigenvalues();
  const double top = ev.maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<std::size_t>((ev.array() > rank_tol_ * top).count());
}

GeneralizedInverseNorm::GeneralizedInverseNorm(const PsdMatrix& a, double tol_space)
    : tol_space_(tol_space) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.entries());
  const Vector& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  if (top > 0.0) {
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (ev(k) > a.rank_tol() * top) keep.push_back(k);
    }
  }
  basis_.resize(a.entries().rows(), static_cast<Eigen::Index>(keep.size()));
  inv_values_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    basis_.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
    inv_values_(static_cast<Eigen::Index>(c)) = 1.0 / ev(keep[c]);
  }
}

NormValue GeneralizedInverseNorm::operator()(const Vector& y) const {
  if (y.size() != basis_.rows()) throw ContractError("vector dimension mismatch in inverse norm");
  const Vector coeffs = basis_.transpose() * y;
  const double residual = (y - basis_ * coeffs).norm();
  if (residual > tol_space_ * y.norm()) return NormValue::infinite(residual);
  return {coeffs.cwiseAbs2().dot(inv_values_), true, residual};
}

Vector policy_mean(const FeatureSet& features, const Policy& p) {
  require_same_count(features, p);
  return features.rows().transpose() * p.weights();
}

PsdMatrix sigma_cov(const FeatureSet& features, const Policy& p) {
  const Vector mean = policy_mean(features, p);
  Matrix centered = features.rows();
  centered.rowwise() -= mean.transpose();
  Matrix cov = centered.transpose() * p.weights().asDiagonal() * centered;
  return PsdMatrix(std::move(cov));
}

PsdMatrix sigma_shifted(const FeatureSet& features, const Policy& p, std::size_t anchor) {
  require_same_count(features, p);
  if (anchor >= features.count()) {
    throw ContractError("anchor index " + std::to_string(anchor) + " out of range");
  }
  Matrix shifted = features.rows();
  shifted.rowwise() -= features.rows().row(static_cast<Eigen::Index>(anchor));
  Matrix second = shifted.transpose() * p.weights().asDiagonal() * shifted;
  return PsdMatrix(std::move(second));
}

NormValue inv_norm_sq(const PsdMatrix& a, const Vector& y, double tol_space) {
  return GeneralizedInverseNorm(a, tol_space)(y);
}

NormValue v_cov_eval(const FeatureSet& active, const FeatureSet& source, const Policy& p) {
  if (active.count() < 2) throw ContractError("v_cov_eval needs at least two active vectors");
  if (active.dim() != source.dim()) throw ContractError("active/source dimension mismatch");
  const GeneralizedInverseNorm norm(sigma_cov(source, p));
  NormValue best{0.0, true, 0.0};
  for (std::size_t u = 0; u < active.count(); ++u) {
    for (std::size_t v = u + 1; v < active.count(); ++v) {
      const Vector diff = active.vector(u) - active.vector(v);
      if (diff.squaredNorm() == 0.0) continue;
      const NormValue nv = norm(diff);
      if (nv.is_infinite()) {
        if (best.in_column_space || nv.residual > best.residual) best = nv;
      } else if (best.in_column_space && nv.value > best.value) {
        best = nv;
      }
    }
  }
  return best;
}

Matrix span_basis(const Matrix& vectors, double rank_tol) {
  const Matrix gram = vectors.transpose() * vectors;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  if (top > 0.0) {
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (ev(k) > rank_tol * top) keep.push_back(k);
    }
  }
  Matrix basis(vectors.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    basis.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
  }
  return basis;
}

Matrix difference_span_basis(const FeatureSet& features) {
  Matrix diffs = features.rows();
  diffs.rowwise() -= features.rows().row(0);
  return span_basis(diffs);
}

bool in_span(const Matrix& basis, const Vector& y, double tol_space) {
  const Vector resid = y - basis * (basis.transpose() * y);
  return resid.norm() <= tol_space * y.norm();
}

}  // namespace semibai
