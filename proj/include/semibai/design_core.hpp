#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace semibai {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an operation's preconditions are violated by the caller.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Ordered set of d-dimensional feature vectors (a source set or a target set).
/// Vectors are stored as the rows of a count x dim matrix.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(Matrix rows);
  explicit FeatureSet(const std::vector<std::vector<double>>& rows);

  std::size_t count() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }

  Vector vector(std::size_t i) const;
  auto row(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)); }
  const Matrix& rows() const noexcept { return rows_; }

  /// Copy with every vector translated by -anchor_vector.
  FeatureSet shifted(const Vector& anchor_vector) const;
  FeatureSet subset(const std::vector<std::size_t>& indices) const;

  /// Throws ContractError if some vector has Euclidean norm above 1 + 1e-9.
  void check_unit_ball() const;

  bool operator==(const FeatureSet& other) const;

 private:
  Matrix rows_;
};

/// Probability vector over source arms.
class Policy {
 public:
  Policy() = default;
  explicit Policy(Vector weights);

  static Policy uniform(std::size_t k);
  static Policy point_mass(std::size_t k, std::size_t index);

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }
  const Vector& weights() const noexcept { return weights_; }

 private:
  Vector weights_;
};

/// Symmetric positive-semidefinite matrix with a relative eigenvalue cutoff
/// used for rank decisions.
class PsdMatrix {
 public:
  static constexpr double kDefaultRankTol = 1e-10;

  explicit PsdMatrix(Matrix entries, double rank_tol = kDefaultRankTol);

  const Matrix& entries() const noexcept { return entries_; }
  double rank_tol() const noexcept { return rank_tol_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

  Vector eigenvalues() const;
  double min_eigenvalue() const;
  std::size_t rank() const;

 private:
  Matrix entries_;
  double rank_tol_;
};

/// Squared generalized inverse norm. `value` is meaningful only when
/// `in_column_space` is true; otherwise the norm is +infinity by convention.
struct NormValue {
  double value = 0.0;
  bool in_column_space = true;
  double residual = 0.0;

  bool is_infinite() const noexcept { return !in_column_space; }
  static NormValue infinite(double residual) {
    return {std::numeric_limits<double>::infinity(), false, residual};
  }
};

/// Evaluates ||y||^2_{A^-1} for many y against one eigendecomposition of A.
class GeneralizedInverseNorm {
 public:
  static constexpr double kDefaultSpaceTol = 1e-7;

  explicit GeneralizedInverseNorm(const PsdMatrix& a, double tol_space = kDefaultSpaceTol);

  NormValue operator()(const Vector& y) const;
  std::size_t rank() const noexcept { return static_cast<std::size_t>(basis_.cols()); }

 private:
  Matrix basis_;        // retained eigenvectors
  Vector inv_values_;   // 1/lambda for retained eigenvalues
  double tol_space_;
};

Vector policy_mean(const FeatureSet& features, const Policy& p);
PsdMatrix sigma_cov(const FeatureSet& features, const Policy& p);
PsdMatrix sigma_shifted(const FeatureSet& features, const Policy& p, std::size_t anchor);

NormValue inv_norm_sq(const PsdMatrix& a, const Vector& y,
                      double tol_space = GeneralizedInverseNorm::kDefaultSpaceTol);

/// Maximum over pairs (u, u') of the active set of ||u - u'||^2 in sigma_cov(source, p)^-1.
NormValue v_cov_eval(const FeatureSet& active, const FeatureSet& source, const Policy& p);

/// Orthonormal basis (columns) for the span of the rows of `vectors`.
Matrix span_basis(const Matrix& vectors, double rank_tol = PsdMatrix::kDefaultRankTol);

/// Orthonormal basis for span{x_i - x_j}.
Matrix difference_span_basis(const FeatureSet& features);

/// True when y lies in the column span of `basis` up to tol_space * ||y||.
bool in_span(const Matrix& basis, const Vector& y,
             double tol_space = GeneralizedInverseNorm::kDefaultSpaceTol);

}  // namespace semibai
