#pragma once

#include <functional>

#include "transop/error.hpp"
#include "transop/types.hpp"

namespace transop {

/// A real diagonalizable coefficient matrix together with its cached
/// eigendecomposition a = Q diag(lambda) Q^-1.
///
/// Instances only come out of eigendecompose(), which enforces the
/// reconstruction and conditioning invariants. Eigenvalues are sorted
/// ascending; ties keep the solver's column order. Immutable once built.
class SpectralMatrix {
 public:
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const noexcept { return entries_; }
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigvecs() const noexcept { return eigvecs_; }
  const Matrix& eigvecs_inv() const noexcept { return eigvecs_inv_; }
  double cond_q() const noexcept { return cond_q_; }

  double min_eigenvalue() const { return eigenvalues_.minCoeff(); }
  double max_eigenvalue() const { return eigenvalues_.maxCoeff(); }

  /// Spectral projector Q I_i Q^-1 onto the i-th eigendirection.
  Matrix projector(int i) const;

 private:
  friend SpectralMatrix eigendecompose(const Matrix&, double, double);

  Matrix entries_;
  Vector eigenvalues_;
  Matrix eigvecs_;
  Matrix eigvecs_inv_;
  double cond_q_ = 1.0;
};

inline constexpr double kDefaultEigenTol = 1e-9;
inline constexpr double kDefaultCondCap = 1e8;

/// Throws DefectiveMatrix, ComplexSpectrum or IllConditionedEigvecs.
SpectralMatrix eigendecompose(const Matrix& matrix, double tol = kDefaultEigenTol,
                              double cond_cap = kDefaultCondCap);

/// Convenience for 1x1 coefficients.
SpectralMatrix scalar_spectral(double value);

enum class HalfPlane { Right, Left };

/// Zero eigenvalues count as outside both half-planes.
bool spectrum_in_halfplane(const SpectralMatrix& m, HalfPlane side);

/// Q diag(exp(lambda_i t)) Q^-1. Throws Overflow when lambda_i t > 700.
Matrix matrix_exp(const SpectralMatrix& m, double t);

/// Q diag(g(lambda_i)) Q^-1. Throws EvalDomain when g is not finite at an
/// eigenvalue.
Matrix apply_scalar_fn(const SpectralMatrix& m, const std::function<double(double)>& g);

/// Frobenius norm of ah - ha. Throws DimMismatch.
double commutator_norm(const SpectralMatrix& a, const SpectralMatrix& h);
double commutator_norm(const Matrix& a, const Matrix& h);

/// Common eigenbasis of two commuting diagonalizable matrices.
struct SharedBasis {
  Matrix q;
  Matrix q_inv;
  Vector first;   ///< eigenvalues of the first matrix, per column of q
  Vector second;  ///< eigenvalues of the second matrix, per column of q
};

/// Throws SharedBasisRequired when the pair does not commute within
/// tol * (1 + |a|)(1 + |b|) or cannot be jointly diagonalized.
SharedBasis shared_eigenbasis(const SpectralMatrix& a, const SpectralMatrix& b,
                              double tol = 1e-8);

double spectral_radius(const Matrix& m);

}  // namespace transop
