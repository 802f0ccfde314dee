#pragma once

#include <functional>
#include <vector>

#include "transop/spectral.hpp"
#include "transop/types.hpp"

namespace transop {

/// Vector-valued function of one real argument (the x-profile of a field).
using Profile = std::function<Vector(double)>;

/// One term M * f(alpha * x + beta).
struct OperatorTerm {
  Matrix weight;
  double arg_scale = 1.0;
  double arg_shift = 0.0;
};

/// Finite sum of matrix-weighted affine-argument terms:
///   (A f)(x) = sum_k M_k f(alpha_k x + beta_k).
/// Closed under composition, addition and scaling.
class TermSumOperator {
 public:
  TermSumOperator() = default;
  TermSumOperator(int dim, std::vector<OperatorTerm> terms);

  static TermSumOperator identity(int dim);
  static TermSumOperator zero(int dim);

  int dim() const noexcept { return dim_; }
  const std::vector<OperatorTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  /// Sum of Frobenius norms of the term weights.
  double weight_norm() const;

  TermSumOperator operator+(const TermSumOperator& other) const;
  TermSumOperator operator-(const TermSumOperator& other) const;
  TermSumOperator scaled(double factor) const;

 private:
  int dim_ = 0;
  std::vector<OperatorTerm> terms_;
};

/// T_a f(x) = sum_i P_i f(x + l / lambda_i). Throws ZeroEigenvalue.
TermSumOperator shift_op(const SpectralMatrix& a, double l);

/// U_chi f(x) = chi f(x).
TermSumOperator contraction_op(const Matrix& chi);

/// S f(x) = f(2l - x).
TermSumOperator reflection_op(double l, int dim);

/// R_a f(x) = f(a^-1 (x - l)) = sum_i P_i f((x - l) / lambda_i). Throws ZeroEigenvalue.
TermSumOperator scaling_op(const SpectralMatrix& a, double l);

/// (A o B) f = A (B f). Throws DimMismatch.
TermSumOperator compose(const TermSumOperator& outer, const TermSumOperator& inner);

/// Sums terms whose (alpha, beta) agree within 1e-12 and drops terms with
/// |M|_F <= prune_tol. Output is ordered by (alpha, beta).
TermSumOperator merge_prune(const TermSumOperator& op, double prune_tol);

/// sum_k M_k f(alpha_k x + beta_k), in term order.
Vector apply(const TermSumOperator& op, const Profile& f, double x);

struct ImageSeriesOptions {
  int j_max = 64;
  double prune_tol = 1e-15;
  /// Stop after the first order j >= 1 whose attenuated weight norm falls
  /// below this; 0 sums exactly j_max + 1 orders.
  double series_tol = 0.0;
  /// Per-order decay factor of the profile values reached by successive
  /// images (exp(-2 omega l / lambda_max) for mode data, 1 otherwise).
  double attenuation = 1.0;
};

struct ImageSeries {
  TermSumOperator layer1;
  TermSumOperator layer2;
  int orders_used = 0;          ///< number of j values summed
  double last_term_norm = 0.0;  ///< attenuated weight norm of the last order
  bool converged = false;       ///< last_term_norm fell below series_tol
};

/// Image series for the two-layer Dirichlet problem:
///   layer1 = sum_j (R_a1 - S R_a1 U_chi) T_a1 (T_a1 U_chi T_a1)^j
///   layer2 = sum_j (R_a2 - R_a2 U_chi) T_a1 (T_a1 U_chi T_a1)^j
ImageSeries image_series(const SpectralMatrix& a1, const SpectralMatrix& a2,
                               const Matrix& chi, double l, const ImageSeriesOptions& options);

}  // namespace transop
