#pragma once

#include <string_view>
#include <utility>
#include <variant>

#include "transop/basefield.hpp"
#include "transop/opalgebra.hpp"
#include "transop/report.hpp"
#include "transop/spectral.hpp"

namespace transop {

/// u_yy + a^2 u_xx = 0 on x > 0 with h u(0,y) + u_x(0,y) = f(y).
struct RobinProblem {
  SpectralMatrix a;
  SpectralMatrix h;
  BoundaryTrace trace;
};

/// Two layers 0 < x < l and x > l with coefficients a1, a2, Dirichlet data
/// f at x = 0, and continuity of u and lambda u_x at x = l.
struct TwoLayerProblem {
  SpectralMatrix a1;
  SpectralMatrix a2;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double l = 1.0;
  BoundaryTrace trace;
};

using ProblemSpec = std::variant<RobinProblem, TwoLayerProblem>;

/// Throws SpectrumViolation, NonCommuting, DimMismatch, InvalidArgument.
void validate(const RobinProblem& p);
/// Throws SpectrumViolation, DimMismatch, InvalidArgument.
void validate(const TwoLayerProblem& p);

/// Literal evaluates the transforms exactly as stated: the Robin integral
/// as written and the two-layer series with chi = kappa. Calibrated negates
/// the Robin field so h u + u_x = +f, and uses chi = (kappa - I)(kappa + I)^-1.
enum class ConventionMode { Literal, Calibrated };

std::string_view to_string(ConventionMode mode);
/// Accepts "literal" or "calibrated"; throws ValidationError.
ConventionMode parse_convention(std::string_view text);

struct RobinOptions {
  ConventionMode mode = ConventionMode::Calibrated;
  double eps_max = 60.0;
  double quad_tol = 1e-9;
  int max_panels = 4000;
  double fd_step = 1e-3;  ///< step of the one-sided x-derivative in diagnostics
  BaseFieldOptions base{};
};

/// Point evaluator for the Dirichlet-to-Robin transform
///   u(x,y) = sum_k int_0^inf u~_k(a^-1 x + eps I, y) exp(a h eps) a e_k deps.
class RobinSolution {
 public:
  RobinSolution(RobinProblem problem, RobinOptions options);

  const RobinProblem& problem() const noexcept { return problem_; }
  const RobinOptions& options() const noexcept { return options_; }
  double eps_cutoff() const noexcept { return eps_cutoff_; }

  BaseSample sample(double x, double y) const;
  Vector value(double x, double y) const { return sample(x, y).value; }

  /// h u(0,y) + u_x(0,y) using a one-sided second-order difference.
  Vector boundary_operator(double y) const;

  /// Upper bound for the discarded tail beyond eps_cutoff.
  double tail_bound() const noexcept { return tail_bound_; }

 private:
  RobinProblem problem_;
  RobinOptions options_;
  SpectralMatrix ah_;
  double eps_cutoff_ = 0.0;
  double tail_bound_ = 0.0;
};

struct RobinResult {
  FieldGrid field;
  SolveReport report;
};

/// Grid solve plus diagnostics. The boundary residual is measured against
/// h u + u_x = -f (Literal) or +f (Calibrated).
RobinResult robin_transform(const RobinProblem& problem, const GridSpec& grid,
                            const RobinOptions& options = {});

struct TwoLayerOptions {
  ConventionMode mode = ConventionMode::Calibrated;
  double series_tol = 1e-10;
  int j_max = 64;
  double prune_tol = 1e-15;
  double fd_step = 1e-3;
  BaseFieldOptions base{};
};

/// (kappa - I)(kappa + I)^-1. Throws SingularMatrix.
Matrix reflection_coefficient(const Matrix& kappa);

/// kappa = a1 lambda1^-1 lambda2 a2^-1.
Matrix contrast_matrix(const TwoLayerProblem& p);

/// chi for the requested convention. Calibrated requires commuting a1, a2
/// (throws SharedBasisRequired).
Matrix series_chi(const TwoLayerProblem& p, ConventionMode mode);

/// Point evaluator for a two-layer field assembled from one operator per
/// layer applied to the base profile u~(., y).
class TwoLayerSolution {
 public:
  TwoLayerSolution(TwoLayerProblem problem, TermSumOperator layer1, TermSumOperator layer2,
                   BaseFieldOptions base = {});

  const TwoLayerProblem& problem() const noexcept { return problem_; }
  const TermSumOperator& layer_operator(int layer) const;

  /// Layer chosen by x <= l.
  Vector value(double x, double y) const;
  /// Evaluate a specific layer's expression (layer is 1 or 2).
  Vector layer_value(int layer, double x, double y) const;
  /// One-sided x-derivative at x taken inside the given layer.
  Vector layer_dx(int layer, double x, double y, double step) const;

  FieldGrid layer_grid(int layer, const GridSpec& spec) const;

 private:
  TwoLayerProblem problem_;
  TermSumOperator layer1_;
  TermSumOperator layer2_;
  BaseFieldOptions base_;
};

/// Splits a global grid at x = l into one uniform grid per layer with the
/// same target spacing. Requires 0 <= x0 < l < x1.
std::pair<GridSpec, GridSpec> split_at_interface(const GridSpec& grid, double l);

struct TwoLayerResult {
  TwoLayerSolution solution;
  FieldGrid layer1;
  FieldGrid layer2;
  SolveReport report;
  Matrix chi;
  ImageSeries series;
};

/// Image-series solve for the two-layer problem. Throws SeriesDiverging when
/// rho(chi) times the per-order attenuation is >= 1.
TwoLayerResult two_layer_transform(const TwoLayerProblem& problem, const GridSpec& grid,
                                   const TwoLayerOptions& options = {});

/// u1 = R_a1 T_a1 u~, u2 = R_a2 T_a1 u~.
TwoLayerSolution order0_approximation(const TwoLayerProblem& problem, BaseFieldOptions base = {});

/// Order-0 plus (R_a1 T_a1 T_a1 - S R_a1) U_chi T_a1 u~ in layer 1 and
/// (R_a2 T_a1 T_a1 - R_a2) U_chi T_a1 u~ in layer 2.
TwoLayerSolution order1_approximation(const TwoLayerProblem& problem, ConventionMode mode,
                                  BaseFieldOptions base = {});

/// Pointwise diagnostics of a two-layer solution along the grid's y nodes:
/// Dirichlet recovery at x = 0, value and flux jumps at x = l.
SolveReport two_layer_diagnostics(const TwoLayerSolution& solution, const GridSpec& grid,
                                  double fd_step);

}  // namespace transop
