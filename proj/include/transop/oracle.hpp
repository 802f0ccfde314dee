#pragma once

#include <optional>
#include <vector>

#include "transop/basefield.hpp"
#include "transop/report.hpp"
#include "transop/spectral.hpp"
#include "transop/transmute.hpp"

namespace transop {

/// Exact single-frequency solution of the two-layer problem (flux reading
/// of the interface condition), u = X(x) cos(omega y) with
///   X1(x) = E1(-x) c1 + E1(x) c2,   X2(x) = E2(-x) c3 + E2(x) c4,
/// where E_k(s) = exp(omega s a_k^-1). c4 is zero unless a far wall u(W) = 0
/// is imposed. Coefficients are in the original basis.
struct ModeMatchSolution {
  double omega = 0.0;
  double l = 0.0;
  std::optional<double> wall;
  SharedBasis basis;
  Vector c1, c2, c3, c4;

  Vector layer1(double x) const;
  Vector layer2(double x) const;
  Vector value(double x) const { return x <= l ? layer1(x) : layer2(x); }
};

/// Throws SharedBasisRequired, SingularSystem, InvalidArgument (omega <= 0).
ModeMatchSolution mode_match_two_layer(const TwoLayerProblem& problem, double omega,
                                       const Vector& amp, std::optional<double> wall = {});

/// Superposition of mode_match_two_layer over every mode of the trace.
class TwoLayerModeField {
 public:
  explicit TwoLayerModeField(const TwoLayerProblem& problem, std::optional<double> wall = {});
  Vector value(double x, double y) const;

 private:
  struct Term {
    ModeMatchSolution cos_part;
    ModeMatchSolution sin_part;
  };
  double l_ = 0.0;
  Vector constant_;
  std::vector<Term> terms_;
};

/// Exact solution of the Robin problem with h u + u_x = +f for a mode trace,
/// u = sum_modes E(-x) (c_cos cos + c_sin sin) with E as above.
class RobinModeField {
 public:
  explicit RobinModeField(const RobinProblem& problem);
  Vector value(double x, double y) const;

 private:
  struct Term {
    double omega;
    Vector c_cos;  // channel coordinates
    Vector c_sin;
  };
  SharedBasis basis_;
  std::vector<Term> terms_;
};

enum class FarField {
  Dirichlet,  ///< u = 0 at x = X
  Decay,      ///< exact outgoing condition u_x = -a^-1 |d/dy| u at x = X
};

struct FdOptions {
  double x_max = 8.0;
  int nx = 129;
  int ny = 32;
  FarField far_field = FarField::Decay;
  double far_tol = 1e-3;
};

/// Second-order finite differences on [0, X] x one y-period, one scalar
/// channel at a time in the joint eigenbasis. The returned grid spans
/// y in [0, P - P/ny]. Throws InvalidArgument (sampled trace, interface off
/// the grid), TruncationTooSmall, SingularSystem.
FieldGrid fd_solve(const RobinProblem& problem, const FdOptions& options);
FieldGrid fd_solve(const TwoLayerProblem& problem, const FdOptions& options);
FieldGrid fd_solve(const ProblemSpec& problem, const FdOptions& options);

/// The y-period used by fd_solve for a trace.
double trace_period(const BoundaryTrace& trace);

struct CompareMetrics {
  double linf = 0.0;
  double l2 = 0.0;  ///< sqrt(hx hy sum |d|^2)
  Vector per_component_linf;
};

/// Throws GridMismatch when the two grids differ in layout or dimension.
CompareMetrics compare(const FieldGrid& a, const FieldGrid& b);

/// Grid-only residuals; boundary and interface derivatives use one-sided
/// second-order differences. Throws GridMismatch.
SolveReport residual_report(const FieldGrid& field, const RobinProblem& problem,
                            ConventionMode mode);
SolveReport residual_report(const FieldGrid& layer1, const FieldGrid& layer2,
                            const TwoLayerProblem& problem);

}  // namespace transop
