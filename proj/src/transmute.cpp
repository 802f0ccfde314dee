#include "transop/transmute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "transop/quadrature.hpp"

namespace transop {

namespace {

void require_dim(int expected, int actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorKind::DimMismatch, std::string(what) + " has dimension " +
                                            std::to_string(actual) + ", expected " +
                                            std::to_string(expected));
  }
}

Matrix inverse_of(const SpectralMatrix& m) {
  return apply_scalar_fn(m, [](double s) { return 1.0 / s; });
}

// One-sided second-order first derivative; direction +1 looks forward.
Vector one_sided_dx(const std::function<Vector(double)>& u, double x, double step, int direction) {
  const double s = step * direction;
  return direction * (-3.0 * u(x) + 4.0 * u(x + s) - u(x + 2.0 * s)) / (2.0 * step);
}

}  // namespace

std::string_view to_string(ConventionMode mode) {
  return mode == ConventionMode::Literal ? "literal" : "calibrated";
}

ConventionMode parse_convention(std::string_view text) {
  if (text == "literal") return ConventionMode::Literal;
  if (text == "calibrated") return ConventionMode::Calibrated;
  throw Error(ErrorKind::ValidationError,
              "mode must be \"literal\" or \"calibrated\", got \"" + std::string(text) + "\"");
}

void validate(const RobinProblem& p) {
  const int n = p.a.dim();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Robin problem needs the matrix a");
  require_dim(n, p.h.dim(), "h");
  require_dim(n, p.trace.dim(), "trace");
  if (!spectrum_in_halfplane(p.a, HalfPlane::Right)) {
    throw Error(ErrorKind::SpectrumViolation, "spectrum of a must lie in the right half-plane");
  }
  if (!spectrum_in_halfplane(p.h, HalfPlane::Left)) {
    throw Error(ErrorKind::SpectrumViolation, "spectrum of h must lie in the left half-plane");
  }
  const double scale = std::max(1.0, p.a.entries().norm() * p.h.entries().norm());
  if (commutator_norm(p.a, p.h) > 1e-10 * scale) {
    throw Error(ErrorKind::NonCommuting, "a and h must commute");
  }
}

void validate(const TwoLayerProblem& p) {
  const int n = p.a1.dim();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "two-layer problem needs a1");
  require_dim(n, p.a2.dim(), "a2");
  require_dim(n, p.trace.dim(), "trace");
  if (!spectrum_in_halfplane(p.a1, HalfPlane::Right) ||
      !spectrum_in_halfplane(p.a2, HalfPlane::Right)) {
    throw Error(ErrorKind::SpectrumViolation, "spectra of a1 and a2 must be positive");
  }
  if (!(p.lambda1 > 0.0) || !(p.lambda2 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "conductivities must be positive");
  }
  if (!(p.l > 0.0) || !std::isfinite(p.l)) {
    throw Error(ErrorKind::InvalidArgument, "interface abscissa l must be positive");
  }
}

// ---------------------------------------------------------------------------
// Robin transform

RobinSolution::RobinSolution(RobinProblem problem, RobinOptions options)
    : problem_(std::move(problem)), options_(options) {
  validate(problem_);
  if (!(options_.quad_tol > 0.0) || !(options_.eps_max > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "quad_tol and eps_max must be positive");
  }
  ah_ = eigendecompose(problem_.a.entries() * problem_.h.entries());
  const double decay = ah_.eigenvalues().cwiseAbs().minCoeff();
  eps_cutoff_ = std::min(options_.eps_max, -std::log(options_.quad_tol) / decay);
  const double a_norm = problem_.a.entries().norm();
  tail_bound_ = ah_.cond_q() * a_norm * problem_.trace.sup_bound() * problem_.a.dim() *
                std::exp(-decay * eps_cutoff_) / decay;
}

BaseSample RobinSolution::sample(double x, double y) const {
  const SpectralMatrix& a = problem_.a;
  const int n = a.dim();
  const Matrix& q = a.eigvecs();
  const Matrix& q_inv = a.eigvecs_inv();
  const Vector& lam = a.eigenvalues();
  double base_error = 0.0;

  auto integrand = [&](double eps) -> Vector {
    // Column i holds u~(x / lambda_i + eps, y); row k feeds spectral weights
    // of u~_k(a^-1 x + eps I) = Q diag(u~_k(x / lambda_i + eps)) Q^-1.
    Matrix base(n, n);
    for (int i = 0; i < n; ++i) {
      BaseSample s = harmonic_extension_sample(problem_.trace, x / lam(i) + eps, y, options_.base);
      base.col(i) = s.value;
      base_error = std::max(base_error, s.quad_error);
    }
    const Matrix kernel = matrix_exp(ah_, eps) * a.entries();
    Vector out = Vector::Zero(n);
    for (int k = 0; k < n; ++k) {
      const Matrix weight = q * base.row(k).transpose().asDiagonal() * q_inv;
      out += weight * kernel.col(k);
    }
    return out;
  };

  std::vector<double> breaks;
  constexpr int kSeedPanels = 8;
  for (int k = 0; k <= kSeedPanels; ++k) breaks.push_back(eps_cutoff_ * k / kSeedPanels);
  QuadratureResult r =
      integrate_adaptive(integrand, breaks, options_.quad_tol, 0.0, options_.max_panels);
  if (options_.mode == ConventionMode::Calibrated) r.value = -r.value;
  const double base_term =
      base_error * ah_.cond_q() * a.entries().norm() * n / ah_.eigenvalues().cwiseAbs().minCoeff();
  return BaseSample{r.value, r.error + tail_bound_ + base_term};
}

Vector RobinSolution::boundary_operator(double y) const {
  const auto u = [&](double x) { return value(x, y); };
  return problem_.h.entries() * u(0.0) + one_sided_dx(u, 0.0, options_.fd_step, +1);
}

RobinResult robin_transform(const RobinProblem& problem, const GridSpec& grid,
                            const RobinOptions& options) {
  grid.validate();
  if (grid.x0 < 0.0) throw Error(ErrorKind::EvalDomain, "Robin grid must lie in x >= 0");
  RobinSolution solution(problem, options);
  const int n = problem.a.dim();
  FieldGrid field(grid, n);
  SolveReport report;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      BaseSample s = solution.sample(grid.x(i), grid.y(j));
      field.set(i, j, s.value);
      report.quadrature_error = std::max(report.quadrature_error, s.quad_error);
    }
  }
  const double sign = options.mode == ConventionMode::Calibrated ? 1.0 : -1.0;
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.y(j);
    const Vector gap = solution.boundary_operator(y) - sign * problem.trace.value(y);
    report.boundary_residual_linf = std::max(report.boundary_residual_linf, gap.cwiseAbs().maxCoeff());
  }
  report.pde_residual_linf = pde_residual_linf(field, problem.a.entries());
  report.truncation_proxy = solution.tail_bound();
  return RobinResult{std::move(field), report};
}

// ---------------------------------------------------------------------------
// Two-layer transform

Matrix reflection_coefficient(const Matrix& kappa) {
  if (kappa.rows() != kappa.cols()) throw Error(ErrorKind::DimMismatch, "kappa must be square");
  const Matrix id = Matrix::Identity(kappa.rows(), kappa.cols());
  Eigen::PartialPivLU<Matrix> lu((kappa + id).transpose());
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorKind::SingularMatrix, "kappa + I is singular");
  }
  // X (kappa + I) = kappa - I.
  return lu.solve((kappa - id).transpose()).transpose();
}

Matrix contrast_matrix(const TwoLayerProblem& p) {
  return (p.lambda2 / p.lambda1) * p.a1.entries() * inverse_of(p.a2);
}

Matrix series_chi(const TwoLayerProblem& p, ConventionMode mode) {
  const Matrix kappa = contrast_matrix(p);
  if (mode == ConventionMode::Literal) return kappa;
  shared_eigenbasis(p.a1, p.a2);  // throws SharedBasisRequired
  return reflection_coefficient(kappa);
}

TwoLayerSolution::TwoLayerSolution(TwoLayerProblem problem, TermSumOperator layer1,
                                   TermSumOperator layer2, BaseFieldOptions base)
    : problem_(std::move(problem)),
      layer1_(std::move(layer1)),
      layer2_(std::move(layer2)),
      base_(base) {
  require_dim(problem_.trace.dim(), layer1_.dim(), "layer-1 operator");
  require_dim(problem_.trace.dim(), layer2_.dim(), "layer-2 operator");
}

const TermSumOperator& TwoLayerSolution::layer_operator(int layer) const {
  if (layer == 1) return layer1_;
  if (layer == 2) return layer2_;
  throw Error(ErrorKind::InvalidArgument, "layer must be 1 or 2");
}

Vector TwoLayerSolution::layer_value(int layer, double x, double y) const {
  return apply(layer_operator(layer), profile_at_y(problem_.trace, y, base_), x);
}

Vector TwoLayerSolution::value(double x, double y) const {
  return layer_value(x <= problem_.l ? 1 : 2, x, y);
}

Vector TwoLayerSolution::layer_dx(int layer, double x, double y, double step) const {
  const Profile base = profile_at_y(problem_.trace, y, base_);
  const TermSumOperator& op = layer_operator(layer);
  const auto u = [&](double s) { return apply(op, base, s); };
  return one_sided_dx(u, x, step, layer == 1 ? -1 : +1);
}

FieldGrid TwoLayerSolution::layer_grid(int layer, const GridSpec& spec) const {
  const TermSumOperator& op = layer_operator(layer);
  FieldGrid grid(spec, problem_.trace.dim());
  for (int j = 0; j < spec.ny; ++j) {
    const Profile base = profile_at_y(problem_.trace, spec.y(j), base_);
    for (int i = 0; i < spec.nx; ++i) grid.set(i, j, apply(op, base, spec.x(i)));
  }
  grid.layer_boundary = problem_.l;
  return grid;
}

std::pair<GridSpec, GridSpec> split_at_interface(const GridSpec& grid, double l) {
  grid.validate();
  if (!(grid.x0 >= 0.0 && grid.x0 < l && l < grid.x1)) {
    throw Error(ErrorKind::InvalidArgument, "two-layer grid needs 0 <= x0 < l < x1");
  }
  const double h = grid.hx();
  GridSpec first = grid;
  GridSpec second = grid;
  first.x1 = l;
  first.nx = std::max(2, static_cast<int>(std::lround((l - grid.x0) / h)) + 1);
  second.x0 = l;
  second.nx = std::max(2, static_cast<int>(std::lround((grid.x1 - l) / h)) + 1);
  return {first, second};
}

SolveReport two_layer_diagnostics(const TwoLayerSolution& solution, const GridSpec& grid,
                                  double fd_step) {
  const TwoLayerProblem& p = solution.problem();
  SolveReport report;
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.y(j);
    const Vector recovery = solution.layer_value(1, 0.0, y) - p.trace.value(y);
    const Vector jump = solution.layer_value(1, p.l, y) - solution.layer_value(2, p.l, y);
    const Vector flux = p.lambda1 * solution.layer_dx(1, p.l, y, fd_step) -
                        p.lambda2 * solution.layer_dx(2, p.l, y, fd_step);
    report.boundary_residual_linf =
        std::max(report.boundary_residual_linf, recovery.cwiseAbs().maxCoeff());
    report.interface_value_gap = std::max(report.interface_value_gap, jump.cwiseAbs().maxCoeff());
    report.interface_flux_gap = std::max(report.interface_flux_gap, flux.cwiseAbs().maxCoeff());
  }
  return report;
}

TwoLayerResult two_layer_transform(const TwoLayerProblem& problem, const GridSpec& grid,
                                   const TwoLayerOptions& options) {
  validate(problem);
  const auto [grid1, grid2] = split_at_interface(grid, problem.l);
  const Matrix chi = series_chi(problem, options.mode);

  double attenuation = 1.0;
  const double omega_min = problem.trace.min_omega();
  if (problem.trace.mode_only() && omega_min > 0.0) {
    attenuation = std::exp(-2.0 * omega_min * problem.l / problem.a1.max_eigenvalue());
  }
  const double rho = spectral_radius(chi) * attenuation;
  if (rho >= 1.0) {
    throw Error(ErrorKind::SeriesDiverging,
                "image series ratio " + std::to_string(rho) + " is not below 1");
  }

  ImageSeriesOptions series_options;
  series_options.j_max = options.j_max;
  series_options.prune_tol = options.prune_tol;
  series_options.series_tol = options.series_tol;
  series_options.attenuation = attenuation;
  ImageSeries series = image_series(problem.a1, problem.a2, chi, problem.l, series_options);

  TwoLayerSolution solution(problem, series.layer1, series.layer2, options.base);
  FieldGrid layer1 = solution.layer_grid(1, grid1);
  FieldGrid layer2 = solution.layer_grid(2, grid2);

  SolveReport report = two_layer_diagnostics(solution, grid, options.fd_step);
  report.pde_residual_linf = std::max(pde_residual_linf(layer1, problem.a1.entries()),
                                      pde_residual_linf(layer2, problem.a2.entries()));
  report.series_terms_used = series.orders_used;
  report.truncation_proxy = series.last_term_norm * problem.trace.sup_bound();
  if (!problem.trace.mode_only()) {
    report.quadrature_error =
        options.base.quad_tol * (series.layer1.weight_norm() + series.layer2.weight_norm());
  }
  return TwoLayerResult{std::move(solution), std::move(layer1), std::move(layer2), report, chi,
                        std::move(series)};
}

TwoLayerSolution order0_approximation(const TwoLayerProblem& problem, BaseFieldOptions base) {
  validate(problem);
  const TermSumOperator shift = shift_op(problem.a1, problem.l);
  TermSumOperator layer1 = merge_prune(compose(scaling_op(problem.a1, problem.l), shift), 0.0);
  TermSumOperator layer2 = merge_prune(compose(scaling_op(problem.a2, problem.l), shift), 0.0);
  return TwoLayerSolution(problem, std::move(layer1), std::move(layer2), base);
}

TwoLayerSolution order1_approximation(const TwoLayerProblem& problem, ConventionMode mode,
                                  BaseFieldOptions base) {
  validate(problem);
  const int n = problem.a1.dim();
  const TermSumOperator shift = shift_op(problem.a1, problem.l);
  const TermSumOperator scale1 = scaling_op(problem.a1, problem.l);
  const TermSumOperator scale2 = scaling_op(problem.a2, problem.l);
  const TermSumOperator reflect = reflection_op(problem.l, n);
  const TermSumOperator contract_shift =
      compose(contraction_op(series_chi(problem, mode)), shift);  // U_chi T_a1
  const TermSumOperator double_shift = compose(shift, shift);

  const TermSumOperator correction1 =
      compose(compose(scale1, double_shift) - compose(reflect, scale1), contract_shift);
  const TermSumOperator correction2 =
      compose(compose(scale2, double_shift) - scale2, contract_shift);
  TermSumOperator layer1 = merge_prune(compose(scale1, shift) + correction1, 0.0);
  TermSumOperator layer2 = merge_prune(compose(scale2, shift) + correction2, 0.0);
  return TwoLayerSolution(problem, std::move(layer1), std::move(layer2), base);
}

}  // namespace transop
