#include "transop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace transop {

namespace {

Vector exp_channels(const Vector& eig, double omega, double x) {
  return (omega * x / eig.array()).exp().matrix();
}

}  // namespace

// ---------------------------------------------------------------------------
// Mode matching

Vector ModeMatchSolution::layer1(double x) const {
  const Vector k1 = basis.q_inv * c1;
  const Vector k2 = basis.q_inv * c2;
  return basis.q * (exp_channels(basis.first, omega, -x).cwiseProduct(k1) +
                    exp_channels(basis.first, omega, x).cwiseProduct(k2));
}

Vector ModeMatchSolution::layer2(double x) const {
  const Vector k3 = basis.q_inv * c3;
  const Vector k4 = basis.q_inv * c4;
  Vector out = exp_channels(basis.second, omega, -x).cwiseProduct(k3);
  if (wall) out += exp_channels(basis.second, omega, x).cwiseProduct(k4);
  return basis.q * out;
}

ModeMatchSolution mode_match_two_layer(const TwoLayerProblem& problem, double omega,
                                       const Vector& amp, std::optional<double> wall) {
  validate(problem);
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "mode matching needs omega > 0");
  if (amp.size() != problem.a1.dim()) throw Error(ErrorKind::DimMismatch, "amplitude dimension");
  if (wall && !(*wall > problem.l)) {
    throw Error(ErrorKind::InvalidArgument, "far wall must lie beyond the interface");
  }
  ModeMatchSolution out;
  out.omega = omega;
  out.l = problem.l;
  out.wall = wall;
  out.basis = shared_eigenbasis(problem.a1, problem.a2);
  const int n = problem.a1.dim();
  const Vector amp_channels = out.basis.q_inv * amp;
  Vector k1(n), k2(n), k3(n), k4 = Vector::Zero(n);

  const double l = problem.l;
  const int unknowns = wall ? 4 : 3;
  for (int c = 0; c < n; ++c) {
    const double mu = out.basis.first(c);
    const double nu = out.basis.second(c);
    if (wall && omega * *wall / nu > 700.0) {
      throw Error(ErrorKind::Overflow, "far wall too distant for the growing exponential");
    }
    const double em = std::exp(-omega * l / mu), ep = std::exp(omega * l / mu);
    const double fm = std::exp(-omega * l / nu), fp = std::exp(omega * l / nu);
    Matrix sys = Matrix::Zero(unknowns, unknowns);
    Vector rhs = Vector::Zero(unknowns);
    sys.row(0).head(2) << 1.0, 1.0;
    rhs(0) = amp_channels(c);
    sys(1, 0) = em;
    sys(1, 1) = ep;
    sys(1, 2) = -fm;
    sys(2, 0) = -problem.lambda1 * em / mu;
    sys(2, 1) = problem.lambda1 * ep / mu;
    sys(2, 2) = problem.lambda2 * fm / nu;
    if (wall) {
      sys(1, 3) = -fp;
      sys(2, 3) = -problem.lambda2 * fp / nu;
      sys(3, 2) = std::exp(-omega * *wall / nu);
      sys(3, 3) = std::exp(omega * *wall / nu);
    }
    Eigen::FullPivLU<Matrix> lu(sys);
    if (lu.rank() < unknowns) throw Error(ErrorKind::SingularSystem, "mode-matching system is singular");
    const Vector sol = lu.solve(rhs);
    if ((sys * sol - rhs).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, std::abs(rhs(0)))) {
      throw Error(ErrorKind::SingularSystem, "mode-matching solve is inaccurate");
    }
    k1(c) = sol(0);
    k2(c) = sol(1);
    k3(c) = sol(2);
    if (wall) k4(c) = sol(3);
  }
  out.c1 = out.basis.q * k1;
  out.c2 = out.basis.q * k2;
  out.c3 = out.basis.q * k3;
  out.c4 = out.basis.q * k4;
  return out;
}

TwoLayerModeField::TwoLayerModeField(const TwoLayerProblem& problem, std::optional<double> wall)
    : l_(problem.l), constant_(Vector::Zero(problem.trace.dim())) {
  if (!problem.trace.mode_only()) {
    throw Error(ErrorKind::InvalidArgument, "mode matching needs a mode-only trace");
  }
  for (const auto& m : problem.trace.modes()) {
    if (m.omega == 0.0) {
      if (wall) throw Error(ErrorKind::InvalidArgument, "constant mode with a far wall");
      constant_ += m.cos_amp;
      continue;
    }
    terms_.push_back({mode_match_two_layer(problem, m.omega, m.cos_amp, wall),
                      mode_match_two_layer(problem, m.omega, m.sin_amp, wall)});
  }
}

Vector TwoLayerModeField::value(double x, double y) const {
  Vector out = constant_;
  for (const auto& t : terms_) {
    const double w = t.cos_part.omega;
    out += t.cos_part.value(x) * std::cos(w * y) + t.sin_part.value(x) * std::sin(w * y);
  }
  return out;
}

RobinModeField::RobinModeField(const RobinProblem& problem) {
  validate(problem);
  if (!problem.trace.mode_only()) {
    throw Error(ErrorKind::InvalidArgument, "mode matching needs a mode-only trace");
  }
  basis_ = shared_eigenbasis(problem.a, problem.h);
  for (const auto& m : problem.trace.modes()) {
    // Channel ODE: u = c exp(-omega x / mu), (h - omega / mu) c = f.
    const Vector denom = basis_.second.array() - m.omega / basis_.first.array();
    if ((denom.array().abs() < 1e-300).any()) {
      throw Error(ErrorKind::SingularSystem, "Robin mode is resonant");
    }
    terms_.push_back({m.omega, (basis_.q_inv * m.cos_amp).cwiseQuotient(denom),
                      (basis_.q_inv * m.sin_amp).cwiseQuotient(denom)});
  }
}

Vector RobinModeField::value(double x, double y) const {
  Vector channels = Vector::Zero(basis_.q.rows());
  for (const auto& t : terms_) {
    channels += exp_channels(basis_.first, t.omega, -x)
                    .cwiseProduct(t.c_cos * std::cos(t.omega * y) + t.c_sin * std::sin(t.omega * y));
  }
  return basis_.q * channels;
}

// ---------------------------------------------------------------------------
// Finite differences

double trace_period(const BoundaryTrace& trace) {
  if (!trace.mode_only()) {
    throw Error(ErrorKind::InvalidArgument, "finite-difference oracle needs a mode-only trace");
  }
  double base = 0.0;
  for (const auto& m : trace.modes()) {
    if (m.omega > 0.0 && (base == 0.0 || m.omega < base)) base = m.omega;
  }
  if (base == 0.0) return 2.0 * std::numbers::pi;
  for (const auto& m : trace.modes()) {
    const double ratio = m.omega / base;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      throw Error(ErrorKind::InvalidArgument, "mode frequencies are not commensurate");
    }
  }
  return 2.0 * std::numbers::pi / base;
}

namespace {

struct Channel {
  double a_near = 1.0;  // coefficient for x < interface (or everywhere)
  double a_far = 1.0;   // coefficient for x > interface
  double robin_h = 0.0;
  std::vector<double> trace;  // boundary data per y node
};

enum class NearBoundary { Dirichlet, Robin };

struct Layout {
  int nx, ny;
  double hx, hy, period;
  int interface = -1;  // x index of the interface node, -1 for none
  double lambda1 = 1.0, lambda2 = 1.0;
  NearBoundary near = NearBoundary::Dirichlet;
  FarField far = FarField::Decay;
};

// Discrete |d/dy| on the periodic y grid using the continuous symbol |k w0|.
Matrix abs_dy_matrix(int ny, double period) {
  const double w0 = 2.0 * std::numbers::pi / period;
  Matrix d = Matrix::Zero(ny, ny);
  for (int j = 0; j < ny; ++j) {
    for (int m = 0; m < ny; ++m) {
      const double delta = (j - m) * period / ny;
      double sum = 0.0;
      for (int k = 1; 2 * k < ny; ++k) sum += 2.0 * k * w0 * std::cos(k * w0 * delta);
      if (ny % 2 == 0) sum += (ny / 2) * w0 * std::cos((ny / 2) * w0 * delta);
      d(j, m) = sum / ny;
    }
  }
  return d;
}

std::vector<double> solve_channel(const Layout& g, const Channel& ch, const Matrix& abs_dy) {
  using Triplet = Eigen::Triplet<double>;
  const int n = g.nx * g.ny;
  const auto idx = [&](int i, int j) { return ((j % g.ny + g.ny) % g.ny) * g.nx + i; };
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(n) * 6 + static_cast<std::size_t>(g.ny * g.ny));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double hx2 = g.hx * g.hx;
  const double hy2 = g.hy * g.hy;

  for (int j = 0; j < g.ny; ++j) {
    // x = 0 boundary row.
    const int r0 = idx(0, j);
    if (g.near == NearBoundary::Dirichlet) {
      entries.emplace_back(r0, r0, 1.0);
    } else {
      entries.emplace_back(r0, idx(0, j), ch.robin_h - 3.0 / (2.0 * g.hx));
      entries.emplace_back(r0, idx(1, j), 4.0 / (2.0 * g.hx));
      entries.emplace_back(r0, idx(2, j), -1.0 / (2.0 * g.hx));
    }
    rhs(r0) = ch.trace[static_cast<std::size_t>(j)];

    for (int i = 1; i + 1 < g.nx; ++i) {
      const int r = idx(i, j);
      if (i == g.interface) {
        // lambda1 u1'(l) = lambda2 u2'(l), one-sided from each layer.
        entries.emplace_back(r, idx(i, j), 3.0 * (g.lambda1 + g.lambda2));
        entries.emplace_back(r, idx(i - 1, j), -4.0 * g.lambda1);
        entries.emplace_back(r, idx(i - 2, j), g.lambda1);
        entries.emplace_back(r, idx(i + 1, j), -4.0 * g.lambda2);
        entries.emplace_back(r, idx(i + 2, j), g.lambda2);
        continue;
      }
      const bool far_side = g.interface >= 0 && i > g.interface;
      const double a = far_side ? ch.a_far : ch.a_near;
      const double cx = a * a / hx2;
      entries.emplace_back(r, idx(i - 1, j), cx);
      entries.emplace_back(r, idx(i + 1, j), cx);
      entries.emplace_back(r, idx(i, j - 1), 1.0 / hy2);
      entries.emplace_back(r, idx(i, j + 1), 1.0 / hy2);
      entries.emplace_back(r, idx(i, j), -2.0 * cx - 2.0 / hy2);
    }

    const int last = g.nx - 1;
    const int rl = idx(last, j);
    if (g.far == FarField::Dirichlet) {
      entries.emplace_back(rl, rl, 1.0);
    } else {
      const double a = g.interface >= 0 ? ch.a_far : ch.a_near;
      entries.emplace_back(rl, idx(last, j), 3.0 / (2.0 * g.hx));
      entries.emplace_back(rl, idx(last - 1, j), -4.0 / (2.0 * g.hx));
      entries.emplace_back(rl, idx(last - 2, j), 1.0 / (2.0 * g.hx));
      for (int m = 0; m < g.ny; ++m) entries.emplace_back(rl, idx(last, m), abs_dy(j, m) / a);
    }
  }

  Eigen::SparseMatrix<double> mat(n, n);
  mat.setFromTriplets(entries.begin(), entries.end());
  mat.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularSystem, "finite-difference matrix factorization failed");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (lu.info() != Eigen::Success || !sol.allFinite() ||
      (mat * sol - rhs).cwiseAbs().maxCoeff() > 1e-10 * scale * std::max(1.0, 1.0 / hx2)) {
    throw Error(ErrorKind::SingularSystem, "finite-difference solve did not meet its residual");
  }
  return std::vector<double>(sol.data(), sol.data() + n);
}

Layout make_layout(const BoundaryTrace& trace, const FdOptions& options) {
  if (options.nx < 5 || options.ny < 4) {
    throw Error(ErrorKind::InvalidArgument, "finite-difference grid needs nx >= 5, ny >= 4");
  }
  if (!(options.x_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "x_max must be positive");
  Layout g;
  g.nx = options.nx;
  g.ny = options.ny;
  g.period = trace_period(trace);
  g.hx = options.x_max / (options.nx - 1);
  g.hy = g.period / options.ny;
  g.far = options.far_field;
  return g;
}

void check_truncation(const BoundaryTrace& trace, const FdOptions& options, double max_coeff) {
  if (options.far_field != FarField::Dirichlet) return;
  double omega = std::numeric_limits<double>::infinity();
  for (const auto& m : trace.modes()) omega = std::min(omega, m.omega);
  const double far_value = std::exp(-omega * options.x_max / max_coeff);
  if (far_value > options.far_tol) {
    throw Error(ErrorKind::TruncationTooSmall,
                "far-field decay " + std::to_string(far_value) + " exceeds far_tol " +
                    std::to_string(options.far_tol));
  }
}

FieldGrid assemble(const Layout& g, const SharedBasis& basis,
                   const std::vector<Channel>& channels, double x_max) {
  const int n = static_cast<int>(channels.size());
  const Matrix abs_dy = g.far == FarField::Decay ? abs_dy_matrix(g.ny, g.period) : Matrix();
  std::vector<std::vector<double>> solutions;
  for (const auto& ch : channels) solutions.push_back(solve_channel(g, ch, abs_dy));

  GridSpec spec{0.0, x_max, 0.0, g.period * (g.ny - 1) / g.ny, g.nx, g.ny};
  FieldGrid out(spec, n);
  Vector w(n);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      for (int c = 0; c < n; ++c) {
        w(c) = solutions[static_cast<std::size_t>(c)][static_cast<std::size_t>(j * g.nx + i)];
      }
      out.set(i, j, basis.q * w);
    }
  }
  return out;
}

std::vector<Channel> project_trace(const SharedBasis& basis, const BoundaryTrace& trace,
                                   const Layout& g) {
  const int n = static_cast<int>(basis.q.rows());
  std::vector<Channel> channels(static_cast<std::size_t>(n));
  for (int j = 0; j < g.ny; ++j) {
    const Vector f = basis.q_inv * trace.value(j * g.hy);
    for (int c = 0; c < n; ++c) channels[static_cast<std::size_t>(c)].trace.push_back(f(c));
  }
  return channels;
}

}  // namespace

FieldGrid fd_solve(const RobinProblem& problem, const FdOptions& options) {
  validate(problem);
  Layout g = make_layout(problem.trace, options);
  g.near = NearBoundary::Robin;
  check_truncation(problem.trace, options, problem.a.max_eigenvalue());
  const SharedBasis basis = shared_eigenbasis(problem.a, problem.h);
  std::vector<Channel> channels = project_trace(basis, problem.trace, g);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    channels[c].a_near = channels[c].a_far = basis.first(static_cast<Eigen::Index>(c));
    channels[c].robin_h = basis.second(static_cast<Eigen::Index>(c));
  }
  return assemble(g, basis, channels, options.x_max);
}

FieldGrid fd_solve(const TwoLayerProblem& problem, const FdOptions& options) {
  validate(problem);
  Layout g = make_layout(problem.trace, options);
  const double node = problem.l / g.hx;
  g.interface = static_cast<int>(std::lround(node));
  if (std::abs(node - g.interface) > 1e-9 * std::max(1.0, node) || g.interface < 2 ||
      g.interface > g.nx - 3) {
    throw Error(ErrorKind::InvalidArgument,
                "interface must fall on an x node with two nodes of room on each side");
  }
  g.lambda1 = problem.lambda1;
  g.lambda2 = problem.lambda2;
  check_truncation(problem.trace, options,
                   std::max(problem.a1.max_eigenvalue(), problem.a2.max_eigenvalue()));
  const SharedBasis basis = shared_eigenbasis(problem.a1, problem.a2);
  std::vector<Channel> channels = project_trace(basis, problem.trace, g);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    channels[c].a_near = basis.first(static_cast<Eigen::Index>(c));
    channels[c].a_far = basis.second(static_cast<Eigen::Index>(c));
  }
  FieldGrid out = assemble(g, basis, channels, options.x_max);
  out.layer_boundary = problem.l;
  return out;
}

FieldGrid fd_solve(const ProblemSpec& problem, const FdOptions& options) {
  return std::visit([&](const auto& p) { return fd_solve(p, options); }, problem);
}

// ---------------------------------------------------------------------------
// Metrics

CompareMetrics compare(const FieldGrid& a, const FieldGrid& b) {
  const GridSpec& sa = a.spec();
  const GridSpec& sb = b.spec();
  const auto close = [](double u, double v) {
    return std::abs(u - v) <= 1e-12 * std::max(1.0, std::max(std::abs(u), std::abs(v)));
  };
  if (a.dim() != b.dim() || sa.nx != sb.nx || sa.ny != sb.ny || !close(sa.x0, sb.x0) ||
      !close(sa.x1, sb.x1) || !close(sa.y0, sb.y0) || !close(sa.y1, sb.y1)) {
    throw Error(ErrorKind::GridMismatch, "compared fields live on different grids");
  }
  CompareMetrics m;
  m.per_component_linf = Vector::Zero(a.dim());
  double sq = 0.0;
  for (int j = 0; j < sa.ny; ++j) {
    for (int i = 0; i < sa.nx; ++i) {
      const Vector d = (a.at(i, j) - b.at(i, j)).cwiseAbs();
      m.per_component_linf = m.per_component_linf.cwiseMax(d);
      sq += d.squaredNorm();
    }
  }
  m.linf = m.per_component_linf.maxCoeff();
  m.l2 = std::sqrt(sq * sa.hx() * sa.hy());
  return m;
}

namespace {

Vector grid_dx(const FieldGrid& f, int i, int j, int direction) {
  const double h = f.spec().hx();
  return direction * (-3.0 * f.at(i, j) + 4.0 * f.at(i + direction, j) -
                      f.at(i + 2 * direction, j)) /
         (2.0 * h);
}

}  // namespace

SolveReport residual_report(const FieldGrid& field, const RobinProblem& problem,
                            ConventionMode mode) {
  if (field.dim() != problem.a.dim() || field.nx() < 3 || std::abs(field.spec().x0) > 1e-14) {
    throw Error(ErrorKind::GridMismatch, "Robin residuals need a grid starting at x = 0, nx >= 3");
  }
  SolveReport r;
  r.pde_residual_linf = pde_residual_linf(field, problem.a.entries());
  const double sign = mode == ConventionMode::Calibrated ? 1.0 : -1.0;
  for (int j = 0; j < field.ny(); ++j) {
    const Vector lhs = problem.h.entries() * field.at(0, j) + grid_dx(field, 0, j, +1);
    const Vector gap = lhs - sign * problem.trace.value(field.y(j));
    r.boundary_residual_linf = std::max(r.boundary_residual_linf, gap.cwiseAbs().maxCoeff());
  }
  return r;
}

SolveReport residual_report(const FieldGrid& layer1, const FieldGrid& layer2,
                            const TwoLayerProblem& problem) {
  const GridSpec& s1 = layer1.spec();
  const GridSpec& s2 = layer2.spec();
  const double tol = 1e-12 * std::max(1.0, problem.l);
  if (layer1.dim() != problem.a1.dim() || layer2.dim() != problem.a1.dim() ||
      std::abs(s1.x0) > tol || std::abs(s1.x1 - problem.l) > tol ||
      std::abs(s2.x0 - problem.l) > tol || s1.ny != s2.ny || s1.y0 != s2.y0 || s1.y1 != s2.y1 ||
      s1.nx < 3 || s2.nx < 3) {
    throw Error(ErrorKind::GridMismatch, "layer grids must meet at x = l on shared y nodes");
  }
  SolveReport r;
  r.pde_residual_linf = std::max(pde_residual_linf(layer1, problem.a1.entries()),
                                 pde_residual_linf(layer2, problem.a2.entries()));
  const int last = s1.nx - 1;
  for (int j = 0; j < s1.ny; ++j) {
    const Vector rec = layer1.at(0, j) - problem.trace.value(layer1.y(j));
    const Vector jump = layer1.at(last, j) - layer2.at(0, j);
    const Vector flux = problem.lambda1 * grid_dx(layer1, last, j, -1) -
                        problem.lambda2 * grid_dx(layer2, 0, j, +1);
    r.boundary_residual_linf = std::max(r.boundary_residual_linf, rec.cwiseAbs().maxCoeff());
    r.interface_value_gap = std::max(r.interface_value_gap, jump.cwiseAbs().maxCoeff());
    r.interface_flux_gap = std::max(r.interface_flux_gap, flux.cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace transop
