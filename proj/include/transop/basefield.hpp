#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "transop/error.hpp"
#include "transop/opalgebra.hpp"
#include "transop/types.hpp"

namespace transop {

/// cos_amp * cos(omega y) + sin_amp * sin(omega y).
struct TraceMode {
  double omega = 0.0;
  Vector cos_amp;
  Vector sin_amp;
};

/// Piecewise-linear boundary profile; zero outside [y.front(), y.back()].
struct SampledTrace {
  std::vector<double> y;
  Matrix values;  ///< dim x y.size(), one column per sample
};

/// Vector boundary datum f(y) of the half-plane problems: a sum of
/// trigonometric modes and/or a sampled profile.
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  /// Throws InvalidArgument when the invariants (non-empty, distinct
  /// non-negative omegas, sin_amp = 0 at omega = 0, matching dims) fail.
  BoundaryTrace(int dim, std::vector<TraceMode> modes, std::optional<SampledTrace> samples = {});

  static BoundaryTrace single_mode(double omega, const Vector& cos_amp,
                                   std::optional<Vector> sin_amp = {});

  int dim() const noexcept { return dim_; }
  const std::vector<TraceMode>& modes() const noexcept { return modes_; }
  /// Null for mode-only traces. Shared between copies of the trace.
  const SampledTrace* samples() const noexcept { return samples_.get(); }
  bool mode_only() const noexcept { return !samples_; }

  /// f(y).
  Vector value(double y) const;

  /// Upper bound on max_y |f(y)|_inf.
  double sup_bound() const;

  /// Smallest omega among modes; +inf when there are none.
  double min_omega() const;

 private:
  Vector sampled_value(double y) const;

  int dim_ = 0;
  std::vector<TraceMode> modes_;
  std::shared_ptr<const SampledTrace> samples_;
};

struct BaseFieldOptions {
  double quad_tol = 1e-9;
  int max_panels = 20000;
};

struct BaseSample {
  Vector value;
  double quad_error = 0.0;
};

/// Bounded harmonic extension of f into x >= 0. Modes decay as
/// exp(-omega x); samples go through the half-plane Poisson integral over
/// their support. Throws EvalDomain for x < 0, QuadratureFailure.
Vector harmonic_extension(const BoundaryTrace& f, double x, double y,
                          const BaseFieldOptions& options = {});
BaseSample harmonic_extension_sample(const BoundaryTrace& f, double x, double y,
                                     const BaseFieldOptions& options = {});

/// x -> u~(x, y) at fixed y. Mode-only traces continue analytically to
/// x < 0; sampled traces raise EvalDomain there.
Profile profile_at_y(const BoundaryTrace& f, double y, const BaseFieldOptions& options = {});

/// Uniform rectangular node layout.
struct GridSpec {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  int nx = 2, ny = 2;

  double hx() const { return (x1 - x0) / (nx - 1); }
  double hy() const { return (y1 - y0) / (ny - 1); }
  double x(int i) const { return i == nx - 1 ? x1 : x0 + i * hx(); }
  double y(int j) const { return j == ny - 1 ? y1 : y0 + j * hy(); }

  /// Throws InvalidArgument.
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// n-component field sampled on a GridSpec. Storage is y-major:
/// ((j * nx) + i) * dim + component.
class FieldGrid {
 public:
  FieldGrid() = default;
  FieldGrid(const GridSpec& spec, int dim);

  const GridSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return dim_; }
  int nx() const noexcept { return spec_.nx; }
  int ny() const noexcept { return spec_.ny; }
  double x(int i) const { return spec_.x(i); }
  double y(int j) const { return spec_.y(j); }

  Vector at(int i, int j) const;
  /// Throws Overflow for non-finite values.
  void set(int i, int j, const Vector& value);

  std::optional<double> layer_boundary;

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t offset(int i, int j) const;

  GridSpec spec_;
  int dim_ = 0;
  std::vector<double> data_;
};

FieldGrid fill_grid(const GridSpec& spec, int dim,
                    const std::function<Vector(double, double)>& field);

FieldGrid evaluate_on_grid(const BoundaryTrace& f, const GridSpec& spec,
                           const BaseFieldOptions& options = {});

/// max over interior nodes of |u_yy + a^2 u_xx|_inf with 5-point stencils.
double pde_residual_linf(const FieldGrid& field, const Matrix& a);

}  // namespace transop
