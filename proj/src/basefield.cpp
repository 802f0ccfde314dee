#include "transop/basefield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "transop/quadrature.hpp"

namespace transop {

BoundaryTrace::BoundaryTrace(int dim, std::vector<TraceMode> modes,
                             std::optional<SampledTrace> samples)
    : dim_(dim), modes_(std::move(modes)) {
  if (samples) samples_ = std::make_shared<const SampledTrace>(std::move(*samples));
  if (dim_ < 1) throw Error(ErrorKind::InvalidArgument, "trace dimension must be >= 1");
  if (modes_.empty() && !samples_) {
    throw Error(ErrorKind::InvalidArgument, "trace needs modes or samples");
  }
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    auto& m = modes_[k];
    if (m.sin_amp.size() == 0) m.sin_amp = Vector::Zero(dim_);
    if (m.cos_amp.size() == 0) m.cos_amp = Vector::Zero(dim_);
    if (m.cos_amp.size() != dim_ || m.sin_amp.size() != dim_) {
      throw Error(ErrorKind::InvalidArgument, "mode amplitude has wrong dimension");
    }
    if (!(m.omega >= 0.0) || !std::isfinite(m.omega) || !m.cos_amp.allFinite() ||
        !m.sin_amp.allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "mode omega must be finite and >= 0");
    }
    if (m.omega == 0.0 && m.sin_amp.cwiseAbs().maxCoeff() != 0.0) {
      throw Error(ErrorKind::InvalidArgument, "omega = 0 mode must have zero sin amplitude");
    }
    for (std::size_t p = 0; p < k; ++p) {
      if (modes_[p].omega == m.omega) {
        throw Error(ErrorKind::InvalidArgument, "mode omegas must be distinct");
      }
    }
  }
  if (samples_) {
    const auto& s = *samples_;
    if (s.y.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
    if (s.values.rows() != dim_ || s.values.cols() != static_cast<Eigen::Index>(s.y.size())) {
      throw Error(ErrorKind::InvalidArgument, "sample values do not match the y grid");
    }
    for (std::size_t k = 1; k < s.y.size(); ++k) {
      if (!(s.y[k] > s.y[k - 1])) {
        throw Error(ErrorKind::InvalidArgument, "sample y must be strictly increasing");
      }
    }
    if (!s.values.allFinite()) throw Error(ErrorKind::InvalidArgument, "sample values not finite");
  }
}

BoundaryTrace BoundaryTrace::single_mode(double omega, const Vector& cos_amp,
                                         std::optional<Vector> sin_amp) {
  const int dim = static_cast<int>(cos_amp.size());
  return BoundaryTrace(dim, {TraceMode{omega, cos_amp, sin_amp.value_or(Vector::Zero(dim))}});
}

namespace {

Vector interpolate(const SampledTrace& s, double y) {
  if (y < s.y.front() || y > s.y.back()) return Vector::Zero(s.values.rows());
  auto it = std::upper_bound(s.y.begin(), s.y.end(), y);
  if (it == s.y.end()) return s.values.col(static_cast<Eigen::Index>(s.y.size() - 1));
  const auto hi = static_cast<std::size_t>(it - s.y.begin());
  const auto lo = hi - 1;
  const double w = (y - s.y[lo]) / (s.y[hi] - s.y[lo]);
  return (1.0 - w) * s.values.col(static_cast<Eigen::Index>(lo)) +
         w * s.values.col(static_cast<Eigen::Index>(hi));
}

}  // namespace

Vector BoundaryTrace::sampled_value(double y) const { return interpolate(*samples_, y); }

Vector BoundaryTrace::value(double y) const {
  Vector out = Vector::Zero(dim_);
  for (const auto& m : modes_) {
    out += m.cos_amp * std::cos(m.omega * y) + m.sin_amp * std::sin(m.omega * y);
  }
  if (samples_) out += sampled_value(y);
  return out;
}

double BoundaryTrace::sup_bound() const {
  double bound = 0.0;
  for (const auto& m : modes_) {
    bound += (m.cos_amp.cwiseAbs() + m.sin_amp.cwiseAbs()).maxCoeff();
  }
  if (samples_) bound += samples_->values.cwiseAbs().maxCoeff();
  return bound;
}

double BoundaryTrace::min_omega() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& m : modes_) w = std::min(w, m.omega);
  return w;
}

namespace {

Vector mode_part(const BoundaryTrace& f, double x, double y) {
  Vector out = Vector::Zero(f.dim());
  for (const auto& m : f.modes()) {
    out += std::exp(-m.omega * x) *
           (m.cos_amp * std::cos(m.omega * y) + m.sin_amp * std::sin(m.omega * y));
  }
  return out;
}

// (1/pi) int x f(t) / (x^2 + (y - t)^2) dt over the sample support, written
// in the angle t = y + x tan(theta) so the kernel becomes uniform.
BaseSample poisson_part(const BoundaryTrace& f, double x, double y,
                        const BaseFieldOptions& options) {
  const auto& s = *f.samples();
  const double lo = std::atan((s.y.front() - y) / x);
  const double hi = std::atan((s.y.back() - y) / x);
  std::vector<double> breaks;
  constexpr int kSeedPanels = 8;
  for (int k = 0; k <= kSeedPanels; ++k) breaks.push_back(lo + (hi - lo) * k / kSeedPanels);
  auto sampled = [&](double theta) { return interpolate(s, y + x * std::tan(theta)); };
  QuadratureResult r =
      integrate_adaptive(sampled, breaks, options.quad_tol * std::numbers::pi, 0.0,
                         options.max_panels);
  return BaseSample{r.value / std::numbers::pi, r.error / std::numbers::pi};
}

}  // namespace

BaseSample harmonic_extension_sample(const BoundaryTrace& f, double x, double y,
                                     const BaseFieldOptions& options) {
  if (!(x >= 0.0)) {
    throw Error(ErrorKind::EvalDomain, "harmonic extension needs x >= 0, got " + std::to_string(x));
  }
  if (x == 0.0) return BaseSample{f.value(y), 0.0};
  BaseSample out{mode_part(f, x, y), 0.0};
  if (f.samples()) {
    BaseSample p = poisson_part(f, x, y, options);
    out.value += p.value;
    out.quad_error = p.quad_error;
  }
  return out;
}

Vector harmonic_extension(const BoundaryTrace& f, double x, double y,
                          const BaseFieldOptions& options) {
  return harmonic_extension_sample(f, x, y, options).value;
}

Profile profile_at_y(const BoundaryTrace& f, double y, const BaseFieldOptions& options) {
  if (f.mode_only()) {
    return [f, y](double x) { return mode_part(f, x, y); };
  }
  return [f, y, options](double x) {
    if (x < 0.0) {
      throw Error(ErrorKind::EvalDomain,
                  "sampled trace cannot be evaluated at x = " + std::to_string(x));
    }
    return harmonic_extension(f, x, y, options);
  };
}

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidArgument, "grid needs nx, ny >= 2");
  if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(x0) || !std::isfinite(x1) ||
      !std::isfinite(y0) || !std::isfinite(y1)) {
    throw Error(ErrorKind::InvalidArgument, "grid ranges must be finite and increasing");
  }
}

FieldGrid::FieldGrid(const GridSpec& spec, int dim) : spec_(spec), dim_(dim) {
  spec_.validate();
  if (dim_ < 1) throw Error(ErrorKind::InvalidArgument, "field dimension must be >= 1");
  data_.assign(static_cast<std::size_t>(spec_.nx) * static_cast<std::size_t>(spec_.ny) *
                   static_cast<std::size_t>(dim_),
               0.0);
}

std::size_t FieldGrid::offset(int i, int j) const {
  return (static_cast<std::size_t>(j) * static_cast<std::size_t>(spec_.nx) +
          static_cast<std::size_t>(i)) *
         static_cast<std::size_t>(dim_);
}

Vector FieldGrid::at(int i, int j) const {
  return Eigen::Map<const Vector>(data_.data() + offset(i, j), dim_);
}

void FieldGrid::set(int i, int j, const Vector& value) {
  if (value.size() != dim_) throw Error(ErrorKind::DimMismatch, "grid value has wrong dimension");
  if (!value.allFinite()) {
    throw Error(ErrorKind::Overflow, "non-finite field value at x = " + std::to_string(x(i)) +
                                         ", y = " + std::to_string(y(j)));
  }
  Eigen::Map<Vector>(data_.data() + offset(i, j), dim_) = value;
}

FieldGrid fill_grid(const GridSpec& spec, int dim,
                    const std::function<Vector(double, double)>& field) {
  FieldGrid grid(spec, dim);
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) grid.set(i, j, field(spec.x(i), spec.y(j)));
  }
  return grid;
}

FieldGrid evaluate_on_grid(const BoundaryTrace& f, const GridSpec& spec,
                           const BaseFieldOptions& options) {
  return fill_grid(spec, f.dim(),
                   [&](double x, double y) { return harmonic_extension(f, x, y, options); });
}

double pde_residual_linf(const FieldGrid& field, const Matrix& a) {
  if (a.rows() != field.dim() || a.cols() != field.dim()) {
    throw Error(ErrorKind::DimMismatch, "coefficient matrix does not match field");
  }
  const Matrix a2 = a * a;
  const double hx2 = field.spec().hx() * field.spec().hx();
  const double hy2 = field.spec().hy() * field.spec().hy();
  double worst = 0.0;
  for (int j = 1; j + 1 < field.ny(); ++j) {
    for (int i = 1; i + 1 < field.nx(); ++i) {
      const Vector c = field.at(i, j);
      const Vector uxx = (field.at(i + 1, j) - 2.0 * c + field.at(i - 1, j)) / hx2;
      const Vector uyy = (field.at(i, j + 1) - 2.0 * c + field.at(i, j - 1)) / hy2;
      worst = std::max(worst, (uyy + a2 * uxx).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace transop
