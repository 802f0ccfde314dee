#include "transop/opalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace transop {

namespace {

constexpr double kKeyTol = 1e-12;

bool same_key(double a, double b) {
  return std::abs(a - b) <= kKeyTol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

void require_same_dim(const TermSumOperator& a, const TermSumOperator& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch, "operator dimensions " + std::to_string(a.dim()) +
                                            " and " + std::to_string(b.dim()) + " differ");
  }
}

void require_nonzero_spectrum(const SpectralMatrix& a) {
  const double floor = 1e-12 * std::max(1.0, a.entries().norm());
  if ((a.eigenvalues().array().abs() <= floor).any()) {
    throw Error(ErrorKind::ZeroEigenvalue, "coefficient matrix has a zero eigenvalue");
  }
}

}  // namespace

TermSumOperator::TermSumOperator(int dim, std::vector<OperatorTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.weight.rows() != dim_ || t.weight.cols() != dim_) {
      throw Error(ErrorKind::DimMismatch, "term weight does not match operator dimension");
    }
    if (t.arg_scale == 0.0) {
      throw Error(ErrorKind::InvalidArgument, "term argument scale must be nonzero");
    }
  }
}

TermSumOperator TermSumOperator::identity(int dim) {
  return TermSumOperator(dim, {OperatorTerm{Matrix::Identity(dim, dim), 1.0, 0.0}});
}

TermSumOperator TermSumOperator::zero(int dim) { return TermSumOperator(dim, {}); }

double TermSumOperator::weight_norm() const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.weight.norm();
  return sum;
}

TermSumOperator TermSumOperator::operator+(const TermSumOperator& other) const {
  require_same_dim(*this, other);
  std::vector<OperatorTerm> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return TermSumOperator(dim_, std::move(terms));
}

TermSumOperator TermSumOperator::operator-(const TermSumOperator& other) const {
  return *this + other.scaled(-1.0);
}

TermSumOperator TermSumOperator::scaled(double factor) const {
  std::vector<OperatorTerm> terms = terms_;
  for (auto& t : terms) t.weight *= factor;
  return TermSumOperator(dim_, std::move(terms));
}

TermSumOperator shift_op(const SpectralMatrix& a, double l) {
  require_nonzero_spectrum(a);
  std::vector<OperatorTerm> terms;
  for (int i = 0; i < a.dim(); ++i) {
    terms.push_back({a.projector(i), 1.0, l / a.eigenvalues()(i)});
  }
  return TermSumOperator(a.dim(), std::move(terms));
}

TermSumOperator contraction_op(const Matrix& chi) {
  if (chi.rows() != chi.cols()) {
    throw Error(ErrorKind::DimMismatch, "contraction matrix must be square");
  }
  return TermSumOperator(static_cast<int>(chi.rows()), {OperatorTerm{chi, 1.0, 0.0}});
}

TermSumOperator reflection_op(double l, int dim) {
  if (!(l > 0.0)) throw Error(ErrorKind::InvalidArgument, "reflection abscissa must be positive");
  return TermSumOperator(dim, {OperatorTerm{Matrix::Identity(dim, dim), -1.0, 2.0 * l}});
}

TermSumOperator scaling_op(const SpectralMatrix& a, double l) {
  require_nonzero_spectrum(a);
  std::vector<OperatorTerm> terms;
  for (int i = 0; i < a.dim(); ++i) {
    const double inv = 1.0 / a.eigenvalues()(i);
    terms.push_back({a.projector(i), inv, -inv * l});
  }
  return TermSumOperator(a.dim(), std::move(terms));
}

TermSumOperator compose(const TermSumOperator& outer, const TermSumOperator& inner) {
  require_same_dim(outer, inner);
  std::vector<OperatorTerm> terms;
  terms.reserve(outer.size() * inner.size());
  // M f_B(alpha x + beta) with f_B(s) = N f(gamma s + delta).
  for (const auto& m : outer.terms()) {
    for (const auto& n : inner.terms()) {
      terms.push_back({m.weight * n.weight, n.arg_scale * m.arg_scale,
                       n.arg_scale * m.arg_shift + n.arg_shift});
    }
  }
  return TermSumOperator(outer.dim(), std::move(terms));
}

TermSumOperator merge_prune(const TermSumOperator& op, double prune_tol) {
  std::vector<OperatorTerm> groups;
  for (const auto& t : op.terms()) {
    auto hit = std::find_if(groups.begin(), groups.end(), [&](const OperatorTerm& g) {
      return same_key(g.arg_scale, t.arg_scale) && same_key(g.arg_shift, t.arg_shift);
    });
    if (hit == groups.end()) {
      groups.push_back(t);
    } else {
      hit->weight += t.weight;
    }
  }
  std::erase_if(groups, [&](const OperatorTerm& g) { return g.weight.norm() <= prune_tol; });
  std::stable_sort(groups.begin(), groups.end(), [](const OperatorTerm& l, const OperatorTerm& r) {
    if (l.arg_scale != r.arg_scale) return l.arg_scale < r.arg_scale;
    return l.arg_shift < r.arg_shift;
  });
  return TermSumOperator(op.dim(), std::move(groups));
}

Vector apply(const TermSumOperator& op, const Profile& f, double x) {
  Vector out = Vector::Zero(op.dim());
  for (const auto& t : op.terms()) {
    const Vector value = f(t.arg_scale * x + t.arg_shift);
    if (value.size() != op.dim()) {
      throw Error(ErrorKind::DimMismatch, "profile value has wrong dimension");
    }
    out.noalias() += t.weight * value;
  }
  return out;
}

ImageSeries image_series(const SpectralMatrix& a1, const SpectralMatrix& a2,
                               const Matrix& chi, double l, const ImageSeriesOptions& options) {
  if (a1.dim() != a2.dim() || chi.rows() != a1.dim() || chi.cols() != a1.dim()) {
    throw Error(ErrorKind::DimMismatch, "series inputs must share one dimension");
  }
  if (options.j_max < 0) throw Error(ErrorKind::InvalidArgument, "j_max must be >= 0");
  const int n = a1.dim();
  const double prune = options.prune_tol;

  const TermSumOperator shift = shift_op(a1, l);
  const TermSumOperator contract = contraction_op(chi);
  const TermSumOperator reflect = reflection_op(l, n);
  const TermSumOperator scale1 = scaling_op(a1, l);
  const TermSumOperator scale2 = scaling_op(a2, l);

  const TermSumOperator head1 =
      merge_prune(scale1 - compose(reflect, compose(scale1, contract)), prune);
  const TermSumOperator head2 = merge_prune(scale2 - compose(scale2, contract), prune);
  const TermSumOperator bounce = merge_prune(compose(shift, compose(contract, shift)), prune);

  ImageSeries out{TermSumOperator::zero(n), TermSumOperator::zero(n), 0, 0.0, false};
  TermSumOperator tail = merge_prune(shift, prune);  // T (T U T)^j
  double decay = 1.0;
  for (int j = 0; j <= options.j_max; ++j) {
    const TermSumOperator order1 = merge_prune(compose(head1, tail), prune);
    const TermSumOperator order2 = merge_prune(compose(head2, tail), prune);
    out.layer1 = merge_prune(out.layer1 + order1, prune);
    out.layer2 = merge_prune(out.layer2 + order2, prune);
    out.orders_used = j + 1;
    out.last_term_norm = (order1.weight_norm() + order2.weight_norm()) * decay;
    if (j >= 1 && out.last_term_norm < options.series_tol) {
      out.converged = true;
      break;
    }
    if (j == options.j_max) break;
    tail = merge_prune(compose(tail, bounce), prune);
    decay *= options.attenuation;
  }
  if (!out.converged) out.converged = out.last_term_norm < options.series_tol;
  return out;
}

}  // namespace transop
