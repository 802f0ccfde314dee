#include "transop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace transop {

namespace {

// Unit columns with the largest-magnitude entry positive, so repeated runs
// produce identical Q.
void normalize_columns(Matrix& q) {
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const double norm = q.col(c).norm();
    if (norm > 0.0) q.col(c) /= norm;
    Eigen::Index arg = 0;
    q.col(c).cwiseAbs().maxCoeff(&arg);
    if (q(arg, c) < 0.0) q.col(c) = -q.col(c);
  }
}

}  // namespace

Matrix SpectralMatrix::projector(int i) const {
  return eigvecs_.col(i) * eigvecs_inv_.row(i);
}

SpectralMatrix eigendecompose(const Matrix& matrix, double tol, double cond_cap) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::DimMismatch, "eigendecompose needs a non-empty square matrix");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
  }
  const Eigen::Index n = matrix.rows();
  const double scale = std::max(1.0, matrix.norm());

  Vector values(n);
  Matrix vectors(n, n);
  const bool symmetric = (matrix - matrix.transpose()).norm() <= 1e-14 * scale;
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::DefectiveMatrix, "symmetric eigensolver did not converge");
    }
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  } else {
    Eigen::EigenSolver<Matrix> solver(matrix, true);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::DefectiveMatrix, "eigensolver did not converge");
    }
    const auto& complex_values = solver.eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto z = complex_values(i);
      if (std::abs(z.imag()) > tol * (1.0 + std::abs(z))) {
        throw Error(ErrorKind::ComplexSpectrum,
                    "eigenvalue " + std::to_string(z.real()) + (z.imag() < 0 ? "-" : "+") +
                        std::to_string(std::abs(z.imag())) + "i is not real");
      }
      values(i) = z.real();
    }
    vectors = solver.eigenvectors().real();
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return values(l) < values(r); });

  SpectralMatrix out;
  out.entries_ = matrix;
  out.eigenvalues_.resize(n);
  out.eigvecs_.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues_(k) = values(order[static_cast<std::size_t>(k)]);
    out.eigvecs_.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  normalize_columns(out.eigvecs_);

  Eigen::JacobiSVD<Matrix> svd(out.eigvecs_);
  const Vector& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(n - 1);
  if (!(smin > tol * smax)) {
    throw Error(ErrorKind::DefectiveMatrix, "fewer than n independent eigenvectors");
  }
  out.cond_q_ = smax / smin;
  if (out.cond_q_ > cond_cap) {
    throw Error(ErrorKind::IllConditionedEigvecs,
                "eigenvector condition " + std::to_string(out.cond_q_) + " exceeds cap");
  }
  out.eigvecs_inv_ = symmetric ? Matrix(out.eigvecs_.transpose())
                               : Matrix(out.eigvecs_.fullPivLu().inverse());

  const Matrix rebuilt = out.eigvecs_ * out.eigenvalues_.asDiagonal() * out.eigvecs_inv_;
  if ((rebuilt - matrix).norm() > 1e-10 * scale) {
    throw Error(ErrorKind::DefectiveMatrix, "eigendecomposition does not reconstruct the matrix");
  }
  if ((out.eigvecs_ * out.eigvecs_inv_ - Matrix::Identity(n, n)).norm() >
      1e-10 * static_cast<double>(n)) {
    throw Error(ErrorKind::IllConditionedEigvecs, "eigenvector inverse is inaccurate");
  }
  return out;
}

SpectralMatrix scalar_spectral(double value) {
  return eigendecompose(Matrix::Constant(1, 1, value));
}

bool spectrum_in_halfplane(const SpectralMatrix& m, HalfPlane side) {
  const Vector& ev = m.eigenvalues();
  if (side == HalfPlane::Right) return (ev.array() > 0.0).all();
  return (ev.array() < 0.0).all();
}

Matrix matrix_exp(const SpectralMatrix& m, double t) {
  const Vector scaled = m.eigenvalues() * t;
  if (scaled.maxCoeff() > 700.0) {
    throw Error(ErrorKind::Overflow, "exp argument " + std::to_string(scaled.maxCoeff()) +
                                         " exceeds 700");
  }
  return m.eigvecs() * scaled.array().exp().matrix().asDiagonal() * m.eigvecs_inv();
}

Matrix apply_scalar_fn(const SpectralMatrix& m, const std::function<double(double)>& g) {
  const Vector& ev = m.eigenvalues();
  Vector weights(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    weights(i) = g(ev(i));
    if (!std::isfinite(weights(i))) {
      throw Error(ErrorKind::EvalDomain,
                  "function undefined at eigenvalue " + std::to_string(ev(i)));
    }
  }
  return m.eigvecs() * weights.asDiagonal() * m.eigvecs_inv();
}

double commutator_norm(const Matrix& a, const Matrix& h) {
  if (a.rows() != h.rows() || a.cols() != h.cols() || a.rows() != a.cols()) {
    throw Error(ErrorKind::DimMismatch, "commutator needs square matrices of equal size");
  }
  return (a * h - h * a).norm();
}

double commutator_norm(const SpectralMatrix& a, const SpectralMatrix& h) {
  return commutator_norm(a.entries(), h.entries());
}

SharedBasis shared_eigenbasis(const SpectralMatrix& a, const SpectralMatrix& b, double tol) {
  const Matrix& am = a.entries();
  const Matrix& bm = b.entries();
  const double scale = (1.0 + am.norm()) * (1.0 + bm.norm());
  if (commutator_norm(am, bm) > tol * scale) {
    throw Error(ErrorKind::SharedBasisRequired, "matrices do not commute");
  }
  // A generic combination separates joint eigenspaces of a commuting pair.
  const double t = 0.5772156649015329 * (1.0 + am.norm()) / (1.0 + bm.norm());
  SpectralMatrix combined;
  try {
    combined = eigendecompose(am + t * bm);
  } catch (const Error& e) {
    throw Error(ErrorKind::SharedBasisRequired, std::string("no joint eigenbasis: ") + e.what());
  }
  SharedBasis out{combined.eigvecs(), combined.eigvecs_inv(), {}, {}};
  const Matrix da = out.q_inv * am * out.q;
  const Matrix db = out.q_inv * bm * out.q;
  const auto off_diagonal = [](const Matrix& d) {
    return (d - Matrix(d.diagonal().asDiagonal())).norm();
  };
  if (off_diagonal(da) > tol * scale || off_diagonal(db) > tol * scale) {
    throw Error(ErrorKind::SharedBasisRequired, "joint eigenbasis does not diagonalize both");
  }
  out.first = da.diagonal();
  out.second = db.diagonal();
  return out;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace transop
