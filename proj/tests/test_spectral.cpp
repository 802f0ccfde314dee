#include <doctest.h>

#include <cmath>
#include <random>

#include "transop/spectral.hpp"

using namespace transop;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Truncated Taylor series, independent of the eigendecomposition.
Matrix power_series_exp(const Matrix& a, int terms = 30) {
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * a / k;
    sum += term;
  }
  return sum;
}

// Random matrix with a prescribed real spectrum and a well-conditioned basis.
Matrix random_diagonalizable(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ev(lo, hi);
  Matrix q = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) += 0.3 * u(rng);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = ev(rng);
  return q * d.asDiagonal() * q.inverse();
}

}  // namespace

TEST_CASE("eigendecompose: identity and diagonal inputs") {
  const SpectralMatrix id = eigendecompose(Matrix::Identity(2, 2));
  CHECK(id.eigenvalues()(0) == doctest::Approx(1.0));
  CHECK(id.eigenvalues()(1) == doctest::Approx(1.0));
  CHECK((id.eigvecs() - Matrix::Identity(2, 2)).norm() < 1e-12);

  const SpectralMatrix d = eigendecompose(m2(4, 0, 0, 1));
  CHECK(d.eigenvalues()(0) == doctest::Approx(1.0));
  CHECK(d.eigenvalues()(1) == doctest::Approx(4.0));
}

TEST_CASE("eigendecompose: symmetric 2x2 against the characteristic polynomial") {
  const Matrix a = m2(2, 1, 1, 2);
  // Roots of s^2 - tr s + det.
  const double tr = a.trace(), det = a.determinant();
  const double disc = std::sqrt(tr * tr / 4 - det);
  const SpectralMatrix m = eigendecompose(a);
  CHECK(m.eigenvalues()(0) == doctest::Approx(tr / 2 - disc).epsilon(1e-14));
  CHECK(m.eigenvalues()(1) == doctest::Approx(tr / 2 + disc).epsilon(1e-14));
  const Vector v0 = m.eigvecs().col(0), v1 = m.eigvecs().col(1);
  CHECK(std::abs(v0(0) + v0(1)) < 1e-12);
  CHECK(std::abs(v1(0) - v1(1)) < 1e-12);
  CHECK((m.eigvecs() * m.eigenvalues().asDiagonal() * m.eigvecs_inv() - a).norm() < 1e-12);
}

TEST_CASE("eigendecompose: nonsymmetric input uses the general path") {
  const Matrix a = m2(1, 1, 0, 2);
  const SpectralMatrix m = eigendecompose(a);
  CHECK(m.eigenvalues()(0) == doctest::Approx(1.0));
  CHECK(m.eigenvalues()(1) == doctest::Approx(2.0));
  CHECK((m.eigvecs() * m.eigvecs_inv() - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("eigendecompose: failures") {
  auto kind_of = [](const Matrix& a) {
    try {
      eigendecompose(a);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind_of(m2(0, 1, 0, 0)) == ErrorKind::DefectiveMatrix);
  CHECK(kind_of(m2(1, 1, 0, 1)) == ErrorKind::DefectiveMatrix);
  CHECK(kind_of(m2(0, -1, 1, 0)) == ErrorKind::ComplexSpectrum);
  CHECK(kind_of(Matrix(2, 3)) == ErrorKind::DimMismatch);
  ErrorKind capped = ErrorKind::InvalidArgument;
  try {
    eigendecompose(m2(1, 1, 0, 1.001), kDefaultEigenTol, 100.0);
  } catch (const Error& e) {
    capped = e.kind();
  }
  CHECK(capped == ErrorKind::IllConditionedEigvecs);
}

TEST_CASE("eigendecompose: ties keep their original column order") {
  const SpectralMatrix m = eigendecompose(m2(3, 0, 0, 3));
  CHECK(std::abs(m.eigvecs()(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(m.eigvecs()(1, 1)) == doctest::Approx(1.0));
  const SpectralMatrix again = eigendecompose(m2(3, 0, 0, 3));
  CHECK((again.eigvecs() - m.eigvecs()).norm() == 0.0);
}

TEST_CASE("eigendecompose: reconstruction over random matrices") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    const Matrix a = random_diagonalizable(rng, n, -5.0, 5.0);
    const SpectralMatrix m = eigendecompose(a);
    const double scale = std::max(1.0, a.norm());
    CHECK((m.eigvecs() * m.eigenvalues().asDiagonal() * m.eigvecs_inv() - a).norm() <=
          1e-10 * scale);
    CHECK((m.eigvecs() * m.eigvecs_inv() - Matrix::Identity(n, n)).norm() <= 1e-10 * n);
    for (int i = 1; i < n; ++i) CHECK(m.eigenvalues()(i - 1) <= m.eigenvalues()(i));
    CHECK(m.cond_q() <= kDefaultCondCap);
  }
}

TEST_CASE("projectors sum to the identity and reproduce the matrix") {
  const SpectralMatrix m = eigendecompose(m2(2, 1, 1, 2));
  Matrix sum = Matrix::Zero(2, 2), weighted = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    sum += m.projector(i);
    weighted += m.eigenvalues()(i) * m.projector(i);
    CHECK((m.projector(i) * m.projector(i) - m.projector(i)).norm() < 1e-12);
  }
  CHECK((sum - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((weighted - m.entries()).norm() < 1e-12);
}

TEST_CASE("spectrum_in_halfplane") {
  CHECK(spectrum_in_halfplane(eigendecompose(m2(1, 0, 0, 4)), HalfPlane::Right));
  CHECK(spectrum_in_halfplane(eigendecompose(m2(-1, 0, 0, -3)), HalfPlane::Left));
  CHECK_FALSE(spectrum_in_halfplane(eigendecompose(m2(1, 0, 0, -1)), HalfPlane::Right));
  CHECK_FALSE(spectrum_in_halfplane(eigendecompose(m2(1, 0, 0, -1)), HalfPlane::Left));
  CHECK_FALSE(spectrum_in_halfplane(eigendecompose(m2(0, 0, 0, 1)), HalfPlane::Right));
  CHECK_FALSE(spectrum_in_halfplane(eigendecompose(m2(0, 0, 0, -1)), HalfPlane::Left));
}

TEST_CASE("matrix_exp against the power series and closed forms") {
  const SpectralMatrix d = eigendecompose(m2(1, 0, 0, 2));
  CHECK((matrix_exp(d, 0.0) - Matrix::Identity(2, 2)).norm() < 1e-15);
  const Matrix e = matrix_exp(d, 1.0);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-15);

  const Matrix a = m2(2, 1, 1, 2);
  const Matrix ref = power_series_exp(a, 40);
  CHECK((matrix_exp(eigendecompose(a), 1.0) - ref).norm() <= 1e-12 * ref.norm());

  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4;
    Matrix b = random_diagonalizable(rng, n, -2.0, 2.0);
    const double t = 1.0 / std::max(1.0, b.norm());
    const SpectralMatrix m = eigendecompose(b);
    CHECK((matrix_exp(m, t) - power_series_exp(b * t)).norm() <= 1e-12 * std::max(1.0, b.norm()));
  }
  CHECK_THROWS_AS(matrix_exp(d, 400.0), Error);
}

TEST_CASE("matrix_exp semigroup property") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> st(-10.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4;
    const SpectralMatrix m = eigendecompose(random_diagonalizable(rng, n, -1.0, 1.0));
    const double s = st(rng), t = st(rng);
    const Matrix lhs = matrix_exp(m, s + t);
    const Matrix rhs = matrix_exp(m, s) * matrix_exp(m, t);
    CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, lhs.norm()));
  }
}

TEST_CASE("apply_scalar_fn: examples and homomorphism") {
  const SpectralMatrix a = eigendecompose(m2(2, 1, 1, 2));
  CHECK((apply_scalar_fn(a, [](double s) { return s; }) - a.entries()).norm() < 1e-12);
  CHECK((apply_scalar_fn(a, [](double) { return 1.0; }) - Matrix::Identity(2, 2)).norm() < 1e-12);
  const Matrix inv = apply_scalar_fn(eigendecompose(m2(2, 0, 0, 4)), [](double s) { return 1 / s; });
  CHECK(inv(0, 0) == doctest::Approx(0.5));
  CHECK(inv(1, 1) == doctest::Approx(0.25));
  CHECK_THROWS_AS(apply_scalar_fn(eigendecompose(m2(0, 0, 0, 1)),
                                  [](double s) { return std::log(s); }),
                  Error);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4;
    const SpectralMatrix m = eigendecompose(random_diagonalizable(rng, n, -1.5, 1.5));
    const double p0 = c(rng), p1 = c(rng), p2 = c(rng), q0 = c(rng), q1 = c(rng);
    auto g1 = [=](double s) { return p0 + p1 * s + p2 * s * s; };
    auto g2 = [=](double s) { return q0 + q1 * s; };
    const Matrix prod = apply_scalar_fn(m, [&](double s) { return g1(s) * g2(s); });
    CHECK((prod - apply_scalar_fn(m, g1) * apply_scalar_fn(m, g2)).norm() < 1e-9);
    const double t = c(rng);
    CHECK((apply_scalar_fn(m, [t](double s) { return std::exp(t * s); }) - matrix_exp(m, t)).norm() <
          1e-11);
  }
}

TEST_CASE("commutator_norm") {
  CHECK(commutator_norm(eigendecompose(m2(1, 0, 0, 2)), eigendecompose(m2(-1, 0, 0, -3))) == 0.0);
  CHECK(commutator_norm(eigendecompose(m2(2, 1, 1, 2)), eigendecompose(-Matrix::Identity(2, 2))) <
        1e-15);
  const Matrix a = m2(1, 1, 0, 2), h = m2(1, 0, 0, 3);
  CHECK(commutator_norm(eigendecompose(a), eigendecompose(h)) ==
        doctest::Approx((a * h - h * a).norm()));
  CHECK_THROWS_AS(commutator_norm(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
}

TEST_CASE("shared_eigenbasis diagonalizes commuting pairs") {
  const SpectralMatrix a = eigendecompose(m2(2, 1, 1, 2));
  const SpectralMatrix b = eigendecompose(m2(5, -1, -1, 5));
  const SharedBasis basis = shared_eigenbasis(a, b);
  CHECK((basis.q * basis.first.asDiagonal() * basis.q_inv - a.entries()).norm() < 1e-10);
  CHECK((basis.q * basis.second.asDiagonal() * basis.q_inv - b.entries()).norm() < 1e-10);
  CHECK_THROWS_AS(shared_eigenbasis(eigendecompose(m2(1, 1, 0, 2)), eigendecompose(m2(1, 0, 0, 3))),
                  Error);
  // Repeated eigenvalues of a are split by b.
  const SharedBasis split =
      shared_eigenbasis(eigendecompose(Matrix::Identity(2, 2)), eigendecompose(m2(2, 1, 1, 2)));
  CHECK((split.q * split.second.asDiagonal() * split.q_inv - m2(2, 1, 1, 2)).norm() < 1e-10);
}

TEST_CASE("spectral_radius") {
  CHECK(spectral_radius(m2(0.2, 0, 0, -0.5)) == doctest::Approx(0.5));
  CHECK(spectral_radius(m2(0, -1, 1, 0)) == doctest::Approx(1.0));
}
