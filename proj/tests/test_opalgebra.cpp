#include <doctest.h>

#include <cmath>
#include <random>

#include "transop/opalgebra.hpp"

using namespace transop;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Profile smooth_profile(int dim, double phase = 0.0) {
  return [dim, phase](double x) {
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = std::sin((k + 1) * 0.7 * x + phase + k) + 0.1 * x;
    return v;
  };
}

TermSumOperator random_operator(std::mt19937& rng, int dim, int count) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<OperatorTerm> terms;
  for (int t = 0; t < count; ++t) {
    Matrix w(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) w(i, j) = u(rng);
    double alpha = u(rng);
    if (std::abs(alpha) < 0.1) alpha = 0.5;
    terms.push_back({w, alpha, 2.0 * u(rng)});
  }
  return TermSumOperator(dim, terms);
}

bool same_terms(const TermSumOperator& a, const TermSumOperator& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& s = a.terms()[i];
    const auto& t = b.terms()[i];
    if (std::abs(s.arg_scale - t.arg_scale) > tol || std::abs(s.arg_shift - t.arg_shift) > tol ||
        (s.weight - t.weight).cwiseAbs().maxCoeff() > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("term construction validates dimensions and scale") {
  CHECK_THROWS_AS(TermSumOperator(2, {{Matrix::Identity(3, 3), 1.0, 0.0}}), Error);
  CHECK_THROWS_AS(TermSumOperator(1, {{Matrix::Identity(1, 1), 0.0, 0.0}}), Error);
  CHECK(TermSumOperator::identity(3).size() == 1);
  CHECK(TermSumOperator::zero(3).size() == 0);
}

TEST_CASE("shift_op") {
  const TermSumOperator s = shift_op(scalar_spectral(2.0), 1.0);
  REQUIRE(s.size() == 1);
  CHECK(s.terms()[0].weight(0, 0) == doctest::Approx(1.0));
  CHECK(s.terms()[0].arg_scale == 1.0);
  CHECK(s.terms()[0].arg_shift == doctest::Approx(0.5));

  const TermSumOperator d = shift_op(eigendecompose(diag2(1, 2)), 1.0);
  REQUIRE(d.size() == 2);
  CHECK((d.terms()[0].weight - diag2(1, 0)).norm() < 1e-14);
  CHECK(d.terms()[0].arg_shift == doctest::Approx(1.0));
  CHECK((d.terms()[1].weight - diag2(0, 1)).norm() < 1e-14);
  CHECK(d.terms()[1].arg_shift == doctest::Approx(0.5));

  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const TermSumOperator p = shift_op(eigendecompose(a), 1.0);
  REQUIRE(p.size() == 2);
  CHECK((p.terms()[0].weight + p.terms()[1].weight - Matrix::Identity(2, 2)).norm() < 1e-12);
  Eigen::FullPivLU<Matrix> lu(p.terms()[0].weight);
  CHECK(lu.rank() == 1);

  CHECK_THROWS_AS(shift_op(eigendecompose(diag2(0, 1)), 1.0), Error);

  const TermSumOperator unit = shift_op(scalar_spectral(1.0), 1.0);
  CHECK(apply(unit, [](double x) { return Vector::Constant(1, x); }, 0.25)(0) ==
        doctest::Approx(1.25));
}

TEST_CASE("contraction_op and reflection_op") {
  const Profile f = smooth_profile(2);
  CHECK((apply(contraction_op(Matrix::Identity(2, 2)), f, 0.4) - f(0.4)).norm() < 1e-15);
  CHECK(apply(contraction_op(Matrix::Zero(2, 2)), f, 0.4).norm() == 0.0);
  const TermSumOperator c = contraction_op(Matrix::Constant(1, 1, 0.2));
  CHECK(c.terms()[0].weight(0, 0) == 0.2);

  const TermSumOperator s = reflection_op(1.0, 2);
  CHECK((apply(s, f, 0.3) - f(1.7)).norm() < 1e-15);
  CHECK((apply(s, f, 1.0) - f(1.0)).norm() < 1e-15);
  const TermSumOperator ss = merge_prune(compose(s, s), 0.0);
  CHECK(same_terms(ss, TermSumOperator::identity(2), 1e-14));
}

TEST_CASE("scaling_op") {
  const TermSumOperator s = scaling_op(scalar_spectral(2.0), 1.0);
  CHECK(s.terms()[0].arg_scale == doctest::Approx(0.5));
  CHECK(s.terms()[0].arg_shift == doctest::Approx(-0.5));
  CHECK(same_terms(merge_prune(scaling_op(eigendecompose(Matrix::Identity(2, 2)), 0.0), 0.0),
                   TermSumOperator::identity(2), 1e-14));
  const TermSumOperator d = scaling_op(eigendecompose(diag2(1, 2)), 1.0);
  REQUIRE(d.size() == 2);
  CHECK(d.terms()[0].arg_scale == doctest::Approx(1.0));
  CHECK(d.terms()[0].arg_shift == doctest::Approx(-1.0));
  CHECK(d.terms()[1].arg_scale == doctest::Approx(0.5));
  CHECK(d.terms()[1].arg_shift == doctest::Approx(-0.5));
  CHECK_THROWS_AS(scaling_op(eigendecompose(diag2(1e-14, 1)), 1.0), Error);
}

TEST_CASE("compose: closed form examples") {
  std::mt19937 rng(1);
  const TermSumOperator b = random_operator(rng, 2, 3);
  CHECK(same_terms(compose(TermSumOperator::identity(2), b), b, 0.0));

  const TermSumOperator half = shift_op(scalar_spectral(2.0), 1.0);
  const TermSumOperator one = compose(half, half);
  REQUIRE(one.size() == 1);
  CHECK(one.terms()[0].arg_shift == doctest::Approx(1.0));

  Matrix m(2, 2), n(2, 2);
  m << 1, 2, 3, 4;
  n << 0, 1, -1, 2;
  const TermSumOperator a_op(2, {{m, 2.0, 1.0}});
  const TermSumOperator b_op(2, {{n, 3.0, -1.0}});
  const TermSumOperator ab = compose(a_op, b_op);
  CHECK(ab.terms()[0].arg_scale == 6.0);
  CHECK(ab.terms()[0].arg_shift == 2.0);
  CHECK((ab.terms()[0].weight - m * n).norm() == 0.0);
  const Profile f = smooth_profile(2);
  for (double x : {-1.0, 0.0, 0.37, 2.5}) {
    const Vector nested = m * (n * f(3.0 * (2.0 * x + 1.0) - 1.0));
    CHECK((apply(ab, f, x) - nested).norm() < 1e-12);
  }
  CHECK_THROWS_AS(compose(TermSumOperator::identity(2), TermSumOperator::identity(3)), Error);
}

TEST_CASE("merge_prune") {
  const Matrix m = Matrix::Constant(1, 1, 0.3);
  const TermSumOperator dup(1, {{m, 1.0, 0.0}, {m, 1.0, 0.0}});
  const TermSumOperator merged = merge_prune(dup, 0.0);
  REQUIRE(merged.size() == 1);
  CHECK(merged.terms()[0].weight(0, 0) == doctest::Approx(0.6));
  const TermSumOperator zero(1, {{Matrix::Zero(1, 1), 1.0, 0.0}});
  CHECK(merge_prune(zero, 0.0).size() == 0);
  const TermSumOperator near(1, {{m, 1.0, 1.0}, {m, 1.0, 1.0 + 1e-14}});
  CHECK(merge_prune(near, 0.0).size() == 1);
  const TermSumOperator tiny(1, {{m, 1.0, 0.0}, {Matrix::Constant(1, 1, 1e-9), 2.0, 0.0}});
  const TermSumOperator pruned = merge_prune(tiny, 1e-8);
  CHECK(pruned.size() == 1);
  const Profile f = smooth_profile(1);
  CHECK(std::abs(apply(pruned, f, 0.3)(0) - apply(tiny, f, 0.3)(0)) <= 1e-8 * 1.2);
}

TEST_CASE("apply: identity, zero, error propagation") {
  const Profile f = smooth_profile(3);
  CHECK((apply(TermSumOperator::identity(3), f, 0.7) - f(0.7)).norm() == 0.0);
  CHECK(apply(TermSumOperator::zero(3), f, 0.7).norm() == 0.0);
  const Profile bad = [](double x) -> Vector {
    if (x < 0) throw Error(ErrorKind::EvalDomain, "negative argument");
    return Vector::Ones(1);
  };
  CHECK_THROWS_AS(apply(reflection_op(1.0, 1), bad, 3.0), Error);
}

TEST_CASE("randomized composition, associativity and linearity") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  int checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + trial % 3;
    const TermSumOperator a = random_operator(rng, dim, 1 + trial % 3);
    const TermSumOperator b = random_operator(rng, dim, 1 + (trial / 3) % 3);
    const TermSumOperator c = random_operator(rng, dim, 2);
    const Profile f = smooth_profile(dim, 0.1 * trial);
    const Profile g = smooth_profile(dim, -0.3 * trial);
    const double x = ux(rng);

    const TermSumOperator ab = compose(a, b);
    const Profile bf = [&](double s) { return apply(b, f, s); };
    CHECK((apply(ab, f, x) - apply(a, bf, x)).cwiseAbs().maxCoeff() < 1e-12 * (1 + ab.weight_norm()));

    const TermSumOperator left = merge_prune(compose(ab, c), 0.0);
    const TermSumOperator right = merge_prune(compose(a, compose(b, c)), 0.0);
    CHECK(same_terms(left, right, 1e-12));

    const Profile fg = [&](double s) { return Vector(f(s) + g(s)); };
    CHECK((apply(a, fg, x) - apply(a, f, x) - apply(a, g, x)).cwiseAbs().maxCoeff() < 1e-12);
    checks += 3;
  }
  CHECK(checks == 3000);
}

TEST_CASE("image series: scalar closed form term by term") {
  const double a1 = 1.3, a2 = 2.0, l = 1.0, chi = 0.2;
  const int j_max = 6;
  ImageSeriesOptions opt;
  opt.j_max = j_max;
  opt.prune_tol = 0.0;
  const ImageSeries s = image_series(scalar_spectral(a1), scalar_spectral(a2),
                                           Matrix::Constant(1, 1, chi), l, opt);
  CHECK(s.orders_used == j_max + 1);
  CHECK(s.layer1.size() == static_cast<std::size_t>(2 * (j_max + 1)));
  CHECK(s.layer2.size() == static_cast<std::size_t>(j_max + 1));

  // Expected layer-1 terms chi^j g((x + 2jl)/a1) and -chi^{j+1} g((2(j+1)l - x)/a1).
  std::vector<OperatorTerm> expected1, expected2;
  for (int j = 0; j <= j_max; ++j) {
    expected1.push_back({Matrix::Constant(1, 1, std::pow(chi, j)), 1 / a1, 2 * j * l / a1});
    expected1.push_back(
        {Matrix::Constant(1, 1, -std::pow(chi, j + 1)), -1 / a1, 2 * (j + 1) * l / a1});
    expected2.push_back({Matrix::Constant(1, 1, (1 - chi) * std::pow(chi, j)), 1 / a2,
                         -l / a2 + (2 * j + 1) * l / a1});
  }
  CHECK(same_terms(s.layer1, merge_prune(TermSumOperator(1, expected1), 0.0), 1e-12));
  CHECK(same_terms(s.layer2, merge_prune(TermSumOperator(1, expected2), 0.0), 1e-12));
}

TEST_CASE("image series: small examples") {
  ImageSeriesOptions opt;
  opt.j_max = 0;
  const Profile g = [](double x) { return Vector::Constant(1, std::exp(-x) + x * x); };
  const SpectralMatrix a = scalar_spectral(1.7);
  const ImageSeries zero_chi = image_series(a, a, Matrix::Zero(1, 1), 1.0, opt);
  for (double x : {0.0, 0.5, 1.0, 2.0}) {
    CHECK(apply(zero_chi.layer1, g, x)(0) == doctest::Approx(g(x / 1.7)(0)).epsilon(1e-14));
    CHECK(apply(zero_chi.layer2, g, x)(0) == doctest::Approx(g(x / 1.7)(0)).epsilon(1e-14));
  }
  CHECK(image_series(a, a, Matrix::Identity(1, 1), 1.0, opt).layer2.size() == 0);

  opt.j_max = 1;
  const ImageSeries s = image_series(scalar_spectral(1.0), scalar_spectral(2.0),
                                           Matrix::Constant(1, 1, 0.2), 1.0, opt);
  for (double x : {0.0, 0.3, 1.0}) {
    const double expected =
        g(x)(0) - 0.2 * g(2 - x)(0) + 0.2 * g(x + 2)(0) - 0.04 * g(4 - x)(0);
    CHECK(apply(s.layer1, g, x)(0) == doctest::Approx(expected).epsilon(1e-14));
  }

  opt.j_max = 8;
  const ImageSeries eight = image_series(scalar_spectral(1.0), scalar_spectral(2.0),
                                               Matrix::Constant(1, 1, 0.2), 1.0, opt);
  CHECK(eight.layer1.size() <= 18);
}

TEST_CASE("image series: truncation and term growth") {
  ImageSeriesOptions opt;
  opt.series_tol = 1e-6;
  opt.prune_tol = 0.0;
  const ImageSeries s = image_series(scalar_spectral(1.0), scalar_spectral(2.0),
                                           Matrix::Constant(1, 1, 0.2), 1.0, opt);
  CHECK(s.converged);
  CHECK(s.last_term_norm < 1e-6);
  CHECK(s.orders_used < 12);

  // Commuting 2x2 data: term count stays within n^2 per order.
  Matrix a1(2, 2), a2(2, 2);
  a1 << 2, 1, 1, 2;
  a2 << 3, 1, 1, 3;
  ImageSeriesOptions fixed;
  fixed.j_max = 5;
  const ImageSeries v = image_series(eigendecompose(a1), eigendecompose(a2),
                                           0.1 * a1, 1.0, fixed);
  CHECK(v.layer1.size() <= static_cast<std::size_t>(2 * 4 * (fixed.j_max + 1)));
}
