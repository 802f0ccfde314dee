#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "transop/basefield.hpp"

using namespace transop;

namespace {

constexpr double kPi = std::numbers::pi;

SampledTrace sample_fn(int dim, double lo, double hi, int count, double (*f)(double)) {
  SampledTrace s;
  s.values.resize(dim, count);
  for (int k = 0; k < count; ++k) {
    const double t = lo + (hi - lo) * k / (count - 1);
    s.y.push_back(t);
    for (int c = 0; c < dim; ++c) s.values(c, k) = (c + 1) * f(t);
  }
  return s;
}

// Poisson integral of the piecewise-linear interpolant in closed form:
// on each segment f = p + q t integrates against x/(x^2+(t-y)^2) to
// (p + q y) atan((t-y)/x) + (q x / 2) log(x^2 + (t-y)^2).
double exact_poisson_linear(const SampledTrace& s, double x, double y) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < s.y.size(); ++k) {
    const double t0 = s.y[k], t1 = s.y[k + 1];
    const double f0 = s.values(0, static_cast<Eigen::Index>(k));
    const double f1 = s.values(0, static_cast<Eigen::Index>(k + 1));
    const double q = (f1 - f0) / (t1 - t0), p = f0 - q * t0;
    auto prim = [&](double t) {
      const double d = t - y;
      return (p + q * y) * std::atan(d / x) + 0.5 * q * x * std::log(x * x + d * d);
    };
    total += prim(t1) - prim(t0);
  }
  return total / kPi;
}

BoundaryTrace sampled_only(SampledTrace s) {
  const int dim = static_cast<int>(s.values.rows());
  return BoundaryTrace(dim, {}, std::move(s));
}

}  // namespace

TEST_CASE("trace invariants") {
  CHECK_THROWS_AS(BoundaryTrace(1, {}), Error);
  CHECK_THROWS_AS(BoundaryTrace(1, {{1.0, Vector::Ones(1), Vector::Zero(1)},
                                    {1.0, Vector::Ones(1), Vector::Zero(1)}}),
                  Error);
  CHECK_THROWS_AS(BoundaryTrace(1, {{0.0, Vector::Ones(1), Vector::Ones(1)}}), Error);
  CHECK_THROWS_AS(BoundaryTrace(1, {{-1.0, Vector::Ones(1), Vector::Zero(1)}}), Error);
  CHECK_THROWS_AS(BoundaryTrace(2, {{1.0, Vector::Ones(1), Vector::Zero(1)}}), Error);
  SampledTrace unsorted;
  unsorted.y = {0.0, 2.0, 1.0};
  unsorted.values = Matrix::Ones(1, 3);
  CHECK_THROWS_AS(BoundaryTrace(1, {}, unsorted), Error);
  CHECK_NOTHROW(BoundaryTrace(1, {{0.0, Vector::Ones(1), Vector::Zero(1)}}));
}

TEST_CASE("trace values and bounds") {
  const BoundaryTrace f(2, {{1.0, Vector::Ones(2), Vector::Zero(2)},
                            {3.0, Vector::Zero(2), Vector::Constant(2, 0.5)}});
  CHECK(f.value(0.4)(0) == doctest::Approx(std::cos(0.4) + 0.5 * std::sin(1.2)));
  CHECK(f.sup_bound() >= 1.5);
  CHECK(f.min_omega() == 1.0);
  CHECK(f.mode_only());
  const BoundaryTrace g = sampled_only(sample_fn(1, -1.0, 1.0, 3, [](double t) { return t; }));
  CHECK(g.value(0.5)(0) == doctest::Approx(0.5));
  CHECK(g.value(2.0)(0) == 0.0);
  CHECK_FALSE(g.mode_only());
  CHECK(std::isinf(g.min_omega()));
}

TEST_CASE("mode extension matches the separated solution") {
  const BoundaryTrace f = BoundaryTrace::single_mode(1.0, Vector::Ones(1));
  for (double x : {0.0, 0.3, 1.0, 4.0})
    for (double y : {-2.0, 0.0, 1.1}) {
      CHECK(harmonic_extension(f, x, y)(0) ==
            doctest::Approx(std::exp(-x) * std::cos(y)).epsilon(1e-14));
    }
  CHECK_THROWS_AS(harmonic_extension(f, -0.1, 0.0), Error);
  CHECK(harmonic_extension(f, 0.0, 0.7)(0) == std::cos(0.7));
}

TEST_CASE("Poisson integral of a sampled cosine agrees with the exact interpolant integral") {
  const double half = 20.0 * kPi;
  const SampledTrace s = sample_fn(1, -half, half, 40001, [](double t) { return std::cos(t); });
  const BoundaryTrace samples = sampled_only(s);
  const BoundaryTrace modes = BoundaryTrace::single_mode(1.0, Vector::Ones(1));
  for (double x : {0.5, 1.0}) {
    for (double y : {0.0, 0.8}) {
      const double quad = harmonic_extension(samples, x, y)(0);
      CHECK(quad == doctest::Approx(exact_poisson_linear(s, x, y)).epsilon(1e-8));
      // Away from the support only the truncated kernel mass is missing.
      const double tail = (2.0 / kPi) * std::atan(x / (half - std::abs(y)));
      CHECK(std::abs(quad - harmonic_extension(modes, x, y)(0)) <= tail + 1e-5);
    }
  }
}

TEST_CASE("sampled constant reproduces the truncated kernel mass") {
  const double half = 50.0;
  const BoundaryTrace c = sampled_only(sample_fn(2, -half, half, 11, [](double) { return 2.0; }));
  for (double x : {0.1, 1.0, 3.0}) {
    for (double y : {-3.0, 0.0, 10.0}) {
      const double mass = (std::atan((half - y) / x) + std::atan((half + y) / x)) / kPi;
      const BaseSample s = harmonic_extension_sample(c, x, y);
      CHECK(s.value(0) == doctest::Approx(2.0 * mass).epsilon(1e-9));
      CHECK(s.value(1) == doctest::Approx(4.0 * mass).epsilon(1e-9));
      CHECK(std::abs(s.value(0) - 2.0) <= 2.0 * (1.0 - mass) + 1e-9);
      CHECK(s.quad_error <= 1e-8);
    }
  }
}

TEST_CASE("sampled Lorentzian has the closed-form extension (1+x)/((1+x)^2+y^2)") {
  const BoundaryTrace f = sampled_only(
      sample_fn(1, -200.0, 200.0, 400001, [](double t) { return 1.0 / (1.0 + t * t); }));
  const auto start = std::chrono::steady_clock::now();
  CHECK(harmonic_extension(f, 1.0, 0.0)(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(harmonic_extension(f, 0.5, 1.0)(0) == doctest::Approx(1.5 / (2.25 + 1.0)).epsilon(1e-6));
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
  CHECK(harmonic_extension(f, 0.0, 0.5)(0) == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("profile_at_y") {
  const BoundaryTrace f(1, {{1.0, Vector::Ones(1), Vector::Zero(1)},
                            {2.0, Vector::Constant(1, 0.5), Vector::Zero(1)}});
  const Profile p = profile_at_y(f, 0.0);
  CHECK(p(0.0)(0) == doctest::Approx(1.5));
  CHECK(p(1.0)(0) == doctest::Approx(std::exp(-1.0) + 0.5 * std::exp(-2.0)));
  CHECK(p(-1.0)(0) == doctest::Approx(std::exp(1.0) + 0.5 * std::exp(2.0)));

  const Profile single = profile_at_y(BoundaryTrace::single_mode(2.0, Vector::Ones(1)), 0.3);
  const double h = 1e-3, x = 0.4;
  const double second = (single(x + h)(0) - 2 * single(x)(0) + single(x - h)(0)) / (h * h);
  CHECK(second == doctest::Approx(4.0 * single(x)(0)).epsilon(1e-6));

  const Profile sampled =
      profile_at_y(sampled_only(sample_fn(1, -1, 1, 3, [](double) { return 1.0; })), 0.0);
  CHECK_THROWS_AS(sampled(-0.5), Error);
}

TEST_CASE("grid layout and evaluation") {
  GridSpec spec{0.0, 1.0, -1.0, 1.0, 5, 3};
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.hx() == 0.25);
  CHECK(spec.x(4) == 1.0);
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 0.0, 1.0, 1, 3}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{1.0, 0.0, 0.0, 1.0, 3, 3}.validate()), Error);

  FieldGrid g(spec, 2);
  g.set(1, 2, Vector::Constant(2, 3.0));
  CHECK(g.at(1, 2)(1) == 3.0);
  CHECK(g.data()[((2 * 5) + 1) * 2] == 3.0);
  CHECK_THROWS_AS(g.set(0, 0, Vector::Constant(2, std::nan(""))), Error);

  const BoundaryTrace f = BoundaryTrace::single_mode(1.0, Vector::Ones(1), Vector::Constant(1, 0.5));
  const FieldGrid u = evaluate_on_grid(f, spec);
  for (int j = 0; j < spec.ny; ++j) CHECK(u.at(0, j)(0) == doctest::Approx(f.value(spec.y(j))(0)));
  const FieldGrid again = evaluate_on_grid(f, spec);
  CHECK(again.data() == u.data());

  const BoundaryTrace c(1, {{0.0, Vector::Constant(1, 2.0), Vector::Zero(1)}});
  const FieldGrid flat = evaluate_on_grid(c, spec);
  for (double v : flat.data()) CHECK(v == 2.0);
}

TEST_CASE("discrete Laplacian of the base field is second order") {
  const BoundaryTrace f = BoundaryTrace::single_mode(1.0, Vector::Ones(1));
  const Matrix one = Matrix::Identity(1, 1);
  const double coarse = pde_residual_linf(evaluate_on_grid(f, {0, 2, -kPi, kPi, 33, 33}), one);
  const double fine = pde_residual_linf(evaluate_on_grid(f, {0, 2, -kPi, kPi, 65, 65}), one);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("maximum principle for a single mode") {
  const BoundaryTrace f = BoundaryTrace::single_mode(2.0, Vector::Constant(1, 0.7),
                                                     Vector::Constant(1, -0.4));
  const FieldGrid u = evaluate_on_grid(f, {0, 3, -2, 2, 31, 41});
  CHECK(u.dim() == 1);
  for (double v : u.data()) CHECK(std::abs(v) <= f.sup_bound() + 1e-9);
}
