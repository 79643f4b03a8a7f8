// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "usvp/errors.hpp"
#include "usvp/special_math.hpp"

using namespace usvp;

namespace {

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(const F& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// w(z) = (i/pi) int exp(-t^2) / (z - t) dt, Im z > 0; the trapezoid rule is
// spectrally accurate for this integrand.
cplx faddeeva_oracle(cplx z) {
  const double h = 1e-3;
  cplx s = 0.0;
  for (double t = -12.0; t <= 12.0; t += h) s += std::exp(-t * t) / (z - t);
  return cplx(0.0, 1.0) / std::numbers::pi * s * h;
}

}  // namespace

TEST_CASE("q_function") {
  CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q_function(40.0) >= 0.0);
  CHECK(q_function(40.0) < 1e-300);
  // Quadrature oracle of the Gaussian tail, frozen.
  const double oracle = simpson(
      [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi); }, 1.0, 41.0,
      200000);
  CHECK(std::abs(oracle - 0.15865525393145705) < 1e-13);
  CHECK(std::abs(q_function(1.0) - 0.15865525393145705) < 1e-15);
  CHECK(q_function(-1.0) == doctest::Approx(1.0 - 0.15865525393145705).epsilon(1e-15));
}

TEST_CASE("regularized_lower_gamma") {
  for (double x : {0.1, 1.0, 3.7, 20.0})
    CHECK(regularized_lower_gamma(1.0, x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-14));
  CHECK(regularized_lower_gamma(2.5, 0.0) == 0.0);
  // Series oracle: e^{-x} sum_n x^{a+n} / Gamma(a+n+1).
  double series = 0.0, term = std::exp(-2.0) * 4.0 / 2.0;
  for (int n = 0; n < 60; ++n) {
    series += term;
    term *= 2.0 / (3.0 + n);
  }
  CHECK(std::abs(series - 0.59399415029016192) < 1e-15);
  CHECK(std::abs(regularized_lower_gamma(2.0, 2.0) - 0.59399415029016192) < 1e-15);
  CHECK_THROWS_AS(regularized_lower_gamma(0.0, 1.0), std::domain_error);
}

TEST_CASE("faddeeva matches integral representation") {
  CHECK(std::abs(faddeeva(cplx(0.0, 0.0)) - 1.0) < 1e-14);
  for (cplx z : {cplx(1.0, 1.0), cplx(-2.0, 0.5), cplx(0.3, 3.0), cplx(5.0, 0.1)})
    CHECK(std::abs(faddeeva(z) - faddeeva_oracle(z)) < 1e-11);
  // Frozen from the oracle above.
  CHECK(std::abs(faddeeva(cplx(1.0, 1.0)) - cplx(0.30474420525691259, 0.20821893820283163)) < 1e-13);
  // Lower half-plane through w(-z) = 2 exp(-z^2) - w(z).
  const cplx z(0.7, -0.4);
  CHECK(std::abs(faddeeva(z) - (2.0 * std::exp(-z * z) - faddeeva(-z))) < 1e-13);
}

TEST_CASE("oscillatory_halfline_integral") {
  const Quadrature quad;
  CHECK(oscillatory_halfline_integral([](double w) { return std::exp(cplx(-1.0, 1.0) * w); }, quad) ==
        doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));
  CHECK(oscillatory_halfline_integral([](double w) { return std::exp(cplx(-2.0, 1.0) * w); }, quad) ==
        doctest::Approx(std::atan(0.5)).epsilon(1e-12));
  CHECK(oscillatory_halfline_integral([](double w) { return cplx(std::exp(-w), 0.0); }, quad) == 0.0);
}

TEST_CASE("smallest_positive_root") {
  CHECK(smallest_positive_root([](double q) { return q - 2.0; }, 10.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(smallest_positive_root([](double q) { return (q - 1.0) * (q - 3.0); }, 10.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(smallest_positive_root([](double q) { return q + 1.0; }, 10.0), NoRoot);
}

TEST_CASE("complex gaussian sampling") {
  RngStream rng(3, 0);
  for (cplx v : sample_complex_gaussian(rng, 10, 0.0)) CHECK(v == cplx(0.0, 0.0));

  const std::size_t n = 1000000;
  const auto s = sample_complex_gaussian(rng, n, 1.0);
  cplx mean = 0.0;
  double power = 0.0;
  for (cplx v : s) {
    mean += v;
    power += std::norm(v);
  }
  mean /= double(n);
  const double var = power / n - std::norm(mean);
  CHECK(std::abs(mean) < 4e-3);
  CHECK(std::abs(var - 1.0) < 0.01);

  RngStream a(11, 5), b(11, 5), c(11, 6);
  const auto sa = sample_complex_gaussian(a, 100), sb = sample_complex_gaussian(b, 100),
             sc = sample_complex_gaussian(c, 100);
  CHECK(sa == sb);
  CHECK(sa != sc);
}

TEST_CASE("gauss_hermite moments") {
  const auto gh = gauss_hermite(64);
  REQUIRE(gh.nodes.size() == 64);
  const double sp = std::sqrt(std::numbers::pi);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double x = gh.nodes[i], w = gh.weights[i];
    m0 += w;
    m1 += w * x;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
  }
  CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
  CHECK(std::abs(m1) < 1e-13);
  CHECK(m2 == doctest::Approx(sp / 2.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0 * sp / 4.0).epsilon(1e-13));
}

TEST_CASE("half-line transform recovers an exponential cdf") {
  // Exp(1): phi(w) = 1/(1 - i w), F(x) = 1/2 - (1/pi) int Im[phi e^{-iwx}]/w.
  const HalfLineTransform tr([](double w) { return 1.0 / cplx(1.0, -w); }, 1.0, 40.0, Quadrature{});
  for (double x : {0.1, 0.5, 1.0, 3.0, 8.0})
    CHECK(std::abs(0.5 - tr.sine_integral(x) / std::numbers::pi + std::expm1(-x)) < 1e-8);
}
