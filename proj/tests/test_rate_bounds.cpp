// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <array>
#include <cmath>

#include "usvp/rate_bounds.hpp"

using namespace usvp;

namespace {

double db(double x) { return std::pow(10.0, x / 10.0); }

// QPSK mutual information from the exact posterior of 4 equiprobable points.
std::pair<double, double> qpsk_mi_sampled(double snr, int n, std::uint64_t seed) {
  const double h = 0.7071067811865476;
  const std::array<cplx, 4> pts{cplx(h, h), cplx(-h, h), cplx(-h, -h), cplx(h, -h)};
  const double a = std::sqrt(snr);
  RngStream rng(seed, 0);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx x = pts[rng.index(4)];
    const cplx y = a * x + rng.complex_gaussian();
    double sum = 0.0;
    const double d0 = std::norm(y - a * x);
    for (cplx p : pts) sum += std::exp(d0 - std::norm(y - a * p));
    const double v = 2.0 - std::log2(sum);
    s += v;
    s2 += v * v;
  }
  const double m = s / n;
  return {m, std::sqrt((s2 / n - m * m) / n)};
}

}  // namespace

TEST_CASE("binary_entropy") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const long double p = 0.11L;
  const long double ref = -(p * std::log2(p) + (1.0L - p) * std::log2(1.0L - p));
  CHECK(std::abs(double(ref) - 0.499915958164528) < 1e-15);  // 30-digit value 0.4999159581645279956
  CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-14));
}

TEST_CASE("qpsk_mi") {
  CHECK(std::abs(qpsk_mi(db(60.0)) - 2.0) < 1e-3);
  CHECK(qpsk_mi(db(-60.0)) <= 1e-3);
  const auto [mc, se] = qpsk_mi_sampled(1.0, 10000000, 3);
  CHECK(std::abs(qpsk_mi(1.0) - mc) < 3.0 * se);
  CHECK(qpsk_mi(1.0) == doctest::Approx(0.971888).epsilon(1e-5));
  double prev = 0.0;
  for (double d = -20.0; d <= 30.0; d += 1.0) {
    CHECK(qpsk_mi(db(d)) >= prev);
    if (d < 10.0) CHECK(qpsk_mi(db(d)) > prev);
    prev = qpsk_mi(db(d));
  }

  const RateParams rp{{4.0, 0.125, 64, Scheme::DdUsQpsk}, db(60.0), Assumption::RS};
  CHECK(qpsk_mi_selected(rp, 1.0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("gaussian_mi_selected with vacuous selection is capacity") {
  const double q = 0.5, snr = db(5.0);
  const SelectionModel sel(Scheme::DdUsGaussian, 64, q, 1.0);
  const RateParams rp{{4.0, 0.25, 64, Scheme::DdUsGaussian}, snr, Assumption::RS};
  const MiEstimate e = gaussian_mi_selected(rp, sel, 200000, 5);
  CHECK(e.samples == 200000);
  CHECK(std::abs(e.bits - std::log2(1.0 + snr / q)) < 3.0 * e.std_error);
  const MiEstimate again = gaussian_mi_selected(rp, sel, 200000, 5);
  CHECK(again.bits == e.bits);
}

TEST_CASE("sum_rate_bound_dd_us") {
  const double snr = db(5.0);
  RateOptions ro;
  ro.mi_samples = 100000;
  // kappa = 0.5 at T = 64: the entropy term is alpha/64.
  const RateParams qp{{1.5, 0.5, 64, Scheme::DdUsQpsk}, snr, Assumption::RS};
  const RateResult r = sum_rate_bound_dd_us(qp, ro);
  CHECK(r.bound - 1.5 * 0.5 * r.mi_selected == doctest::Approx(1.5 / 64.0).epsilon(1e-14));

  const RateParams tiny{{4.0, 1e-6, 64, Scheme::DdUsGaussian}, snr, Assumption::RS};
  CHECK(sum_rate_bound_dd_us(tiny, ro).bound < 1e-3);

  // Interior maximum over alpha*kappa.
  auto bound = [&](double ak) {
    const RateParams p{{4.0, ak / 4.0, 64, Scheme::DdUsGaussian}, snr, Assumption::RS};
    return sum_rate_bound_dd_us(p, ro).bound;
  };
  const double lo = bound(0.1), mid = bound(0.55), hi = bound(0.95);
  CHECK(mid > lo);
  CHECK(mid > hi);
  CHECK(mid > 0.0);

  const RateParams cvp{{4.0, 0.1, 64, Scheme::UsCvpQpsk}, snr, Assumption::RS};
  CHECK_THROWS_AS(sum_rate_bound_dd_us(cvp, ro), std::invalid_argument);
}

TEST_CASE("optimize_kappa") {
  OptimizeOptions oo;
  oo.grid_size = 16;
  oo.golden_steps = 8;
  oo.rate.mi_samples = 50000;
  oo.q_cache = std::make_shared<QCache>();
  const SystemParams sys{4.0, 0.1, 64, Scheme::DdUsQpsk};
  const RateResult best = optimize_kappa(sys, db(5.0), Assumption::RS, oo);
  CHECK(best.kappa_used * 4.0 > oo.alphakappa_min);
  CHECK(best.kappa_used * 4.0 < oo.alphakappa_max);
  for (double ak : {0.2, 0.5, 0.8}) {
    const RateParams p{{4.0, ak / 4.0, 64, Scheme::DdUsQpsk}, db(5.0), Assumption::RS};
    CHECK(best.bound >= sum_rate_bound_dd_us(p, oo.rate).bound - 1e-12);
  }
  CHECK(oo.q_cache->find(oo.alphakappa_min).has_value());
}

TEST_CASE("cvp-rus reference") {
  const double snr = db(5.0);
  for (double ak : {0.3, 0.7}) {
    const double q = solve_rs_T_inf(Scheme::UsCvpQpsk, 4.0, ak / 4.0).q0;
    CHECK(cvp_rus_rate(4.0, ak, snr) == doctest::Approx(ak * qpsk_mi(snr / q)).epsilon(1e-12));
  }
  const double opt = cvp_rus_optimized(4.0, snr, 32);
  for (double ak : {0.1, 0.4, 0.6, 0.9}) CHECK(opt >= cvp_rus_rate(4.0, ak, snr) - 1e-12);
}
