// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "usvp/errors.hpp"
#include "usvp/replica_solver.hpp"

using namespace usvp;

namespace {

// Truncated mean and sigma^2 of Gamma(T, 1/T) at fraction kappa.
std::pair<double, double> gamma_moments(int T, double kappa) {
  const double a = T;
  const double xi = boost::math::gamma_p_inv(a, kappa) / a;
  const double mu = boost::math::gamma_p(a + 1.0, a * xi);
  const int n = 20000;
  const double h = xi / n;
  auto f = [&](double y) {
    const double F = boost::math::gamma_p(a, a * y);
    return (1.0 - F) * (y * F - boost::math::gamma_p(a + 1.0, a * y));
  };
  double s = f(0.0) + f(xi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return {mu, 2.0 * s * h / 3.0};
}

// Exhaustive chi scan of the two 1RSB equations (both multiplied by chi):
// for each chi the smallest q solving the first equation, then a sign change
// of the second along chi, refined by bisection.
std::pair<double, double> scan_1rsb(double alpha, double mu0, double s0, int T) {
  auto e1 = [&](double q, double chi) {
    const double mu = (1.0 + q) * mu0, s2 = (1.0 + q) * (1.0 + q) * s0;
    return chi * std::log1p(q / chi) - alpha * (mu - T * s2 / (2.0 * chi));
  };
  auto e2 = [&](double q, double chi) {
    const double mu = (1.0 + q) * mu0, s2 = (1.0 + q) * (1.0 + q) * s0;
    return chi * q / (chi + q) - alpha * (mu - T * s2 / chi);
  };
  auto bisect = [](auto f, double a, double b) {
    double fa = f(a);
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b), fm = f(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  auto q_of_chi = [&](double chi) {
    const int n = 4000;
    double prev = e1(1e-6, chi);
    for (int i = 1; i <= n; ++i) {
      const double q = 1e-6 + 10.0 * i / n, v = e1(q, chi);
      if ((v < 0.0) != (prev < 0.0))
        return bisect([&](double x) { return e1(x, chi); }, q - 10.0 / n, q);
      prev = v;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  auto g = [&](double chi) { return e2(q_of_chi(chi), chi); };
  const int m = 2000;
  double prev_chi = 0.5, prev = g(prev_chi);
  for (int j = 1; j <= m; ++j) {
    const double chi = 0.5 * std::pow(1000.0, double(j) / m), v = g(chi);
    if (std::isfinite(v) && std::isfinite(prev) && (v < 0.0) != (prev < 0.0)) {
      const double c = bisect(g, prev_chi, chi);
      return {q_of_chi(c), c};
    }
    prev_chi = chi;
    prev = v;
  }
  return {std::numeric_limits<double>::quiet_NaN(), 0.0};
}

}  // namespace

TEST_CASE("SystemParams validation lists every problem") {
  CHECK_NOTHROW(SystemParams{4.0, 0.125, 64, Scheme::DdUsGaussian}.validate());
  CHECK_THROWS_AS(SystemParams({4.0, 0.25, 64, Scheme::DdUsGaussian}).validate(), std::invalid_argument);
  try {
    SystemParams{-1.0, 2.0, 0, Scheme::DdUsQpsk}.validate();
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string w = e.what();
    CHECK(w.find("alpha") != std::string::npos);
    CHECK(w.find("kappa") != std::string::npos);
    CHECK(w.find("T") != std::string::npos);
  }
}

TEST_CASE("solve_rs: DD-US Gaussian scale family makes the fixed point linear") {
  for (int T : {8, 64})
    for (double ak : {0.2, 0.5, 0.8}) {
      const double alpha = 4.0, kappa = ak / alpha;
      const double c = gamma_moments(T, kappa).first;
      const double q0 = alpha * c / (1.0 - alpha * c);
      const RsSolution s = solve_rs({alpha, kappa, T, Scheme::DdUsGaussian});
      CAPTURE(T);
      CAPTURE(ak);
      CHECK(std::abs(s.q0 - q0) < 1e-8);
      CHECK(s.penalty_per_user == doctest::Approx(s.q0 / ak).epsilon(1e-14));
      CHECK(s.residual < 1e-10);
    }
  // Frozen example point.
  CHECK(solve_rs({4.0, 0.125, 64, Scheme::DdUsGaussian}).q0 == doctest::Approx(0.672701771907).epsilon(1e-10));
}

TEST_CASE("solve_rs: large T approaches the T -> infinity closed form") {
  const double alpha = 0.5, kappa = 0.99;
  const RsSolution s = solve_rs({alpha, kappa, 4096, Scheme::DdUsGaussian});
  CHECK(s.penalty_per_user == doctest::Approx(1.0 / (1.0 - alpha * kappa)).epsilon(0.02));
}

TEST_CASE("solve_rs: roots below the default scan floor") {
  const RsSolution s = solve_rs({4.0, 1e-7, 8, Scheme::DdUsQpsk});
  CHECK(s.q0 > 0.0);
  CHECK(s.q0 < 1e-6);
  CHECK(s.residual < 1e-15);
}

TEST_CASE("solve_rs: every scheme has a small residual") {
  for (Scheme sc : {Scheme::DdUsQpsk, Scheme::UsCvpQpsk}) {
    const RsSolution s = solve_rs({2.0, 0.25, 8, sc});
    CHECK(s.q0 > 0.0);
    CHECK(s.residual < 1e-10);
  }
}

TEST_CASE("solve_1rsb: DD-US Gaussian example against an exhaustive scan oracle") {
  const double alpha = 4.0, kappa = 0.125;
  const int T = 64;
  const auto [mu0, s0] = gamma_moments(T, kappa);
  const auto [q_ref, chi_ref] = scan_1rsb(alpha, mu0, s0, T);
  const OneRsbSolution s = solve_1rsb({alpha, kappa, T, Scheme::DdUsGaussian});
  CHECK(s.q1 == doctest::Approx(q_ref).epsilon(1e-4));
  CHECK(s.chi == doctest::Approx(chi_ref).epsilon(1e-4));
  // Frozen from the oracle.
  CHECK(s.q1 == doctest::Approx(0.675000604876).epsilon(1e-9));
  CHECK(std::abs(s.residual_log) < 1e-10);
  CHECK(std::abs(s.residual_ratio) < 1e-10);
  CHECK(s.q1 > solve_rs({alpha, kappa, T, Scheme::DdUsGaussian}).q0);
}

TEST_CASE("solve_1rsb: q1 > q0 where a solution exists") {
  for (double ak : {0.3, 0.7})
    for (int T : {8, 64}) {
      const SystemParams p{4.0, ak / 4.0, T, Scheme::UsCvpQpsk};
      const OneRsbSolution s = solve_1rsb(p);
      CHECK(s.q1 > solve_rs(p).q0);
      CHECK(s.penalty_per_user == doctest::Approx(s.q1 / ak).epsilon(1e-14));
    }
}

TEST_CASE("solve_1rsb: no solution when the scale-family residual is negative") {
  CHECK_THROWS_AS(solve_1rsb({2.0, 0.05, 64, Scheme::DdUsGaussian}), NoRoot);
}

TEST_CASE("reduced equation") {
  // chi -> infinity gives back q.
  for (double q : {0.1, 1.0, 4.0}) CHECK(reduced_lhs(q, 1e9) == doctest::Approx(q).epsilon(1e-7));
  // Monotone in chi, ranging over (0, q).
  double prev = 0.0;
  for (double chi = 1e-3; chi < 1e4; chi *= 1.5) {
    const double v = reduced_lhs(1.0, chi);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
  for (double d : {1e-6, 0.01, 0.3, 0.9}) CHECK(reduced_gap(ratio_for_gap(d)) == doctest::Approx(d).epsilon(1e-10));
  CHECK(ratio_for_gap(0.0) == 0.0);
  CHECK(std::isinf(ratio_for_gap(1.0)));
  // psi(r) = [ln(1+r) - r/(1+r)]/r^2 near 0 joins its series.
  for (double r : {1e-4, 2e-3, 0.5}) {
    const double direct = (std::log1p(r) - r / (1.0 + r)) / (r * r);
    CHECK(variance_weight(r) == doctest::Approx(direct).epsilon(r < 1e-3 ? 1e-6 : 1e-12));
  }
  CHECK(variance_weight(0.0) == doctest::Approx(0.5));
}

TEST_CASE("solve_rs_T_inf") {
  for (Scheme s : {Scheme::DdUsGaussian, Scheme::DdUsQpsk}) {
    CHECK(solve_rs_T_inf(s, 4.0, 0.125).penalty_per_user == doctest::Approx(2.0).epsilon(1e-10));
    const double ak = 4e-7;
    CHECK(solve_rs_T_inf(s, 4.0, ak / 4.0).penalty_per_user == doctest::Approx(1.0 / (1.0 - ak)).epsilon(1e-9));
  }
  // CVP: scalar fixed point q = ak m(q) with m estimated from one fixed sample set.
  const double ak = 0.9, b = 0.7071067811865476;
  RngStream rng(5, 0);
  std::vector<double> g(2000000);
  for (double& v : g) v = rng.normal();
  auto m = [&](double q) {
    double s = 0.0;
    const double sd = std::sqrt(q / 2.0);
    for (double v : g) {
      const double x = b - sd * v;
      if (x > 0.0) s += x * x;
    }
    return 2.0 * s / double(g.size());
  };
  double q = ak;
  for (int i = 0; i < 200; ++i) q = ak * m(q);
  const RsSolution r = solve_rs_T_inf(Scheme::UsCvpQpsk, 4.0, ak / 4.0);
  CHECK(std::isfinite(r.penalty_per_user));
  CHECK(r.q0 == doctest::Approx(q).epsilon(5e-3));
  CHECK(r.q0 == doctest::Approx(ak * asymptotic_selected_mean(Scheme::UsCvpQpsk, r.q0)).epsilon(1e-10));
}

TEST_CASE("zfbf_asymptotic_penalty") {
  CHECK(zfbf_asymptotic_penalty(0.5) == doctest::Approx(2.0));
  CHECK(zfbf_asymptotic_penalty(1e-9) == doctest::Approx(1.0));
  CHECK(zfbf_asymptotic_penalty(0.99) == doctest::Approx(100.0));
  CHECK_THROWS(zfbf_asymptotic_penalty(1.0));
}
