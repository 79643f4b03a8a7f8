// SPDX-License-Identifier: Apache-2.0
#include "usvp/charfn_cdf.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace usvp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTailMass = 1e-13;
// Below this q the QPSK and CVP laws are a point mass at 1 to double precision.
constexpr double kPointMassQ = 1e-14;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

// Continuous part of the CVP per-dimension charfn, closed form in w(z).
cplx cvp_continuous(double omega, double q) {
  const cplx z(1.0, -2.0 * q * omega);
  const cplx sz = std::sqrt(z);
  const cplx zeta = 1.0 / (std::sqrt(2.0 * q) * sz);
  const cplx head = std::exp(cplx(0.0, omega) / z);
  const cplx tail = 0.5 * std::exp(-0.5 / q) * faddeeva(cplx(0.0, 1.0) * zeta);
  return (head - tail) / sz;
}

// log G(w / 2T) * 2T, on a branch that is irrelevant once exponentiated.
cplx log_energy_charfn(Scheme s, int T, double q, double omega) {
  const double w = omega / (2.0 * T);
  switch (s) {
    case Scheme::DdUsGaussian:
      return -double(T) * std::log(cplx(1.0, -(1.0 + q) * omega / T));
    case Scheme::DdUsQpsk: {
      const cplx z(1.0, -2.0 * q * w);
      return -double(T) * std::log(z) + cplx(0.0, omega) / z;
    }
    case Scheme::UsCvpQpsk:
      return 2.0 * T * std::log(charfn_slot(s, w, q));
  }
  return 0.0;
}

// Adaptive Gauss-Kronrod with an absolute error budget spread by length.  A
// relative criterion would chase the negligible singular mass near 0 that the
// CVP law carries.
template <class F>
double integrate_abs(const F& f, double a, double b, double tol, int depth = 0) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  const double v = GK::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol || depth >= 20) return v;
  const double m = 0.5 * (a + b);
  return integrate_abs(f, a, m, 0.5 * tol, depth + 1) + integrate_abs(f, m, b, 0.5 * tol, depth + 1);
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::DdUsQpsk: return "dd-us-qpsk";
    case Scheme::DdUsGaussian: return "dd-us-gaussian";
    case Scheme::UsCvpQpsk: return "us-cvp";
  }
  return "";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "dd-us-qpsk") return Scheme::DdUsQpsk;
  if (name == "dd-us-gaussian") return Scheme::DdUsGaussian;
  if (name == "us-cvp") return Scheme::UsCvpQpsk;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

bool is_qpsk(Scheme s) { return s != Scheme::DdUsGaussian; }

cplx charfn_slot(Scheme s, double omega, double q) {
  if (q < 0.0) throw std::domain_error("charfn_slot: q must be nonnegative");
  switch (s) {
    case Scheme::DdUsGaussian:
      return 1.0 / std::sqrt(cplx(1.0, -2.0 * (1.0 + q) * omega));
    case Scheme::DdUsQpsk: {
      const cplx z(1.0, -2.0 * q * omega);
      return std::exp(cplx(0.0, omega) / z) / std::sqrt(z);
    }
    case Scheme::UsCvpQpsk:
      if (q <= kPointMassQ) return std::polar(1.0, omega);
      return q_function(1.0 / std::sqrt(q)) + cvp_continuous(omega, q);
  }
  return 1.0;
}

cplx energy_charfn(Scheme s, int T, double q, double omega) {
  if (s != Scheme::DdUsGaussian && q <= kPointMassQ) return std::polar(1.0, omega);
  return std::exp(log_energy_charfn(s, T, q, omega));
}

double asymptotic_selected_mean(Scheme s, double q) {
  if (q < 0.0) throw std::domain_error("asymptotic_selected_mean: q must be nonnegative");
  if (s != Scheme::UsCvpQpsk) return 1.0 + q;
  if (q <= kPointMassQ) return 1.0;
  const double r = std::sqrt(q);
  const double c = 1.0 / r;
  return (1.0 + q) * (1.0 - q_function(c)) + r * normal_pdf(c);
}

double dimension_energy_variance(Scheme s, double q) {
  if (q < 0.0) throw std::domain_error("dimension_energy_variance: q must be nonnegative");
  switch (s) {
    case Scheme::DdUsGaussian:
      return 2.0 * (1.0 + q) * (1.0 + q);
    case Scheme::DdUsQpsk:
      return 4.0 * q + 2.0 * q * q;
    case Scheme::UsCvpQpsk: {
      if (q <= kPointMassQ) return 0.0;
      // Moments of (1 - r u)^k on u < 1/r from truncated normal moments.
      const double r = std::sqrt(q);
      const double c = 1.0 / r;
      const double Phi = 1.0 - q_function(c);
      const double phi = normal_pdf(c);
      const double M0 = Phi, M1 = -phi, M2 = Phi - c * phi, M3 = -(c * c + 2.0) * phi,
                   M4 = 3.0 * Phi - (c * c * c + 3.0 * c) * phi;
      const double m1 = M0 - 2.0 * r * M1 + q * M2;
      const double m2 = M0 - 4.0 * r * M1 + 6.0 * q * M2 - 4.0 * q * r * M3 + q * q * M4;
      return std::max(0.0, m2 - m1 * m1);
    }
  }
  return 0.0;
}

double zero_energy_mass(Scheme s, int T, double q) {
  if (s != Scheme::UsCvpQpsk || q <= kPointMassQ) return 0.0;
  return std::exp(2.0 * T * std::log(q_function(1.0 / std::sqrt(q))));
}

// ---------------------------------------------------------------------------

EnergyCdf::EnergyCdf(Scheme s, int T, double q, const Quadrature& quad)
    : scheme_(s), T_(T), q_(q), quad_(quad) {
  if (T < 1) throw std::domain_error("EnergyCdf: T must be at least 1");
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::domain_error("EnergyCdf: q must be nonnegative");
  mean_ = asymptotic_selected_mean(s, q);
  var_ = dimension_energy_variance(s, q) / (2.0 * T);
  atom_ = zero_energy_mass(s, T, q);
  if (var_ <= 0.0) {
    lo_ = hi_ = mean_;
    return;
  }
  const double sd = std::sqrt(var_);
  double lo = std::max(0.0, mean_ - 14.0 * sd);
  double hi = mean_ + (14.0 + 14.0 / std::sqrt(double(T))) * sd;
  for (int attempt = 0; attempt < 8; ++attempt) {
    build(lo, hi);
    bool ok = true;
    if (1.0 - raw_cdf(hi) > kTailMass) {
      hi = mean_ + 2.0 * (hi - mean_);
      ok = false;
    }
    if (lo > 0.0 && raw_cdf(lo) - atom_ > kTailMass) {
      lo = std::max(0.0, mean_ - 2.0 * (mean_ - lo));
      ok = false;
    }
    if (ok) return;
  }
}

void EnergyCdf::build(double lo, double hi) {
  lo_ = lo;
  hi_ = hi;
  const Scheme s = scheme_;
  const int T = T_;
  const double q = q_;
  const double c = atom_;
  auto kernel = [s, T, q, c](double omega) {
    return std::exp(log_energy_charfn(s, T, q, omega)) - c;
  };
  const double resolution = std::max(mean_ - lo, hi - mean_);
  transform_ = std::make_shared<HalfLineTransform>(kernel, mean_, resolution, quad_);
}

double EnergyCdf::raw_cdf(double x) const {
  return atom_ + 0.5 * (1.0 - atom_) - transform_->sine_integral(x) / kPi;
}

double EnergyCdf::cdf(double x) const {
  if (x < 0.0) return 0.0;
  if (!transform_) return x >= mean_ ? 1.0 : 0.0;
  if (x >= hi_) return 1.0;
  if (x <= lo_) return atom_;
  return std::clamp(raw_cdf(x), 0.0, 1.0);
}

std::pair<double, double> EnergyCdf::cdf_and_integral(double y) const {
  if (y <= 0.0) return {y < 0.0 ? 0.0 : cdf(0.0), 0.0};
  if (!transform_) return {y >= mean_ ? 1.0 : 0.0, std::max(0.0, y - mean_)};
  if (y <= lo_) return {atom_, atom_ * y};
  const double base = atom_ + 0.5 * (1.0 - atom_);
  const double yy = std::min(y, hi_);
  const auto [S, J] = transform_->sine_and_smoothed(lo_, yy);
  const double F = std::clamp(base - S / kPi, 0.0, 1.0);
  double C = atom_ * lo_ + base * (yy - lo_) - J / kPi;
  if (y > hi_) return {1.0, C + (y - hi_)};
  return {F, std::max(0.0, C)};
}

double EnergyCdf::integrated_cdf(double y) const { return cdf_and_integral(y).second; }

double EnergyCdf::quantile(double kappa) const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::domain_error("quantile: kappa must lie in (0,1)");
  if (!transform_) return mean_;
  if (kappa <= atom_) return 0.0;
  double a = lo_, b = hi_;
  double fa = cdf(a) - kappa, fb = cdf(b) - kappa;
  if (fa > 0.0) return a;
  if (fb < 0.0) return b;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve([&](double x) { return cdf(x) - kappa; }, a, b, fa,
                                             fb, boost::math::tools::eps_tolerance<double>(50),
                                             iters);
  return 0.5 * (r.first + r.second);
}

double EnergyCdf::truncated_mean(double kappa) const {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::domain_error("truncated_mean: kappa must lie in (0,1]");
  if (kappa == 1.0) return mean_;
  if (!transform_) return kappa * mean_;
  const double xi = quantile(kappa);
  return std::max(0.0, kappa * xi - integrated_cdf(xi));
}

double EnergyCdf::truncated_variance(double kappa) const {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::domain_error("truncated_variance: kappa must lie in (0,1]");
  if (kappa == 1.0) return var_;
  if (!transform_) return 0.0;
  const double xi = quantile(kappa);
  // On [0, lo] only the atom contributes: F = c, int F = c y.
  double total = (1.0 - atom_) * atom_ * lo_ * lo_;
  if (xi > lo_) {
    auto integrand = [&](double y) {
      const auto [F, C] = cdf_and_integral(y);
      return (1.0 - F) * C;
    };
    total += 2.0 * integrate_abs(integrand, lo_, xi, 1e-11 * std::max(1.0, xi));
  }
  return std::max(0.0, total);
}

OrderStatSummary EnergyCdf::summary(double kappa) const {
  OrderStatSummary s;
  s.kappa = kappa;
  s.quantile = kappa < 1.0 ? quantile(kappa) : hi_;
  s.mean = truncated_mean(kappa);
  s.variance = truncated_variance(kappa);
  return s;
}

const std::vector<std::pair<double, double>>& EnergyCdf::cache() const {
  std::call_once(cache_->once, [this] {
    constexpr int n = 1024;
    auto& table = cache_->table;
    table.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double x = lo_ + (hi_ - lo_) * i / (n - 1);
      table.emplace_back(x, cdf(x));
    }
  });
  return cache_->table;
}

}  // namespace usvp
