// SPDX-License-Identifier: Apache-2.0
#include "usvp/special_math.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "usvp/errors.hpp"

namespace usvp {

namespace {

constexpr double kPi = std::numbers::pi;

// Weideman's rational approximation of w(z) in the upper half-plane.
constexpr int kWeidemanN = 64;

struct WeidemanTable {
  double L;
  std::array<double, kWeidemanN> a;  // coefficient of Z^(n-1) is a[n-1]
};

const WeidemanTable& weideman() {
  static const WeidemanTable table = [] {
    WeidemanTable t{};
    const int M = 2 * kWeidemanN;
    t.L = std::sqrt(kWeidemanN / std::sqrt(2.0));
    std::vector<double> f(2 * M - 1);
    for (int k = -M + 1; k <= M - 1; ++k) {
      const double theta = k * kPi / M;
      const double x = t.L * std::tan(theta / 2.0);
      f[k + M - 1] = std::exp(-x * x) * (t.L * t.L + x * x);
    }
    for (int n = 1; n <= kWeidemanN; ++n) {
      double s = 0.0;
      for (int k = -M + 1; k <= M - 1; ++k)
        s += f[k + M - 1] * std::cos(kPi * k * n / M);
      t.a[n - 1] = s / (2.0 * M);
    }
    return t;
  }();
  return table;
}

cplx faddeeva_upper(cplx z) {
  const auto& t = weideman();
  const cplx iz(-z.imag(), z.real());
  const cplx den = t.L - iz;
  const cplx Z = (t.L + iz) / den;
  cplx p = t.a[kWeidemanN - 1];
  for (int n = kWeidemanN - 2; n >= 0; --n) p = p * Z + t.a[n];
  return 2.0 * p / (den * den) + (1.0 / std::sqrt(kPi)) / den;
}

// 20-point Gauss-Legendre rule mapped to [0, 1].
struct UnitRule {
  std::array<double, 20> t;
  std::array<double, 20> w;
};

const UnitRule& unit_rule() {
  static const UnitRule rule = [] {
    using GL = boost::math::quadrature::gauss<double, 20>;
    UnitRule r{};
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.t[9 - i] = 0.5 * (1.0 - x[i]);
      r.w[9 - i] = 0.5 * w[i];
      r.t[10 + i] = 0.5 * (1.0 + x[i]);
      r.w[10 + i] = 0.5 * w[i];
    }
    return r;
  }();
  return rule;
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("regularized_lower_gamma: a must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(a, x);
}

cplx faddeeva(cplx z) {
  if (z.imag() >= 0.0) return faddeeva_upper(z);
  return 2.0 * std::exp(-z * z) - faddeeva_upper(-z);
}

double oscillatory_halfline_integral(const std::function<cplx(double)>& f,
                                     const Quadrature& quad) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (!(quad.panel_width > 0.0))
    throw std::domain_error("oscillatory_halfline_integral: panel width must be positive");
  auto g = [&](double w) {
    if (w <= 0.0) {
      const double d = 1e-7 * quad.panel_width;
      return (f(d).imag() - f(-d).imag()) / (2.0 * d);
    }
    return f(w).imag() / w;
  };
  double total = 0.0;
  int quiet = 0;
  for (int p = 0; p < quad.max_subdivisions; ++p) {
    const double a = p * quad.panel_width;
    const double b = a + quad.panel_width;
    double err = 0.0;
    total += GK::integrate(g, a, b, 12, quad.rel_tol, &err);
    const double env = std::max({std::abs(f(a + 0.25 * quad.panel_width)),
                                 std::abs(f(a + 0.75 * quad.panel_width)), std::abs(f(b))});
    quiet = env < quad.truncation_threshold ? quiet + 1 : 0;
    if (quiet >= 3) return total;
  }
  throw NonConvergence("oscillatory_halfline_integral: integrand did not decay", total);
}

double smallest_positive_root(const std::function<double(double)>& g, double q_max,
                              int grid_points, double tol, double q_min) {
  if (!(q_max > q_min) || q_min <= 0.0 || grid_points < 2)
    throw std::domain_error("smallest_positive_root: bad scan range");
  const double step = std::log(q_max / q_min) / (grid_points - 1);
  double lo = q_min;
  double g_lo = g(lo);
  if (std::isnan(g_lo)) throw std::domain_error("smallest_positive_root: g returned NaN");
  if (g_lo == 0.0) return lo;
  for (int i = 1; i < grid_points; ++i) {
    const double hi = i == grid_points - 1 ? q_max : q_min * std::exp(step * i);
    const double g_hi = g(hi);
    if (std::isnan(g_hi)) throw std::domain_error("smallest_positive_root: g returned NaN");
    if (g_hi == 0.0) return hi;
    if ((g_lo < 0.0) != (g_hi < 0.0)) {
      double a = lo, b = hi, ga = g_lo;
      while (b - a > tol * std::min(1.0, a)) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (ga < 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    g_lo = g_hi;
  }
  throw NoRoot("smallest_positive_root: no sign change in scan range", q_min, q_max);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

std::uint64_t RngStream::index(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

cplx RngStream::complex_gaussian(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

std::vector<cplx> sample_complex_gaussian(RngStream& rng, std::size_t n, double variance) {
  std::vector<cplx> out(n);
  for (auto& v : out) v = rng.complex_gaussian(variance);
  return out;
}

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::domain_error("gauss_hermite: n must be positive");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  GaussHermite gh;
  gh.nodes.resize(n);
  gh.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    gh.nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    gh.weights[i] = std::sqrt(kPi) * v * v;
  }
  return gh;
}

// ---------------------------------------------------------------------------

struct HalfLineTransform::Tail {
  // The remainder only needs absolute accuracy, so its relative target is
  // loosened in proportion to its estimated size.
  explicit Tail(double rel)
      : sin_rule(rel, 6), cos_rule(rel, 6), plain_rule(6), rel_tol(rel) {}
  boost::math::quadrature::ooura_fourier_sin<double> sin_rule;
  boost::math::quadrature::ooura_fourier_cos<double> cos_rule;
  boost::math::quadrature::exp_sinh<double> plain_rule;
  double rel_tol;
};

HalfLineTransform::HalfLineTransform(Kernel kernel, double center, double resolution,
                                     const Quadrature& quad)
    : fn_(std::move(kernel)), center_(center) {
  if (!(resolution > 0.0)) throw std::domain_error("HalfLineTransform: resolution must be positive");
  panel_ = kPi / resolution;
  const auto& rule = unit_rule();
  std::vector<double> env;
  int quiet = 0;
  bool truncated = false;
  for (int p = 0; p < quad.max_subdivisions; ++p) {
    double e = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double w = panel_ * (p + rule.t[k]);
      const cplx K = fn_(w);
      omega_.push_back(w);
      weight_.push_back(panel_ * rule.w[k]);
      kernel_.push_back(K);
      centered_.push_back(K * std::polar(1.0, -w * center_) / w);
      e = std::max(e, std::abs(K));
    }
    env.push_back(e);
    ++panels_;
    quiet = e < quad.truncation_threshold ? quiet + 1 : 0;
    if (quiet >= 3) {
      truncated = true;
      break;
    }
  }
  cutoff_ = panel_ * panels_;
  if (!truncated) {
    // Algebraic decay |K| ~ w^-p leaves a remainder of about |K(cutoff)| / p.
    const double e_end = env.back();
    const double e_half = env[panels_ / 2];
    const double p = std::max(0.5, std::log2(e_half / e_end));
    const double bound = e_end / p;
    if (bound > 1e-2 * quad.abs_tol)
      tail_ = std::make_shared<Tail>(std::clamp(1e-2 * quad.abs_tol / bound, 1e-10, 1e-3));
  }
}

void HalfLineTransform::phases(double s, std::vector<cplx>& out) const {
  const auto& rule = unit_rule();
  std::array<cplx, 20> local;
  for (int k = 0; k < 20; ++k) local[k] = std::polar(1.0, -panel_ * rule.t[k] * s);
  const cplx step = std::polar(1.0, -panel_ * s);
  out.resize(omega_.size());
  cplx base = 1.0;
  for (std::size_t p = 0; p < panels_; ++p) {
    if (p % 64 == 0) base = std::polar(1.0, -panel_ * static_cast<double>(p) * s);
    for (int k = 0; k < 20; ++k) out[20 * p + k] = base * local[k];
    base *= step;
  }
}

double HalfLineTransform::sine_integral(double x) const {
  std::vector<cplx> ph;
  phases(x - center_, ph);
  double s = 0.0;
  for (std::size_t j = 0; j < omega_.size(); ++j) s += weight_[j] * (centered_[j] * ph[j]).imag();
  if (tail_) s += sine_tail(x);
  return s;
}

double HalfLineTransform::smoothed_integral(double a, double b) const {
  std::vector<cplx> ph_mid, ph_half;
  phases(0.5 * (a + b) - center_, ph_mid);
  phases(-0.5 * (b - a), ph_half);
  double s = 0.0;
  for (std::size_t j = 0; j < omega_.size(); ++j)
    s += weight_[j] * (centered_[j] * ph_mid[j]).imag() * 2.0 * ph_half[j].imag() / omega_[j];
  if (tail_) s += smoothed_tail(a) - smoothed_tail(b);
  return s;
}

std::pair<double, double> HalfLineTransform::sine_and_smoothed(double a, double x) const {
  std::vector<cplx> ph_x, ph_mid, ph_half;
  phases(x - center_, ph_x);
  phases(0.5 * (a + x) - center_, ph_mid);
  phases(-0.5 * (x - a), ph_half);
  double s = 0.0, c = 0.0;
  for (std::size_t j = 0; j < omega_.size(); ++j) {
    s += weight_[j] * (centered_[j] * ph_x[j]).imag();
    c += weight_[j] * (centered_[j] * ph_mid[j]).imag() * 2.0 * ph_half[j].imag() / omega_[j];
  }
  if (tail_) {
    s += sine_tail(x);
    c += smoothed_tail(a) - smoothed_tail(x);
  }
  return {s, c};
}

double HalfLineTransform::weighted_sum(const std::function<cplx(double)>& extra,
                                       double x) const {
  std::vector<cplx> ph;
  phases(x - center_, ph);
  double s = 0.0;
  for (std::size_t j = 0; j < omega_.size(); ++j)
    s += weight_[j] * (centered_[j] * extra(omega_[j]) * ph[j]).imag();
  return s;
}

// int_W^inf Im[K(w) e^{-iwx}] / w dw with w = W + t.
double HalfLineTransform::sine_tail(double x) const {
  const double W = cutoff_;
  const cplx shift = std::polar(1.0, -W * x);
  auto A = [&](double t) { return fn_(W + t) * shift / (W + t); };
  if (x == 0.0) return tail_->plain_rule.integrate([&](double t) { return A(t).imag(); }, 0.0,
                                                   std::numeric_limits<double>::infinity(),
                                                   tail_->rel_tol);
  const double c = tail_->cos_rule.integrate([&](double t) { return A(t).imag(); }, x).first;
  const double s = tail_->sin_rule.integrate([&](double t) { return A(t).real(); }, x).first;
  return c - s;
}

// int_W^inf Im[K(w) e^{-iws} / (i w^2)] dw.
double HalfLineTransform::smoothed_tail(double s) const {
  const double W = cutoff_;
  const cplx shift = std::polar(1.0, -W * s) * cplx(0.0, -1.0);
  auto A = [&](double t) { return fn_(W + t) * shift / ((W + t) * (W + t)); };
  if (s == 0.0) return tail_->plain_rule.integrate([&](double t) { return A(t).imag(); }, 0.0,
                                                   std::numeric_limits<double>::infinity(),
                                                   tail_->rel_tol);
  const double c = tail_->cos_rule.integrate([&](double t) { return A(t).imag(); }, s).first;
  const double sn = tail_->sin_rule.integrate([&](double t) { return A(t).real(); }, s).first;
  return c - sn;
}

}  // namespace usvp
