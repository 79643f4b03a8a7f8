// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <utility>
#include <vector>

namespace usvp {

using cplx = std::complex<double>;

struct Quadrature {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  // Integration stops once |f| stays below this on three consecutive panels.
  double truncation_threshold = 1e-12;
  // Panel width for the generic half-line integral; the tabulated transform
  // derives its own width from the resolution it is given.
  double panel_width = 1.0;
};

// Gaussian tail probability Pr(N(0,1) > x).
double q_function(double x);

// P(a, x) = gamma(a, x) / Gamma(a).
double regularized_lower_gamma(double a, double x);

// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
cplx faddeeva(cplx z);

// Integral of Im f(w) / w over w in (0, inf).  f must be analytic near 0 with
// Im f(0) = 0 and its modulus must eventually decay below the truncation
// threshold.  Throws NonConvergence when max_subdivisions panels are used up.
double oscillatory_halfline_integral(const std::function<cplx(double)>& f,
                                     const Quadrature& quad);

// Smallest root of g on a log-spaced grid over [q_min, q_max], refined by
// bisection until the bracket is narrower than tol * min(1, q).
double smallest_positive_root(const std::function<double(double)>& g, double q_max,
                              int grid_points = 512, double tol = 1e-12,
                              double q_min = 1e-6);

// Independent pseudo-random stream identified by (seed, stream).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);
  double normal();
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  // CN(0, variance).
  cplx complex_gaussian(double variance = 1.0);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::vector<cplx> sample_complex_gaussian(RngStream& rng, std::size_t n,
                                          double variance = 1.0);

// Nodes and weights for the weight exp(-x^2) on the real line.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

// Tabulates a kernel K on a half-line grid so that many integrals of the form
//   S(x)    = int_0^inf Im[K(w) e^{-iwx}] / w dw
//   C(a, b) = int_0^inf Im[K(w) (e^{-iwa} - e^{-iwb}) / (iw)] / w dw
// can be evaluated without re-evaluating K.  The grid is composite 20-point
// Gauss-Legendre on panels of width pi / resolution; the phase of K is shifted
// by `center` so that only frequencies |x - center| <= resolution need to be
// resolved.  If K decays too slowly to be truncated, the remainder beyond the
// last panel is added per query with a double-exponential Fourier rule.
class HalfLineTransform {
 public:
  using Kernel = std::function<cplx(double)>;

  HalfLineTransform(Kernel kernel, double center, double resolution,
                    const Quadrature& quad);

  double sine_integral(double x) const;
  double smoothed_integral(double a, double b) const;
  // {S(x), C(a, x)} sharing one pass over the grid.
  std::pair<double, double> sine_and_smoothed(double a, double x) const;

  // Sum over the tabulated grid of weight * Im[K(w) * extra(w) e^{-iwx}] / w.
  // No remainder is added; callers check uses_tail() first.
  double weighted_sum(const std::function<cplx(double)>& extra, double x) const;

  bool uses_tail() const { return tail_ != nullptr; }
  double cutoff() const { return cutoff_; }
  std::size_t node_count() const { return omega_.size(); }
  const std::vector<double>& nodes() const { return omega_; }
  const std::vector<double>& weights() const { return weight_; }
  const std::vector<cplx>& kernel_values() const { return kernel_; }

 private:
  struct Tail;

  // Writes e^{-i w_j s} for every grid node into out.
  void phases(double s, std::vector<cplx>& out) const;
  double sine_tail(double x) const;
  double smoothed_tail(double s) const;

  Kernel fn_;
  double center_;
  double panel_;
  double cutoff_ = 0.0;
  std::size_t panels_ = 0;
  std::vector<double> omega_;
  std::vector<double> weight_;
  std::vector<cplx> kernel_;    // K(w_j)
  std::vector<cplx> centered_;  // K(w_j) e^{-i w_j center} / w_j
  std::shared_ptr<Tail> tail_;
};

}  // namespace usvp
