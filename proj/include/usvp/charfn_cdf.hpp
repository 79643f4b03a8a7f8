// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usvp/special_math.hpp"

namespace usvp {

enum class Scheme { DdUsQpsk, DdUsGaussian, UsCvpQpsk };

std::string_view scheme_name(Scheme s);
// Accepts the CLI spellings dd-us-qpsk, dd-us-gaussian, us-cvp.
Scheme parse_scheme(std::string_view name);
bool is_qpsk(Scheme s);

// Per-real-dimension characteristic function G(w) of
// W = min over the relaxed alphabet of (sqrt(2) Re x~ - g)^2, g ~ N(0, q).
cplx charfn_slot(Scheme s, double omega, double q);

// G_T(w) = G(w / 2T)^{2T}, the characteristic function of E_k(q).
cplx energy_charfn(Scheme s, int T, double q, double omega);

// E[W] = E[min |x~ - sqrt(q) z|^2] per complex slot.
double asymptotic_selected_mean(Scheme s, double q);

// Var(W) per real dimension; Var(E_k) = this / (2T).
double dimension_energy_variance(Scheme s, double q);

// Probability that every real dimension lands on its half-line and E_k = 0.
double zero_energy_mass(Scheme s, int T, double q);

struct OrderStatSummary {
  double kappa = 0.0;
  double quantile = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

// Law of E_k(q) for one (scheme, T, q).  F is obtained by Fourier inversion
// of G_T on a window [lo, hi] around the mean that carries all but ~1e-13 of
// the probability.  Immutable after construction; queries are thread-safe.
class EnergyCdf {
 public:
  EnergyCdf(Scheme s, int T, double q, const Quadrature& quad = {});

  double cdf(double x) const;
  // int_0^y F(x) dx.
  double integrated_cdf(double y) const;
  // {F(y), int_0^y F} in one pass.
  std::pair<double, double> cdf_and_integral(double y) const;

  double quantile(double kappa) const;
  // mu = int_0^kappa F^{-1}(u) du = kappa xi - int_0^xi F.  kappa = 1 allowed.
  double truncated_mean(double kappa) const;
  // Var(min(E, xi)) = 2 int_0^xi (1 - F(y)) int_0^y F dy.  kappa = 1 allowed.
  double truncated_variance(double kappa) const;
  OrderStatSummary summary(double kappa) const;

  Scheme scheme() const { return scheme_; }
  int T() const { return T_; }
  double q() const { return q_; }
  double mean() const { return mean_; }
  double variance() const { return var_; }
  double atom() const { return atom_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  bool degenerate() const { return !transform_; }
  // Null for the point-mass case.
  const HalfLineTransform* transform() const { return transform_.get(); }
  const Quadrature& quadrature() const { return quad_; }

  // 1024-point (x, F) table over [lo, hi]; built on first use.
  const std::vector<std::pair<double, double>>& cache() const;

 private:
  void build(double lo, double hi);
  // Fourier value without the window clamps.
  double raw_cdf(double x) const;

  Scheme scheme_;
  int T_;
  double q_;
  Quadrature quad_;
  double mean_ = 0.0;
  double var_ = 0.0;
  double atom_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::shared_ptr<const HalfLineTransform> transform_;
  struct Cache {
    std::once_flag once;
    std::vector<std::pair<double, double>> table;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace usvp
