// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "usvp/charfn_cdf.hpp"

namespace usvp {

struct SystemParams {
  double alpha = 4.0;  // K / N
  double kappa = 0.125;  // selected fraction
  int T = 64;
  Scheme scheme = Scheme::DdUsGaussian;

  // Throws std::invalid_argument listing every violated invariant.
  void validate() const;
};

struct RsSolution {
  double q0 = 0.0;
  double penalty_per_user = 0.0;
  double residual = 0.0;  // |q0 - alpha mu(q0)|
};

struct OneRsbSolution {
  double q1 = 0.0;
  double chi = 0.0;
  double penalty_per_user = 0.0;
  // ln(1 + q/chi) - (alpha/chi)(mu - T sigma^2 / (2 chi))
  double residual_log = 0.0;
  // q/(chi + q) - (alpha/chi)(mu - T sigma^2 / chi)
  double residual_ratio = 0.0;
};

struct SolverOptions {
  double tol = 1e-12;
  int grid_points = 512;
  double q_min = 1e-6;
  Quadrature quad{};
};

// Energy laws keyed by q quantized to 1e-10, so the root finders never build
// the same model twice.  One cache per solve; thread-safe.
class ModelCache {
 public:
  ModelCache(Scheme s, int T, const Quadrature& quad) : scheme_(s), T_(T), quad_(quad) {}
  std::shared_ptr<const EnergyCdf> get(double q);

 private:
  Scheme scheme_;
  int T_;
  Quadrature quad_;
  std::mutex mu_;
  std::map<long long, std::shared_ptr<const EnergyCdf>> models_;
};

// Smallest positive root of q = alpha mu_{kappa,T}(q).
RsSolution solve_rs(const SystemParams& p, const SolverOptions& opt = {});

// Smallest q1 for which some finite chi satisfies both coupled equations.
OneRsbSolution solve_1rsb(const SystemParams& p, const SolverOptions& opt = {});

// Smallest root of q = alpha kappa E[W](q), the infinite-block limit.
RsSolution solve_rs_T_inf(Scheme s, double alpha, double kappa, double tol = 1e-12);

// 1 / (1 - alpha) for ZF over i.i.d. Gaussian channels.
double zfbf_asymptotic_penalty(double alpha);

// 2 chi ln(1 + q/chi) - chi q / (chi + q).
double reduced_lhs(double q, double chi);

// With r = q / chi: 1 - reduced_lhs / q, increasing from 0 to 1 on r > 0.
double reduced_gap(double r);
// Inverse of reduced_gap on (0, 1).
double ratio_for_gap(double d);
// [ln(1+r) - r/(1+r)] / r^2, so that the variance equation reads
// alpha T sigma^2 = 2 q^2 psi(q / chi).
double variance_weight(double r);

}  // namespace usvp
