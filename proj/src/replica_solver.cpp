// SPDX-License-Identifier: Apache-2.0
#include "usvp/replica_solver.hpp"

#include <bit>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "usvp/errors.hpp"

namespace usvp {

namespace {

constexpr int kCeilingDoublings = 3;

double default_q_max(double ak) { return 50.0 * ak / (1.0 - ak); }

// Lowers the scan floor until the fixed-point residual is negative there, so
// roots below q_min (tiny alpha*kappa) stay reachable.
template <class G>
double scan_floor(const G& g, double q_min) {
  double lo = q_min;
  while (lo > 1e-30 && g(lo) > 0.0) lo *= 1e-3;
  return lo;
}

}  // namespace

double reduced_gap(double r) {
  if (r < 1e-3) {
    // sum_{k>=2} (-1)^k (k-1)/(k+1) r^k
    double s = 0.0, rk = r * r;
    for (int k = 2; k < 12; ++k, rk *= r) s += ((k % 2) ? -1.0 : 1.0) * (k - 1.0) / (k + 1.0) * rk;
    return s;
  }
  return 1.0 - 2.0 * std::log1p(r) / r + 1.0 / (1.0 + r);
}

double variance_weight(double r) {
  if (r < 1e-3) {
    double s = 0.0, rk = 1.0;
    for (int k = 2; k < 12; ++k, rk *= r) s += ((k % 2) ? 1.0 : -1.0) * (1.0 / k - 1.0) * rk;
    return s;
  }
  return (std::log1p(r) - r / (1.0 + r)) / (r * r);
}

double ratio_for_gap(double d) {
  if (d <= 0.0) return 0.0;
  if (d >= 1.0) return std::numeric_limits<double>::infinity();
  auto f = [d](double lr) { return reduced_gap(std::exp(lr)) - d; };
  double a = std::log(std::sqrt(3.0 * d)) - 2.0, b = a + 4.0;
  while (f(a) > 0.0) a -= 4.0;
  while (f(b) < 0.0) b += 4.0;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, boost::math::tools::eps_tolerance<double>(52),
                                             iters);
  return std::exp(0.5 * (r.first + r.second));
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

// Bisection on a bracket with f(a), f(b) of opposite sign.
template <class F>
double bisect(const F& f, double a, double b, double fa, double tol) {
  while (b - a > tol * std::max(1.0, b)) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

void SystemParams::validate() const {
  std::ostringstream msg;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) msg << " alpha must be positive;";
  if (!(kappa > 0.0 && kappa <= 1.0)) msg << " kappa must lie in (0,1];";
  if (T < 1) msg << " T must be at least 1;";
  if (!(alpha * kappa < 1.0)) msg << " alpha*kappa < 1 required;";
  const std::string s = msg.str();
  if (!s.empty()) throw std::invalid_argument("invalid system parameters:" + s);
}

std::shared_ptr<const EnergyCdf> ModelCache::get(double q) {
  const long long key = std::bit_cast<long long>(q);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = models_.find(key);
    if (it != models_.end()) return it->second;
  }
  auto m = std::make_shared<const EnergyCdf>(scheme_, T_, q, quad_);
  std::lock_guard<std::mutex> lock(mu_);
  return models_.emplace(key, std::move(m)).first->second;
}

RsSolution solve_rs(const SystemParams& p, const SolverOptions& opt) {
  p.validate();
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_rs: tol must be positive");
  ModelCache cache(p.scheme, p.T, opt.quad);
  auto g = [&](double q) { return q - p.alpha * cache.get(q)->truncated_mean(p.kappa); };
  const double ak = p.alpha * p.kappa;
  double q_max = default_q_max(ak);
  const double q_min = scan_floor(g, opt.q_min);
  for (int attempt = 0;; ++attempt) {
    try {
      RsSolution s;
      s.q0 = smallest_positive_root(g, q_max, opt.grid_points, opt.tol, q_min);
      s.residual = std::abs(g(s.q0));
      s.penalty_per_user = s.q0 / ak;
      return s;
    } catch (const NoRoot&) {
      if (attempt >= kCeilingDoublings) throw;
      q_max *= 2.0;
    }
  }
}

double reduced_lhs(double q, double chi) {
  const double r = q / chi;
  return q * (1.0 - reduced_gap(r));
}

OneRsbSolution solve_1rsb(const SystemParams& p, const SolverOptions& opt) {
  p.validate();
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_1rsb: tol must be positive");
  ModelCache cache(p.scheme, p.T, opt.quad);
  const double ak = p.alpha * p.kappa;
  const double T = p.T;

  // For fixed q the reduced equation has exactly one chi (its left side is
  // increasing in chi from 0 to q), so the pair is parametrized by q alone.
  // gap(q) > 0 is the region where that chi exists.
  auto gap = [&](double q) { return 1.0 - p.alpha * cache.get(q)->truncated_mean(p.kappa) / q; };
  // Variance equation with chi eliminated; at the gap boundary r -> 0.
  auto residual = [&](double q) {
    const auto m = cache.get(q);
    const double d = 1.0 - p.alpha * m->truncated_mean(p.kappa) / q;
    const double r = ratio_for_gap(d);
    return 2.0 * q * q * variance_weight(r) - p.alpha * T * m->truncated_variance(p.kappa);
  };
  auto boundary_residual = [&](double q) {
    return q * q - p.alpha * T * cache.get(q)->truncated_variance(p.kappa);
  };

  double q_max = default_q_max(ak);
  for (int attempt = 0;; ++attempt) {
    const auto grid = log_grid(opt.q_min, q_max, opt.grid_points);
    double prev_q = 0.0, prev_gap = 0.0, prev_res = 0.0;
    bool prev_valid = false;
    double root = -1.0;
    for (std::size_t i = 0; i < grid.size() && root < 0.0; ++i) {
      const double q = grid[i];
      const double d = gap(q);
      if (!std::isfinite(d)) throw std::domain_error("solve_1rsb: non-finite mean");
      if (d <= 0.0) {
        prev_valid = false;
        prev_q = q;
        prev_gap = d;
        continue;
      }
      const double res = residual(q);
      if (!prev_valid && i > 0) {
        // Entering the admissible region: locate its edge and test the limit.
        const double edge = bisect(gap, prev_q, q, prev_gap, opt.tol);
        const double e = boundary_residual(edge);
        if (e == 0.0) {
          root = edge;
        } else if ((e < 0.0) != (res < 0.0)) {
          root = bisect([&](double x) { return x <= edge ? e : residual(x); }, edge, q, e, opt.tol);
        }
      } else if (prev_valid && (prev_res < 0.0) != (res < 0.0)) {
        root = bisect(residual, prev_q, q, prev_res, opt.tol);
      } else if (res == 0.0) {
        root = q;
      }
      prev_valid = true;
      prev_q = q;
      prev_gap = d;
      prev_res = res;
    }
    if (root > 0.0) {
      const auto m = cache.get(root);
      const double mu = m->truncated_mean(p.kappa);
      const double s2 = m->truncated_variance(p.kappa);
      OneRsbSolution s;
      s.q1 = root;
      const double r = ratio_for_gap(1.0 - p.alpha * mu / root);
      if (!(r > 0.0)) throw NoRoot("solve_1rsb: solution sits on the RS boundary", opt.q_min, q_max);
      s.chi = root / r;
      s.penalty_per_user = root / ak;
      s.residual_log = std::log1p(r) - p.alpha / s.chi * (mu - T * s2 / (2.0 * s.chi));
      s.residual_ratio = root / (s.chi + root) - p.alpha / s.chi * (mu - T * s2 / s.chi);
      return s;
    }
    if (attempt >= kCeilingDoublings)
      throw NoRoot("solve_1rsb: no consistent (q1, chi) pair", opt.q_min, q_max);
    q_max *= 2.0;
  }
}

RsSolution solve_rs_T_inf(Scheme s, double alpha, double kappa, double tol) {
  SystemParams p{alpha, kappa, 1, s};
  p.validate();
  const double ak = alpha * kappa;
  auto g = [&](double q) { return q - ak * asymptotic_selected_mean(s, q); };
  double q_max = default_q_max(ak);
  const double q_min = scan_floor(g, 1e-6);
  for (int attempt = 0;; ++attempt) {
    try {
      RsSolution r;
      r.q0 = smallest_positive_root(g, q_max, 512, tol, q_min);
      r.residual = std::abs(g(r.q0));
      r.penalty_per_user = r.q0 / ak;
      return r;
    } catch (const NoRoot&) {
      if (attempt >= kCeilingDoublings) throw;
      q_max *= 2.0;
    }
  }
}

double zfbf_asymptotic_penalty(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("zfbf_asymptotic_penalty: alpha must lie in (0,1)");
  return 1.0 / (1.0 - alpha);
}

}  // namespace usvp
