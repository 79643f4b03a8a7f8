// SPDX-License-Identifier: Apache-2.0
#include "usvp/rate_bounds.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "usvp/errors.hpp"
#include "usvp/parallel.hpp"

namespace usvp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2e = std::numbers::log2e;
constexpr int kOutputGrid = 512;

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

const GaussHermite& hermite64() {
  static const GaussHermite gh = gauss_hermite(64);
  return gh;
}

// p(y | s = 1) tabulated over radius, interpolated linearly in r^2 on the log
// scale (exact for a single circular Gaussian).
class OutputDensityTable {
 public:
  OutputDensityTable(const SelectionModel& sel, double snr)
      : sel_(sel), snr_(snr), rmax_(6.0 * std::sqrt(snr / sel.q() + 1.0)) {
    std::vector<double> r(kOutputGrid);
    for (int i = 0; i < kOutputGrid; ++i) r[i] = rmax_ * i / (kOutputGrid - 1);
    const auto p = conditional_output_pdf_gaussian(sel, snr, r);
    r2_.resize(kOutputGrid);
    logp_.resize(kOutputGrid);
    for (int i = 0; i < kOutputGrid; ++i) {
      r2_[i] = r[i] * r[i];
      logp_[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
    }
  }

  double log_density(double y2) const {
    if (y2 < r2_.back()) {
      const double pos = std::sqrt(y2) / rmax_ * (kOutputGrid - 1);
      const std::size_t i = std::min<std::size_t>(std::size_t(pos), kOutputGrid - 2);
      const double a = logp_[i], b = logp_[i + 1];
      if (std::isfinite(a) && std::isfinite(b)) {
        const double t = (y2 - r2_[i]) / (r2_[i + 1] - r2_[i]);
        return a + t * (b - a);
      }
    }
    const double p = conditional_output_pdf_gaussian(sel_, snr_, std::sqrt(y2));
    return std::log(std::max(p, std::numeric_limits<double>::min()));
  }

 private:
  const SelectionModel& sel_;
  double snr_;
  double rmax_;
  std::vector<double> r2_;
  std::vector<double> logp_;
};

double alphakappa_grid(const OptimizeOptions& opt, int i) {
  return opt.alphakappa_min + (opt.alphakappa_max - opt.alphakappa_min) * i / (opt.grid_size - 1);
}

}  // namespace

std::string_view assumption_name(Assumption a) { return a == Assumption::RS ? "rs" : "1rsb"; }

Assumption parse_assumption(std::string_view name) {
  if (name == "rs") return Assumption::RS;
  if (name == "1rsb") return Assumption::OneRSB;
  throw std::invalid_argument("unknown assumption '" + std::string(name) + "'");
}

double binary_entropy(double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::domain_error("binary_entropy: kappa must lie in [0,1]");
  auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
  return term(kappa) + term(1.0 - kappa);
}

double qpsk_mi(double snr_eff) {
  if (!(snr_eff >= 0.0)) throw std::domain_error("qpsk_mi: snr must be nonnegative");
  // Per real dimension: y = A s + n, s = +-1, n ~ N(0,1), A^2 = snr_eff.
  const double A = std::sqrt(snr_eff);
  const auto& gh = hermite64();
  double e = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double n = std::sqrt(2.0) * gh.nodes[i];
    e += gh.weights[i] * softplus(-2.0 * A * (A + n));
  }
  e /= std::sqrt(kPi);
  return 2.0 * std::clamp(1.0 - e * kLog2e, 0.0, 1.0);
}

double qpsk_mi_selected(const RateParams& rp, double q) {
  if (rp.sys.scheme != Scheme::DdUsQpsk && rp.sys.scheme != Scheme::UsCvpQpsk)
    throw std::invalid_argument("qpsk_mi_selected: requires a QPSK scheme");
  if (!(rp.snr > 0.0)) throw std::domain_error("qpsk_mi_selected: snr must be positive");
  if (!(q > 0.0)) throw std::domain_error("qpsk_mi_selected: q must be positive");
  return qpsk_mi(rp.snr / q);
}

MiEstimate gaussian_mi_selected(const RateParams& rp, const SelectionModel& sel,
                                std::size_t samples, std::uint64_t seed) {
  if (sel.scheme() != Scheme::DdUsGaussian)
    throw std::invalid_argument("gaussian_mi_selected: requires dd-us-gaussian");
  if (!(rp.snr > 0.0)) throw std::domain_error("gaussian_mi_selected: snr must be positive");
  if (samples < 2) throw std::invalid_argument("gaussian_mi_selected: need at least 2 samples");
  const int T = sel.T();
  const double q = sel.q();
  const double kappa = sel.kappa();
  const double gain = std::sqrt(rp.snr / q);
  const OutputDensityTable table(sel, rp.snr);

  // Selected users drawn exactly: with u_t = x_t - sqrt(q) z_t ~ CN(0, 1+q),
  // selection depends on S = sum |u_t|^2 only, S / (1+q) ~ Gamma(T) truncated
  // to its lower kappa fraction; then x_t | u_t ~ CN(u_t / (1+q), q / (1+q)).
  RngStream rng(seed, 0x6d69);
  const std::size_t users = (samples + T - 1) / T;
  const double cond_sd = std::sqrt(q / (1.0 + q));
  std::vector<cplx> u(T);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < users; ++k) {
    double prob = kappa * rng.uniform();
    if (prob <= 0.0) prob = std::numeric_limits<double>::min();
    const double S = (1.0 + q) * boost::math::gamma_p_inv(double(T), prob);
    double norm2 = 0.0;
    for (auto& v : u) {
      v = rng.complex_gaussian();
      norm2 += std::norm(v);
    }
    const double scale = std::sqrt(S / norm2);
    double user = 0.0;
    for (int t = 0; t < T; ++t) {
      const cplx x = u[t] * scale / (1.0 + q) + cond_sd * rng.complex_gaussian();
      const cplx n = rng.complex_gaussian();
      const cplx y = gain * x + n;
      const double log_yx = -std::log(kPi) - std::norm(n);
      user += log_yx - table.log_density(std::norm(y));
    }
    user *= kLog2e / T;
    sum += user;
    sum2 += user * user;
  }
  const double n = double(users);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
  MiEstimate est;
  est.bits = mean;
  est.std_error = std::sqrt(var / n);
  est.samples = users * T;
  return est;
}

double solve_q(const SystemParams& sys, Assumption a, const SolverOptions& opt) {
  return a == Assumption::RS ? solve_rs(sys, opt).q0 : solve_1rsb(sys, opt).q1;
}

RateResult sum_rate_bound_dd_us(const RateParams& rp, const RateOptions& opt) {
  const SystemParams& sys = rp.sys;
  if (sys.scheme == Scheme::UsCvpQpsk)
    throw std::invalid_argument("sum_rate_bound_dd_us: requires a DD-US scheme");
  sys.validate();
  if (!(rp.snr > 0.0)) throw std::domain_error("sum_rate_bound_dd_us: snr must be positive");
  RateResult r;
  r.kappa_used = sys.kappa;
  r.q_used = opt.q_override ? *opt.q_override : solve_q(sys, rp.assumption, opt.solver);
  if (sys.scheme == Scheme::DdUsQpsk) {
    r.mi_selected = qpsk_mi_selected(rp, r.q_used);
  } else {
    const SelectionModel sel(Scheme::DdUsGaussian, sys.T, r.q_used, sys.kappa, opt.solver.quad);
    const MiEstimate est = gaussian_mi_selected(rp, sel, opt.mi_samples, opt.seed);
    r.mi_selected = est.bits;
    r.mi_std_error = est.std_error;
  }
  r.bound = sys.alpha * (binary_entropy(sys.kappa) / sys.T + sys.kappa * r.mi_selected);
  return r;
}

std::optional<double> QCache::find(double alphakappa) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = values_.find(std::llround(alphakappa * 1e12));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void QCache::store(double alphakappa, double q) {
  std::lock_guard<std::mutex> lock(mu_);
  values_[std::llround(alphakappa * 1e12)] = q;
}

RateResult optimize_kappa(const SystemParams& sys, double snr, Assumption a,
                          const OptimizeOptions& opt) {
  if (opt.grid_size < 16) throw std::invalid_argument("optimize_kappa: grid_size must be at least 16");
  if (!(opt.alphakappa_min > 0.0 && opt.alphakappa_min < opt.alphakappa_max &&
        opt.alphakappa_max < 1.0))
    throw std::invalid_argument("optimize_kappa: need 0 < alphakappa_min < alphakappa_max < 1");
  const double alpha = sys.alpha;

  auto evaluate = [&](double ak) -> std::optional<RateResult> {
    SystemParams p = sys;
    p.kappa = std::min(1.0, ak / alpha);
    RateParams rp{p, snr, a};
    RateOptions ro = opt.rate;
    try {
      if (opt.q_cache) {
        if (auto q = opt.q_cache->find(ak)) {
          ro.q_override = *q;
        } else {
          const double q_new = solve_q(p, a, ro.solver);
          opt.q_cache->store(ak, q_new);
          ro.q_override = q_new;
        }
      }
      return sum_rate_bound_dd_us(rp, ro);
    } catch (const std::exception& e) {
      if (opt.log) {
        std::ostringstream msg;
        msg << "optimize_kappa: skipped alphakappa=" << ak << ": " << e.what();
        opt.log(msg.str());
      }
      return std::nullopt;
    }
  };

  std::vector<std::optional<RateResult>> grid(opt.grid_size);
  parallel_for(grid.size(), [&](std::size_t i) { grid[i] = evaluate(alphakappa_grid(opt, int(i))); });
  int best = -1;
  for (int i = 0; i < opt.grid_size; ++i)
    if (grid[i] && (best < 0 || grid[i]->bound > grid[best]->bound)) best = i;
  if (best < 0) throw NoRoot("optimize_kappa: every grid point failed", opt.alphakappa_min, opt.alphakappa_max);

  RateResult result = *grid[best];
  // Golden-section refinement inside the neighbouring grid cells.
  double lo = alphakappa_grid(opt, std::max(0, best - 1));
  double hi = alphakappa_grid(opt, std::min(opt.grid_size - 1, best + 1));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  auto value = [&](double ak) {
    auto r = evaluate(ak);
    if (r && r->bound > result.bound) result = *r;
    return r ? r->bound : -std::numeric_limits<double>::infinity();
  };
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = value(c), fd = value(d);
  for (int step = 0; step < opt.golden_steps; ++step) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = value(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = value(d);
    }
  }
  return result;
}

double cvp_rus_rate(double alpha, double alphakappa, double snr) {
  const RsSolution s = solve_rs_T_inf(Scheme::UsCvpQpsk, alpha, alphakappa / alpha);
  return alphakappa * qpsk_mi(snr / s.q0);
}

double cvp_rus_optimized(double alpha, double snr, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("cvp_rus_optimized: grid_size must be at least 2");
  const double top = std::min(0.99, alpha);
  auto f = [&](double ak) { return cvp_rus_rate(alpha, ak, snr); };
  int best = 0;
  double best_v = -1.0;
  for (int i = 0; i < grid_size; ++i) {
    const double ak = 0.01 + (top - 0.01) * i / (grid_size - 1);
    const double v = f(ak);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double step = (top - 0.01) / (grid_size - 1);
  double lo = std::max(0.01, 0.01 + step * (best - 1)), hi = std::min(top, 0.01 + step * (best + 1));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < 40; ++k) {
    if (fc >= fd) {
      hi = d; d = c; fd = fc; c = hi - g * (hi - lo); fc = f(c);
    } else {
      lo = c; c = d; fc = fd; d = lo + g * (hi - lo); fd = f(d);
    }
  }
  return std::max({best_v, fc, fd});
}

}  // namespace usvp
