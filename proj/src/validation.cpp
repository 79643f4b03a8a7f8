// SPDX-License-Identifier: Apache-2.0
#include "usvp/validation.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "usvp/errors.hpp"
#include "usvp/mc_sim.hpp"
#include "usvp/rate_bounds.hpp"
#include "usvp/replica_solver.hpp"
#include "usvp/selection_stats.hpp"
#include "usvp/sweep.hpp"

namespace usvp {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

const char* status_word(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Warn: return "WARN";
    case CheckStatus::Unmet: return "UNMET";
  }
  return "?";
}

class Runner {
 public:
  explicit Runner(std::ostream& out) : out_(out) {}

  // body fills status and detail; runtime is checked against budget_s.
  void check(const std::string& id, const std::string& name, double budget_s,
             const std::function<void(CheckResult&)>& body) {
    CheckResult r;
    r.id = id;
    r.name = name;
    const auto t0 = Clock::now();
    try {
      body(r);
    } catch (const std::exception& e) {
      r.status = CheckStatus::Fail;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0.0 && r.seconds > budget_s && r.status != CheckStatus::Fail) {
      r.status = CheckStatus::Fail;
      r.detail += "; runtime over budget";
    }
    out_ << "[" << status_word(r.status) << "] " << r.id << " " << r.name << ": " << r.detail
         << " (" << fmt(r.seconds, 3) << " s";
    if (budget_s > 0.0) out_ << ", budget " << budget_s << " s";
    out_ << ")" << std::endl;
    report_.results.push_back(std::move(r));
  }

  ValidationReport take() { return std::move(report_); }

 private:
  std::ostream& out_;
  ValidationReport report_;
};

CheckStatus pass_if(bool ok) { return ok ? CheckStatus::Pass : CheckStatus::Fail; }

// ---------------------------------------------------------------------------

void suite_math(Runner& run) {
  run.check("M1", "special-functions", 0.0, [](CheckResult& r) {
    double worst = 0.0;
    worst = std::max(worst, std::abs(q_function(1.0) - 0.15865525393145705));
    worst = std::max(worst, std::abs(regularized_lower_gamma(2.0, 2.0) - (1.0 - 3.0 * std::exp(-2.0))));
    worst = std::max(worst, std::abs(faddeeva(cplx(1.0, 1.0)) -
                                     cplx(0.30474420525691259, 0.20821893820283163)));
    const auto gh = gauss_hermite(64);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      m0 += gh.weights[i];
      m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
    }
    const double sp = std::sqrt(std::numbers::pi);
    worst = std::max({worst, std::abs(m0 - sp), std::abs(m2 - sp / 2.0)});
    r.status = pass_if(worst <= 1e-12);
    r.detail = "max error " + fmt(worst, 3) + " (tol 1e-12)";
  });
  run.check("M2", "oscillatory-halfline-integral", 0.0, [](CheckResult& r) {
    const double a = oscillatory_halfline_integral(
        [](double w) { return std::exp(cplx(-1.0, 1.0) * w); }, Quadrature{});
    const double b = oscillatory_halfline_integral(
        [](double w) { return std::exp(cplx(-2.0, 1.0) * w); }, Quadrature{});
    const double err = std::max(std::abs(a - std::numbers::pi / 4.0), std::abs(b - std::atan(0.5)));
    r.status = pass_if(err <= 1e-10);
    r.detail = "max error " + fmt(err, 3) + " vs arctan closed forms (tol 1e-10)";
  });
}

void suite_cdf(Runner& run) {
  run.check("2", "fourier-cdf-vs-gamma", 30.0, [](CheckResult& r) {
    double worst = 0.0;
    int n = 0;
    for (int T : {1, 8, 64})
      for (double q : {0.5, 1.0, 5.0}) {
        const EnergyCdf m(Scheme::DdUsGaussian, T, q);
        const double top = (1.0 + q) * (1.0 + 8.0 / std::sqrt(double(T)));
        for (int i = 0; i < 50; ++i) {
          const double x = top * (i + 0.5) / 50.0;
          const double ref = boost::math::gamma_p(double(T), T * x / (1.0 + q));
          worst = std::max(worst, std::abs(m.cdf(x) - ref));
          ++n;
        }
      }
    r.status = pass_if(worst <= 1e-6);
    r.detail = "max |F - P(T, Tx/(1+q))| = " + fmt(worst, 3) + " over " + std::to_string(n) +
               " points (tol 1e-6)";
  });
}

// max over the admissible range of the DD-US Gaussian 1RSB residual / q^2,
// using mu(q) = (1+q) mu0 and sigma^2(q) = (1+q)^2 s0.  Negative means the
// coupled equations have no solution at any q.
double dd_us_gaussian_1rsb_certificate(double alpha, double kappa, int T) {
  const EnergyCdf m(Scheme::DdUsGaussian, T, 0.0);
  const double mu0 = m.truncated_mean(kappa), s0 = m.truncated_variance(kappa);
  const double t_max = 1.0 / (alpha * mu0);
  double best = -std::numeric_limits<double>::infinity();
  constexpr int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double t = 1.0 + (t_max - 1.0) * i / n;
    const double d = 1.0 - alpha * mu0 * t;
    const double h = (d <= 0.0 ? 1.0 : 2.0 * variance_weight(ratio_for_gap(d))) - alpha * T * s0 * t * t;
    best = std::max(best, h);
  }
  return best;
}

void suite_replica(Runner& run) {
  run.check("1", "dd-us-T-inf-closed-form", 1.0, [](CheckResult& r) {
    double worst = 0.0;
    for (Scheme s : {Scheme::DdUsGaussian, Scheme::DdUsQpsk})
      for (int i = 1; i <= 9; ++i) {
        const double ak = 0.1 * i;
        const RsSolution sol = solve_rs_T_inf(s, 4.0, ak / 4.0);
        worst = std::max(worst, std::abs(sol.penalty_per_user - 1.0 / (1.0 - ak)));
      }
    r.status = pass_if(worst <= 1e-6);
    r.detail = "max |penalty - 1/(1-ak)| = " + fmt(worst, 3) + " over ak = 0.1..0.9 (tol 1e-6)";
  });

  struct Point {
    Scheme s = Scheme::DdUsGaussian;
    double alpha = 0.0, ak = 0.0;
    int T = 1;
    bool solved = false, dominated = false, certified_empty = false;
    double q0 = 0.0, q1 = 0.0, cert = 0.0;
    std::string error;
  };
  std::vector<Point> pts;
  const auto t0 = Clock::now();
  for (Scheme s : {Scheme::DdUsGaussian, Scheme::UsCvpQpsk})
    for (double alpha : {2.0, 4.0})
      for (int T : {8, 64})
        for (int i = 1; i <= 9; ++i) {
          Point p;
          p.s = s;
          p.alpha = alpha;
          p.ak = 0.1 * i;
          p.T = T;
          pts.push_back(p);
        }
  for (auto& p : pts) {
    const SystemParams sys{p.alpha, p.ak / p.alpha, p.T, p.s};
    p.q0 = solve_rs(sys).q0;
    try {
      p.q1 = solve_1rsb(sys).q1;
      p.solved = true;
      p.dominated = p.q1 > p.q0;
    } catch (const NoRoot& e) {
      p.error = e.what();
      if (p.s == Scheme::DdUsGaussian) {
        p.cert = dd_us_gaussian_1rsb_certificate(p.alpha, p.ak / p.alpha, p.T);
        p.certified_empty = p.cert < 0.0;
      }
    }
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();

  run.check("3", "property-1 (q1 > q0 wherever a 1RSB solution exists)", 0.0, [&](CheckResult& r) {
    int solved = 0, bad = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    std::string first_bad;
    for (const auto& p : pts) {
      if (!p.solved) continue;
      ++solved;
      min_gap = std::min(min_gap, p.q1 - p.q0);
      if (!p.dominated && first_bad.empty()) {
        ++bad;
        first_bad = std::string(scheme_name(p.s)) + " alpha=" + fmt(p.alpha) + " ak=" + fmt(p.ak) +
                    " T=" + std::to_string(p.T);
      } else if (!p.dominated) {
        ++bad;
      }
    }
    r.status = pass_if(bad == 0 && solved > 0 && elapsed <= 600.0);
    r.detail = std::to_string(solved) + "/" + std::to_string(pts.size()) +
               " grid points solved, min(q1 - q0) = " + fmt(min_gap, 3) + ", violations " +
               std::to_string(bad) + (first_bad.empty() ? "" : " (first: " + first_bad + ")") +
               "; grid solve time " + fmt(elapsed, 3) + " s (budget 600 s)";
  });
  run.check("3b", "1rsb-solution-exists-on-full-grid", 0.0, [&](CheckResult& r) {
    int missing = 0, certified = 0;
    double worst_cert = -std::numeric_limits<double>::infinity();
    std::string uncertified;
    for (const auto& p : pts) {
      if (p.solved) continue;
      ++missing;
      if (p.certified_empty) {
        ++certified;
        worst_cert = std::max(worst_cert, p.cert);
      } else if (uncertified.empty()) {
        uncertified = std::string(scheme_name(p.s)) + " alpha=" + fmt(p.alpha) +
                      " ak=" + fmt(p.ak) + " T=" + std::to_string(p.T);
      }
    }
    if (missing == 0) {
      r.status = CheckStatus::Pass;
      r.detail = "every grid point has a 1RSB solution";
    } else if (certified == missing) {
      r.status = CheckStatus::Unmet;
      std::map<std::pair<double, int>, std::string> where;
      for (const auto& p : pts)
        if (!p.solved) where[{p.alpha, p.T}] += (where[{p.alpha, p.T}].empty() ? "" : " ") + fmt(p.ak);
      std::string list;
      for (const auto& [k, v] : where)
        list += (list.empty() ? "" : "; ") + std::string("alpha=") + fmt(k.first) + " T=" +
                std::to_string(k.second) + " ak=" + v;
      r.detail = std::to_string(missing) +
                 " dd-us-gaussian points have no 1RSB solution (" + list +
                 "); exhaustive scan of the scale-family residual shows it is negative on the "
                 "whole admissible range (largest value " + fmt(worst_cert, 3) + ")";
    } else {
      r.status = CheckStatus::Fail;
      r.detail = std::to_string(missing - certified) +
                 " grid points without a 1RSB solution and without a non-existence "
                 "certificate (first: " + uncertified + ")";
    }
  });
}

void suite_selection(Runner& run) {
  run.check("8", "selection-probability", 60.0, [](CheckResult& r) {
    double worst = 0.0;
    int combos = 0;
    for (Scheme s : {Scheme::DdUsGaussian, Scheme::DdUsQpsk, Scheme::UsCvpQpsk})
      for (double q : {0.5, 2.0})
        for (int T : {8, 64}) {
          const double kappa = (combos % 2) ? 0.5 : 0.25;
          const SelectionModel m(s, T, q, kappa);
          worst = std::max(worst, std::abs(marginal_selection_probability(m) - kappa));
          ++combos;
        }
    const SelectionModel m(Scheme::DdUsQpsk, 8, 0.5, 0.25);
    RngStream rng(2024, 8);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100; ++i) {
      const SymbolBlock X = sample_symbols(Scheme::DdUsQpsk, 1, 8, rng);
      std::vector<cplx> x(X.data(), X.data() + 8);
      const double p = dd_us_selection_given_symbols(m, x);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    r.status = pass_if(worst <= 1e-9 && hi - lo <= 1e-9);
    r.detail = "max |Pr(s=1) - kappa| = " + fmt(worst, 3) + " over " + std::to_string(combos) +
               " combos; QPSK spread over 100 symbol vectors = " + fmt(hi - lo, 3) + " (tol 1e-9)";
  });
}

// Smallest SNR in dB at which f reaches level, by bisection on [lo, hi].
double snr_for_level(const std::function<double(double)>& f, double level, double lo, double hi) {
  if (f(lo) >= level || f(hi) < level) throw NoRoot("snr_for_level: level not bracketed", lo, hi);
  while (hi - lo > 0.01) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= level ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

void suite_rates(Runner& run) {
  run.check("7", "mutual-information-sanity", 180.0, [](CheckResult& r) {
    const double hi = qpsk_mi(1e6), lo = qpsk_mi(1e-6);
    const double q = 0.5, snr = std::pow(10.0, 0.5);
    const SelectionModel sel(Scheme::DdUsGaussian, 64, q, 1.0);
    const RateParams rp{{4.0, 0.25, 64, Scheme::DdUsGaussian}, snr, Assumption::RS};
    const MiEstimate est = gaussian_mi_selected(rp, sel, 1000000, 7);
    const double ref = std::log2(1.0 + snr / q);
    const double z = std::abs(est.bits - ref) / est.std_error;
    r.status = pass_if(std::abs(hi - 2.0) <= 1e-3 && lo <= 1e-3 && z <= 3.0);
    r.detail = "QPSK MI(60 dB) = " + fmt(hi, 8) + ", MI(-60 dB) = " + fmt(lo, 3) +
               "; Gaussian kappa=1 MI = " + fmt(est.bits, 6) + " +- " + fmt(est.std_error, 2) +
               " vs log2(1+P/(qN0)) = " + fmt(ref, 6) + " (" + fmt(z, 3) + " s.e.)";
  });
  run.check("9", "snr-gain-vs-cvp-rus (advisory)", 0.0, [](CheckResult& r) {
    const double alpha = 4.0;
    OptimizeOptions oo;
    oo.grid_size = 32;
    oo.golden_steps = 12;
    oo.rate.mi_samples = 100000;
    oo.rate.seed = 9;
    oo.q_cache = std::make_shared<QCache>();
    const SystemParams sys{alpha, 0.125, 64, Scheme::DdUsGaussian};
    auto dd = [&](double db) {
      return optimize_kappa(sys, std::pow(10.0, db / 10.0), Assumption::RS, oo).bound;
    };
    auto cvp = [&](double db) { return cvp_rus_optimized(alpha, std::pow(10.0, db / 10.0)); };
    std::ostringstream d;
    bool within = true;
    const double targets[2][2] = {{0.5, 1.2}, {1.0, 1.4}};
    for (const auto& tg : targets) {
      const double s_dd = snr_for_level(dd, tg[0], -20.0, 30.0);
      const double s_cvp = snr_for_level(cvp, tg[0], -20.0, 30.0);
      const double gap = s_cvp - s_dd;
      within = within && std::abs(gap - tg[1]) <= 0.3;
      d << tg[0] << " bit/antenna: dd-us-gaussian " << fmt(s_dd) << " dB, cvp-rus " << fmt(s_cvp)
        << " dB, gap " << fmt(gap, 3) << " dB (target " << tg[1] << " +- 0.3); ";
    }
    r.status = within ? CheckStatus::Pass : CheckStatus::Warn;
    r.detail = d.str() + "cvp-rus curve is a reconstruction";
  });
}

void suite_sim(Runner& run) {
  run.check("4", "order-statistics-oracle", 300.0, [](CheckResult& r) {
    int total = 0, within = 0;
    double worst_z = 0.0;
    std::string worst;
    std::uint64_t seed = 400;
    for (Scheme s : {Scheme::DdUsGaussian, Scheme::DdUsQpsk})
      for (double q : {0.5, 2.0})
        for (double kappa : {0.25, 0.5})
          for (int T : {8, 64}) {
            const OrderStatReport o = order_stat_oracle(s, q, kappa, T, 2000, 200, ++seed);
            const OrderStatSummary a = EnergyCdf(s, T, q).summary(kappa);
            const double z[3] = {std::abs(o.mean - a.mean) / o.mean_se,
                                 std::abs(o.scaled_var - a.variance) / o.scaled_var_se,
                                 std::abs(o.order_stat - a.quantile) / o.order_stat_se};
            for (int k = 0; k < 3; ++k) {
              ++total;
              if (z[k] <= 3.0) ++within;
              if (z[k] > worst_z) {
                worst_z = z[k];
                worst = std::string(scheme_name(s)) + " q=" + fmt(q) + " kappa=" + fmt(kappa) +
                        " T=" + std::to_string(T) + (k == 0 ? " mean" : k == 1 ? " K*var" : " xi");
              }
            }
          }
    r.status = pass_if(within == total);
    r.detail = std::to_string(within) + "/" + std::to_string(total) +
               " statistics within 3 s.e.; largest deviation " + fmt(worst_z, 3) + " s.e. (" + worst + ")";
  });
  run.check("5", "finite-size-zfbf", 120.0, [](CheckResult& r) {
    const SimReport full = empirical_penalty({200, 100, 100, 1, Scheme::DdUsGaussian, 50, 5}, Strategy::ZfbfFull);
    const SimReport rus = empirical_penalty({128, 512, 64, 8, Scheme::DdUsGaussian, 50, 5}, Strategy::ZfbfRus);
    const double e1 = std::abs(full.mean / 2.0 - 1.0), e2 = std::abs(rus.mean / 2.0 - 1.0);
    r.status = pass_if(e1 <= 0.05 && e2 <= 0.05 && full.failed == 0 && rus.failed == 0);
    r.detail = "zfbf-full N=200 K=100: " + fmt(full.mean) + " +- " + fmt(full.std_error, 2) +
               "; zfbf-rus N=128 K=512 Ktilde=64: " + fmt(rus.mean) + " +- " + fmt(rus.std_error, 2) +
               " (target 2.0 within 5%)";
  });
  run.check("6", "greedy-vs-exhaustive", 60.0, [](CheckResult& r) {
    int below = 0;
    std::vector<double> diff;
    double g_sum = 0.0, r_sum = 0.0;
    for (int i = 0; i < 100; ++i) {
      RngStream rng(600, i);
      const ChannelMatrix H = sample_channel(8, 8, rng);
      const SymbolBlock X = sample_symbols(Scheme::DdUsGaussian, 8, 2, rng);
      const double g = greedy_dd_us(H, X, 4).penalty;
      const double e = exhaustive_selection(H, X, 4).penalty;
      const auto users = random_user_selection(8, 4, rng);
      const double rnd = energy_penalty_block(select_rows(H, users), select_rows(X, users));
      if (g < e * (1.0 - 1e-12)) ++below;
      diff.push_back(rnd - g);
      g_sum += g;
      r_sum += rnd;
    }
    double m = 0.0, v = 0.0;
    for (double d : diff) m += d;
    m /= diff.size();
    for (double d : diff) v += (d - m) * (d - m);
    const double se = std::sqrt(v / (diff.size() - 1) / diff.size());
    r.status = pass_if(below == 0 && m > 3.0 * se);
    r.detail = "greedy below exhaustive minimum in " + std::to_string(below) +
               "/100 instances; mean greedy " + fmt(g_sum / 100) + " vs random " + fmt(r_sum / 100) +
               ", paired difference " + fmt(m) + " = " + fmt(m / se, 3) + " s.e.";
  });
  run.check("10", "determinism", 0.0, [](CheckResult& r) {
    SweepConfig sim;
    sim.command = "simulate";
    sim.scheme = Scheme::DdUsQpsk;
    sim.strategy = Strategy::GreedyDdUs;
    sim.N = 16;
    sim.K = 32;
    sim.T = 4;
    sim.trials = 6;
    sim.alphakappa = {0.25, 0.5};
    sim.seed = 10;
    SweepConfig rate;
    rate.command = "rate-sweep";
    rate.T = 8;
    rate.alpha = 2.0;
    rate.alphakappa = {0.3, 0.6};
    rate.snr_db = {0.0, 5.0};
    rate.mi_samples = 20000;
    rate.seed = 10;
    const std::string a = run_simulate(sim).csv;
    sim.threads = 1;
    const std::string b = run_simulate(sim).csv;
    const std::string c = run_rate_sweep(rate).csv;
    rate.threads = 1;
    const std::string d = run_rate_sweep(rate).csv;
    r.status = pass_if(a == b && c == d);
    r.detail = std::string("simulate rerun ") + (a == b ? "identical" : "DIFFERS") + ", rate-sweep rerun " +
               (c == d ? "identical" : "DIFFERS") + " (second runs single-threaded)";
  });
}

}  // namespace

bool ValidationReport::ok() const {
  return std::none_of(results.begin(), results.end(),
                      [](const CheckResult& r) { return r.status == CheckStatus::Fail; });
}

const std::vector<std::string>& validation_suites() {
  static const std::vector<std::string> names{"math", "cdf", "replica", "selection", "rates", "sim", "all"};
  return names;
}

ValidationReport run_validation(const std::string& suite, std::ostream& out) {
  const auto& names = validation_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw std::invalid_argument("unknown suite '" + suite + "'");
  Runner run(out);
  const bool all = suite == "all";
  if (all || suite == "math") suite_math(run);
  if (all || suite == "cdf") suite_cdf(run);
  if (all || suite == "replica") suite_replica(run);
  if (all || suite == "selection") suite_selection(run);
  if (all || suite == "rates") suite_rates(run);
  if (all || suite == "sim") suite_sim(run);
  return run.take();
}

}  // namespace usvp
