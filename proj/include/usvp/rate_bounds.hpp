// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "usvp/replica_solver.hpp"
#include "usvp/selection_stats.hpp"

namespace usvp {

enum class Assumption { RS, OneRSB };

std::string_view assumption_name(Assumption a);  // "rs" / "1rsb"
Assumption parse_assumption(std::string_view name);

struct RateParams {
  SystemParams sys;
  double snr = 1.0;  // P / N0, linear
  Assumption assumption = Assumption::RS;
};

struct MiEstimate {
  double bits = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct RateResult {
  double mi_selected = 0.0;  // bits per slot
  double mi_std_error = 0.0;
  double bound = 0.0;  // bits per transmit antenna
  double kappa_used = 0.0;
  double q_used = 0.0;
};

struct RateOptions {
  SolverOptions solver{};
  std::size_t mi_samples = 1000000;  // selected slots for Gaussian signaling
  std::uint64_t seed = 1;
  // Optional precomputed q for the given (sys, assumption); skips the solve.
  std::optional<double> q_override;
};

// -k log2 k - (1-k) log2(1-k).
double binary_entropy(double kappa);

// I(x; sqrt(snr_eff) x + n) for QPSK with unit symbol energy, n ~ CN(0,1).
double qpsk_mi(double snr_eff);

// QPSK mutual information of the equivalent channel at effective SNR snr/q.
double qpsk_mi_selected(const RateParams& rp, double q);

// Monte-Carlo estimate of I(x; y | s = 1) for DD-US Gaussian signaling.
MiEstimate gaussian_mi_selected(const RateParams& rp, const SelectionModel& sel,
                                std::size_t samples = 1000000, std::uint64_t seed = 1);

// q0 or q1 for the system.
double solve_q(const SystemParams& sys, Assumption a, const SolverOptions& opt = {});

// alpha (H(kappa)/T + kappa I(x; y | s = 1)).
RateResult sum_rate_bound_dd_us(const RateParams& rp, const RateOptions& opt = {});

class QCache {
 public:
  std::optional<double> find(double alphakappa) const;
  void store(double alphakappa, double q);

 private:
  mutable std::mutex mu_;
  std::map<long long, double> values_;
};

struct OptimizeOptions {
  int grid_size = 64;
  double alphakappa_min = 0.01;
  double alphakappa_max = 0.99;
  int golden_steps = 20;
  RateOptions rate{};
  // q keyed by alpha*kappa grid value.  q does not depend on the SNR, so an
  // SNR search can share one cache across calls.  Null disables caching.
  std::shared_ptr<QCache> q_cache;
  std::function<void(const std::string&)> log;
};

// Maximizes the bound over kappa: plain grid over alpha*kappa followed by a
// golden-section refinement around the best grid point.  Failing points are
// skipped and reported through opt.log.
RateResult optimize_kappa(const SystemParams& sys, double snr, Assumption a,
                          const OptimizeOptions& opt = {});

// Random user selection with CVP over QPSK in the infinite-block limit:
// alpha kappa I_QPSK(snr / q), q from the T -> inf fixed point.
double cvp_rus_rate(double alpha, double alphakappa, double snr);
// Maximum of cvp_rus_rate over alpha*kappa on the same grid + refinement.
double cvp_rus_optimized(double alpha, double snr, int grid_size = 64);

}  // namespace usvp
