// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "usvp/mc_sim.hpp"
#include "usvp/rate_bounds.hpp"

namespace usvp {

// "a:b:n" (n evenly spaced points, both ends included) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& text);

// Column headers for each command.
extern const char* const kPenaltyColumns;
extern const char* const kRateColumns;
extern const char* const kSimulateColumns;

struct SweepConfig {
  std::string command;  // penalty-sweep | rate-sweep | simulate | validate
  Scheme scheme = Scheme::DdUsGaussian;
  std::vector<Assumption> assumptions{Assumption::RS};
  double alpha = 4.0;
  std::vector<double> alphakappa{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int T = 64;
  std::vector<double> snr_db{5.0};
  int N = 64;
  int K = 256;
  int trials = 50;
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::ZfbfRus;
  std::size_t mi_samples = 1000000;
  std::string suite = "all";
  std::string out;  // empty: stdout
  unsigned threads = 0;

  // Every violated invariant, one message each.
  std::vector<std::string> problems() const;
};

struct SweepOutput {
  std::string csv;  // header + one LF-terminated row per grid point
  int points = 0;
  int failed = 0;   // rows whose status is not "ok"
};

using Logger = std::function<void(const std::string&)>;

SweepOutput run_penalty_sweep(const SweepConfig& cfg, const Logger& log = {});
SweepOutput run_rate_sweep(const SweepConfig& cfg, const Logger& log = {});
SweepOutput run_simulate(const SweepConfig& cfg, const Logger& log = {});

// 12 significant digits, shortest form ("%.12g").
std::string format_number(double v);

// Per-point stream seed derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace usvp
