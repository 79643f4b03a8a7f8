// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>
#include <vector>

#include "usvp/charfn_cdf.hpp"

namespace usvp {

using ChannelMatrix = Eigen::MatrixXcd;  // K x N, row k is user k
using SymbolBlock = Eigen::MatrixXcd;    // users x T, column t is slot t

struct SimConfig {
  int N = 64;
  int K = 256;
  int Ktilde = 32;
  int T = 64;
  Scheme scheme = Scheme::DdUsGaussian;
  int trials = 50;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimReport {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;  // successful trials
  int failed = 0;
  int Ktilde = 0;
  std::uint64_t seed = 0;
};

enum class Strategy { ZfbfFull, ZfbfRus, CvpRus, GreedyDdUs };
std::string_view strategy_name(Strategy s);  // zfbf-full, zfbf-rus, cvp-rus, greedy-dd-us
Strategy parse_strategy(std::string_view name);

// K x N, i.i.d. CN(0, 1/N).
ChannelMatrix sample_channel(int N, int K, RngStream& rng);

// users x T block of data symbols: CN(0,1) for Gaussian signaling, unit-energy
// QPSK otherwise.
SymbolBlock sample_symbols(Scheme s, int users, int T, RngStream& rng);

// u = H^H (H H^H)^{-1} x.  Throws SingularChannel if the Gram matrix is not
// positive definite or the zero-forcing residual exceeds 1e-10 ||x||.
Eigen::VectorXcd zfbf_vector(const ChannelMatrix& H, const Eigen::VectorXcd& x);

// (1/T) sum_t ||u_t||^2 over the columns of the block.
double energy_penalty_block(const ChannelMatrix& H, const SymbolBlock& X);

// Rows of H / X restricted to a user set.
ChannelMatrix select_rows(const ChannelMatrix& M, const std::vector<int>& users);

// Uniform Ktilde-subset of {0..K-1}, sorted.
std::vector<int> random_user_selection(int K, int Ktilde, RngStream& rng);

struct Selection {
  std::vector<int> users;  // in order of selection
  double penalty = 0.0;    // (1/T) sum_t ||u_t||^2 of the selected block
};

// Forward greedy: adds, one at a time, the user whose inclusion gives the
// smallest block penalty, with rank-1 updates of the inverse Gram matrix.
// Ties go to the lowest user index.
Selection greedy_dd_us(const ChannelMatrix& H, const SymbolBlock& X, int Ktilde);

// Minimum block penalty over all Ktilde-subsets.  Exponential; small K only.
Selection exhaustive_selection(const ChannelMatrix& H, const SymbolBlock& X, int Ktilde);

struct CvpOptions {
  double tol = 1e-9;
  int max_iterations = 10000;
  int power_iterations = 50;
};

struct CvpResult {
  Eigen::VectorXcd x_tilde;
  double objective = 0.0;  // x~^H (H H^H)^{-1} x~
  int iterations = 0;
  std::vector<double> history;  // objective after every iteration
};

// Minimizes x~^H (H H^H)^{-1} x~ over the half-line relaxation of QPSK
// symbols x by projected gradient with step 1/L.  Throws NotConverged with
// the best iterate when the iteration cap is reached.
CvpResult cvp_solve(const ChannelMatrix& H, const Eigen::VectorXcd& x, const CvpOptions& opt = {});

// Monte-Carlo mean of the per-selected-user penalty.  Trial i uses the stream
// (seed, i), so results do not depend on scheduling.
SimReport empirical_penalty(const SimConfig& cfg, Strategy strategy, unsigned threads = 0);

struct OrderStatReport {
  double mean = 0.0, mean_se = 0.0;            // of E_K
  double scaled_var = 0.0, scaled_var_se = 0.0;  // K * Var(E_K)
  double order_stat = 0.0, order_stat_se = 0.0;  // Ktilde-th smallest E_k
  int Ktilde = 0;
  int trials = 0;
};

// Draws K energies E_k(q) of the decoupled problem per trial, keeps the
// Ktilde = round(kappa K) smallest, and reports the trimmed-sum statistics.
OrderStatReport order_stat_oracle(Scheme s, double q, double kappa, int T, int K, int trials,
                                  std::uint64_t seed);

// One draw of E_k(q) = (1/T) sum_t min |x~ - sqrt(q) z|^2.
double sample_user_energy(Scheme s, double q, int T, RngStream& rng);

}  // namespace usvp
