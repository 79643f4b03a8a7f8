// SPDX-License-Identifier: Apache-2.0
#include "usvp/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "usvp/errors.hpp"
#include "usvp/parallel.hpp"

namespace usvp {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kSchurFloor = 1e-12;
const double kQpskLevel = 1.0 / std::sqrt(2.0);

Eigen::LLT<Eigen::MatrixXcd> factor_gram(const ChannelMatrix& H) {
  Eigen::LLT<Eigen::MatrixXcd> llt(H * H.adjoint());
  if (llt.info() != Eigen::Success) throw SingularChannel("Gram matrix is not positive definite");
  return llt;
}

Eigen::MatrixXcd inverse_gram(const ChannelMatrix& H) {
  const auto llt = factor_gram(H);
  return llt.solve(Eigen::MatrixXcd::Identity(H.rows(), H.rows()));
}

double quad_form(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& v) {
  return (v.adjoint() * A * v)(0, 0).real();
}

// Clamp each real/imag component onto the half-line that starts at the
// corresponding component of x and points away from zero.
void project_halflines(Eigen::VectorXcd& v, const Eigen::VectorXcd& x) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    double re = v[j].real(), im = v[j].imag();
    re = x[j].real() > 0.0 ? std::max(re, x[j].real()) : std::min(re, x[j].real());
    im = x[j].imag() > 0.0 ? std::max(im, x[j].imag()) : std::min(im, x[j].imag());
    v[j] = cplx(re, im);
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sample_var(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / double(v.size() - 1);
}

}  // namespace

void SimConfig::validate() const {
  std::ostringstream msg;
  if (N < 1) msg << " N must be at least 1;";
  if (K < 1) msg << " K must be at least 1;";
  if (Ktilde < 1) msg << " Ktilde must be at least 1;";
  if (Ktilde > std::min(K, N)) msg << " Ktilde must not exceed min(K, N);";
  if (T < 1) msg << " T must be at least 1;";
  if (trials < 1) msg << " trials must be at least 1;";
  const std::string s = msg.str();
  if (!s.empty()) throw std::invalid_argument("invalid simulation config:" + s);
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::ZfbfFull: return "zfbf-full";
    case Strategy::ZfbfRus: return "zfbf-rus";
    case Strategy::CvpRus: return "cvp-rus";
    case Strategy::GreedyDdUs: return "greedy-dd-us";
  }
  return "";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "zfbf-full") return Strategy::ZfbfFull;
  if (name == "zfbf-rus") return Strategy::ZfbfRus;
  if (name == "cvp-rus") return Strategy::CvpRus;
  if (name == "greedy-dd-us") return Strategy::GreedyDdUs;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

ChannelMatrix sample_channel(int N, int K, RngStream& rng) {
  if (N < 1 || K < 1) throw std::invalid_argument("sample_channel: N and K must be positive");
  ChannelMatrix H(K, N);
  const double var = 1.0 / N;
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n) H(k, n) = rng.complex_gaussian(var);
  return H;
}

SymbolBlock sample_symbols(Scheme s, int users, int T, RngStream& rng) {
  SymbolBlock X(users, T);
  for (int k = 0; k < users; ++k)
    for (int t = 0; t < T; ++t) {
      if (s == Scheme::DdUsGaussian) {
        X(k, t) = rng.complex_gaussian();
      } else {
        const double re = rng.uniform() < 0.5 ? -kQpskLevel : kQpskLevel;
        const double im = rng.uniform() < 0.5 ? -kQpskLevel : kQpskLevel;
        X(k, t) = cplx(re, im);
      }
    }
  return X;
}

Eigen::VectorXcd zfbf_vector(const ChannelMatrix& H, const Eigen::VectorXcd& x) {
  if (H.rows() != x.size()) throw std::invalid_argument("zfbf_vector: size mismatch");
  if (H.rows() > H.cols()) throw SingularChannel("more selected users than antennas");
  const auto llt = factor_gram(H);
  const Eigen::VectorXcd u = H.adjoint() * llt.solve(x);
  if ((H * u - x).norm() > kResidualTol * std::max(x.norm(), std::numeric_limits<double>::min()))
    throw SingularChannel("zero-forcing residual above tolerance");
  return u;
}

double energy_penalty_block(const ChannelMatrix& H, const SymbolBlock& X) {
  if (H.rows() != X.rows()) throw std::invalid_argument("energy_penalty_block: size mismatch");
  double total = 0.0;
  for (Eigen::Index t = 0; t < X.cols(); ++t) total += zfbf_vector(H, X.col(t)).squaredNorm();
  return total / double(X.cols());
}

ChannelMatrix select_rows(const ChannelMatrix& M, const std::vector<int>& users) {
  ChannelMatrix out(users.size(), M.cols());
  for (std::size_t i = 0; i < users.size(); ++i) out.row(i) = M.row(users[i]);
  return out;
}

std::vector<int> random_user_selection(int K, int Ktilde, RngStream& rng) {
  if (Ktilde < 0 || Ktilde > K) throw std::invalid_argument("random_user_selection: need 0 <= Ktilde <= K");
  std::vector<int> all(K);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < Ktilde; ++i) {
    const int j = i + int(rng.index(std::uint64_t(K - i)));
    std::swap(all[i], all[j]);
  }
  all.resize(Ktilde);
  std::sort(all.begin(), all.end());
  return all;
}

Selection greedy_dd_us(const ChannelMatrix& H, const SymbolBlock& X, int Ktilde) {
  const int K = int(H.rows());
  const int T = int(X.cols());
  if (X.rows() != K) throw std::invalid_argument("greedy_dd_us: size mismatch");
  if (Ktilde < 1 || Ktilde > std::min<int>(K, int(H.cols())))
    throw std::invalid_argument("greedy_dd_us: need 1 <= Ktilde <= min(K, N)");
  const Eigen::MatrixXcd G = H * H.adjoint();
  std::vector<int> chosen;
  std::vector<char> used(K, 0);
  Eigen::MatrixXcd A(0, 0);   // inverse Gram of the chosen rows
  Eigen::MatrixXcd XS(0, T);  // their symbols
  double penalty = 0.0;
  for (int step = 0; step < Ktilde; ++step) {
    const int n = int(chosen.size());
    int best = -1;
    double best_delta = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd best_b;
    double best_s = 0.0;
    for (int k = 0; k < K; ++k) {
      if (used[k]) continue;
      Eigen::VectorXcd g(n);
      for (int i = 0; i < n; ++i) g[i] = G(chosen[i], k);
      const double c = G(k, k).real();
      const Eigen::VectorXcd b = A * g;
      const double s = c - g.dot(b).real();
      if (!(s > kSchurFloor * c)) continue;
      const Eigen::RowVectorXcd r = X.row(k) - b.adjoint() * XS;
      const double delta = r.squaredNorm() / (s * T);
      if (delta < best_delta) {
        best_delta = delta;
        best = k;
        best_b = b;
        best_s = s;
      }
    }
    if (best < 0) throw SingularChannel("greedy_dd_us: no candidate keeps the Gram matrix invertible");
    Eigen::MatrixXcd A2(n + 1, n + 1);
    A2.topLeftCorner(n, n) = A + best_b * best_b.adjoint() / best_s;
    A2.topRightCorner(n, 1) = -best_b / best_s;
    A2.bottomLeftCorner(1, n) = -best_b.adjoint() / best_s;
    A2(n, n) = 1.0 / best_s;
    A.swap(A2);
    XS.conservativeResize(n + 1, Eigen::NoChange);
    XS.row(n) = X.row(best);
    chosen.push_back(best);
    used[best] = 1;
    penalty += best_delta;
  }
  Selection out;
  out.users = chosen;
  out.penalty = energy_penalty_block(select_rows(H, chosen), select_rows(X, chosen));
  return out;
}

Selection exhaustive_selection(const ChannelMatrix& H, const SymbolBlock& X, int Ktilde) {
  const int K = int(H.rows());
  if (K > 24) throw std::invalid_argument("exhaustive_selection: K too large");
  if (Ktilde < 1 || Ktilde > std::min<int>(K, int(H.cols())))
    throw std::invalid_argument("exhaustive_selection: need 1 <= Ktilde <= min(K, N)");
  std::vector<char> mask(K, 0);
  std::fill(mask.begin(), mask.begin() + Ktilde, 1);
  Selection best;
  best.penalty = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> users;
    for (int k = 0; k < K; ++k)
      if (mask[k]) users.push_back(k);
    try {
      const double p = energy_penalty_block(select_rows(H, users), select_rows(X, users));
      if (p < best.penalty) {
        best.penalty = p;
        best.users = users;
      }
    } catch (const SingularChannel&) {
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  if (best.users.empty()) throw SingularChannel("exhaustive_selection: every subset is singular");
  return best;
}

CvpResult cvp_solve(const ChannelMatrix& H, const Eigen::VectorXcd& x, const CvpOptions& opt) {
  if (H.rows() != x.size()) throw std::invalid_argument("cvp_solve: size mismatch");
  const Eigen::MatrixXcd A = inverse_gram(H);
  const Eigen::Index n = x.size();
  // Largest eigenvalue of A by power iteration; the gradient 2 A v is
  // 2 lambda_max-Lipschitz.  The margin covers the power-iteration shortfall.
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n) / std::sqrt(double(n));
  double lambda = 0.0;
  for (int i = 0; i < opt.power_iterations; ++i) {
    const Eigen::VectorXcd w = A * v;
    lambda = w.norm();
    if (lambda == 0.0) break;
    v = w / lambda;
  }
  double step = 1.0 / (2.0 * lambda * 1.05);

  // Accelerated projected gradient with adaptive restart: momentum is
  // dropped whenever the extrapolated step fails to decrease the objective,
  // so the accepted objective never increases.
  CvpResult res;
  Eigen::VectorXcd cur = x;
  double f_cur = quad_form(A, cur);
  Eigen::VectorXcd y = cur;
  double t = 1.0;
  const double scale = std::max(1.0, x.norm());
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::VectorXcd z = y - step * 2.0 * (A * y);
    project_halflines(z, x);
    const double f_z = quad_form(A, z);
    if (f_z > f_cur) {
      if (y != cur) {
        y = cur;
        t = 1.0;
        continue;
      }
      if (f_z > f_cur + 1e-12 * std::abs(f_cur)) {
        // Plain gradient step went uphill: L was underestimated.
        step *= 0.5;
        continue;
      }
      // A plain projected step no longer lowers the objective beyond
      // rounding: stationary to working precision.
      res.history.push_back(f_cur);
      res.iterations = it;
      res.x_tilde = cur;
      res.objective = f_cur;
      return res;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = z + ((t - 1.0) / t_next) * (z - cur);
      t = t_next;
      cur = z;
      f_cur = f_z;
    }
    res.history.push_back(f_cur);
    res.iterations = it;
    // Projected-gradient norm at the accepted iterate.
    Eigen::VectorXcd p = cur - step * 2.0 * (A * cur);
    project_halflines(p, x);
    if ((cur - p).norm() / step <= opt.tol * scale) {
      res.x_tilde = cur;
      res.objective = f_cur;
      return res;
    }
  }
  throw NotConverged("cvp_solve: iteration cap reached",
                     std::vector<std::complex<double>>(cur.data(), cur.data() + n));
}

SimReport empirical_penalty(const SimConfig& cfg, Strategy strategy, unsigned threads) {
  cfg.validate();
  if (strategy == Strategy::ZfbfFull && cfg.K > cfg.N)
    throw std::invalid_argument("empirical_penalty: zfbf-full needs K <= N");
  if (strategy == Strategy::CvpRus && cfg.scheme == Scheme::DdUsGaussian)
    throw std::invalid_argument("empirical_penalty: cvp-rus needs QPSK symbols");
  const int Kt = strategy == Strategy::ZfbfFull ? cfg.K : cfg.Ktilde;
  std::vector<double> value(cfg.trials, std::numeric_limits<double>::quiet_NaN());
  parallel_for(
      std::size_t(cfg.trials),
      [&](std::size_t i) {
        RngStream rng(cfg.seed, i);
        const ChannelMatrix H = sample_channel(cfg.N, cfg.K, rng);
        const SymbolBlock X = sample_symbols(cfg.scheme, cfg.K, cfg.T, rng);
        try {
          double energy = 0.0;
          switch (strategy) {
            case Strategy::ZfbfFull:
              energy = energy_penalty_block(H, X);
              break;
            case Strategy::ZfbfRus: {
              const auto users = random_user_selection(cfg.K, Kt, rng);
              energy = energy_penalty_block(select_rows(H, users), select_rows(X, users));
              break;
            }
            case Strategy::CvpRus: {
              const auto users = random_user_selection(cfg.K, Kt, rng);
              const ChannelMatrix HS = select_rows(H, users);
              const SymbolBlock XS = select_rows(X, users);
              for (int t = 0; t < cfg.T; ++t) energy += cvp_solve(HS, XS.col(t)).objective;
              energy /= cfg.T;
              break;
            }
            case Strategy::GreedyDdUs:
              energy = greedy_dd_us(H, X, Kt).penalty;
              break;
          }
          value[i] = energy / Kt;
        } catch (const SingularChannel&) {
        } catch (const NotConverged&) {
        }
      },
      threads);
  std::vector<double> ok;
  for (double v : value)
    if (!std::isnan(v)) ok.push_back(v);
  SimReport r;
  r.trials = int(ok.size());
  r.failed = cfg.trials - r.trials;
  r.Ktilde = Kt;
  r.seed = cfg.seed;
  if (!ok.empty()) {
    r.mean = mean_of(ok);
    r.std_error = std::sqrt(sample_var(ok, r.mean) / double(ok.size()));
  }
  return r;
}

double sample_user_energy(Scheme s, double q, int T, RngStream& rng) {
  const double r = std::sqrt(q);
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    const cplx z = rng.complex_gaussian();
    switch (s) {
      case Scheme::DdUsGaussian:
        total += std::norm(rng.complex_gaussian() - r * z);
        break;
      case Scheme::DdUsQpsk: {
        const double re = rng.uniform() < 0.5 ? -kQpskLevel : kQpskLevel;
        const double im = rng.uniform() < 0.5 ? -kQpskLevel : kQpskLevel;
        total += std::norm(cplx(re, im) - r * z);
        break;
      }
      case Scheme::UsCvpQpsk: {
        // By symmetry take x = (1+i)/sqrt2; each component may move outward.
        const double dre = std::max(0.0, kQpskLevel - r * z.real());
        const double dim = std::max(0.0, kQpskLevel - r * z.imag());
        total += dre * dre + dim * dim;
        break;
      }
    }
  }
  return total / T;
}

OrderStatReport order_stat_oracle(Scheme s, double q, double kappa, int T, int K, int trials,
                                  std::uint64_t seed) {
  if (!(q >= 0.0)) throw std::domain_error("order_stat_oracle: q must be nonnegative");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::domain_error("order_stat_oracle: kappa must lie in (0,1]");
  if (T < 1 || K < 1 || trials < 2) throw std::invalid_argument("order_stat_oracle: need T, K >= 1 and trials >= 2");
  const int Kt = std::max(1, int(std::lround(kappa * K)));
  std::vector<double> trimmed(trials), order(trials);
  parallel_for(std::size_t(trials), [&](std::size_t i) {
    RngStream rng(seed, i);
    std::vector<double> e(K);
    for (auto& v : e) v = sample_user_energy(s, q, T, rng);
    std::nth_element(e.begin(), e.begin() + (Kt - 1), e.end());
    const double kth = e[Kt - 1];
    double sum = kth;
    for (int k = 0; k < Kt - 1; ++k) sum += e[k];
    trimmed[i] = sum / K;
    order[i] = kth;
  });
  OrderStatReport r;
  r.Ktilde = Kt;
  r.trials = trials;
  const double n = trials;
  r.mean = mean_of(trimmed);
  const double var = sample_var(trimmed, r.mean);
  r.mean_se = std::sqrt(var / n);
  r.scaled_var = K * var;
  // Standard error of a sample variance from the fourth central moment; the
  // normal-theory value sqrt(2/(n-1)) var understates it for skewed E_K.
  double m4 = 0.0;
  for (double v : trimmed) m4 += std::pow(v - r.mean, 4);
  m4 /= n;
  r.scaled_var_se = K * std::sqrt(std::max(0.0, m4 - var * var * (n - 3.0) / (n - 1.0)) / n);
  r.order_stat = mean_of(order);
  r.order_stat_se = std::sqrt(sample_var(order, r.order_stat) / n);
  return r;
}

}  // namespace usvp
