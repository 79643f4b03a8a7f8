// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "usvp/errors.hpp"
#include "usvp/mc_sim.hpp"

using namespace usvp;

namespace {

double zf_energy(const ChannelMatrix& H, const Eigen::VectorXcd& x) {
  const Eigen::MatrixXcd G = H * H.adjoint();
  return std::real(x.dot(G.ldlt().solve(x)));
}

// Penalties of all C(K, Kt) subsets.
std::vector<double> all_subset_penalties(const ChannelMatrix& H, const SymbolBlock& X, int Kt) {
  std::vector<double> out;
  const int K = int(H.rows());
  for (unsigned mask = 0; mask < (1u << K); ++mask) {
    if (__builtin_popcount(mask) != Kt) continue;
    std::vector<int> u;
    for (int k = 0; k < K; ++k)
      if (mask & (1u << k)) u.push_back(k);
    out.push_back(energy_penalty_block(select_rows(H, u), select_rows(X, u)));
  }
  return out;
}

}  // namespace

TEST_CASE("sample_channel") {
  RngStream a(1, 0);
  const ChannelMatrix H = sample_channel(4, 2, a);
  CHECK(H.rows() == 2);
  CHECK(H.cols() == 4);
  RngStream b(1, 0);
  CHECK(sample_channel(4, 2, b) == H);

  RngStream rng(2, 0);
  const int N = 1000;
  const ChannelMatrix big = sample_channel(N, 1000, rng);
  const double var = big.squaredNorm() / double(big.size()) - std::norm(big.mean());
  CHECK(var * N == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("zfbf_vector") {
  RngStream rng(3, 0);
  for (int i = 0; i < 20; ++i) {
    const ChannelMatrix H = sample_channel(12, 8, rng);
    const SymbolBlock X = sample_symbols(Scheme::DdUsGaussian, 8, 1, rng);
    const Eigen::VectorXcd x = X.col(0);
    const Eigen::VectorXcd u = zfbf_vector(H, x);
    CHECK((H * u - x).norm() <= 1e-10 * x.norm());
    CHECK(std::abs(u.squaredNorm() - zf_energy(H, x)) <= 1e-10 * u.squaredNorm());
  }
  ChannelMatrix H = sample_channel(6, 3, rng);
  H.row(2) = H.row(0);
  Eigen::VectorXcd inconsistent = Eigen::VectorXcd::Ones(3);
  inconsistent(2) = 2.0;
  CHECK_THROWS_AS(zfbf_vector(H, inconsistent), SingularChannel);
}

TEST_CASE("energy_penalty_block") {
  RngStream rng(4, 0);
  const ChannelMatrix h = sample_channel(5, 1, rng);
  const SymbolBlock x = sample_symbols(Scheme::DdUsGaussian, 1, 1, rng);
  CHECK(energy_penalty_block(h, x) == doctest::Approx(std::norm(x(0, 0)) / h.squaredNorm()).epsilon(1e-12));

  // Orthonormal rows: the penalty is (1/T) sum_t |x_t|^2, unchanged by rotating the block.
  const int K = 4, N = 7, T = 3;
  const Eigen::MatrixXcd Q = sample_channel(N, N, rng).householderQr().householderQ();
  const ChannelMatrix H = Q.topRows(K);
  const SymbolBlock X = sample_symbols(Scheme::DdUsGaussian, K, T, rng);
  CHECK(energy_penalty_block(H, X) == doctest::Approx(X.squaredNorm() / T).epsilon(1e-12));
  const Eigen::MatrixXcd U = sample_channel(K, K, rng).householderQr().householderQ();
  CHECK(energy_penalty_block(H, U * X) == doctest::Approx(X.squaredNorm() / T).epsilon(1e-12));
}

TEST_CASE("random_user_selection") {
  RngStream rng(5, 0);
  std::vector<int> all(10);
  std::iota(all.begin(), all.end(), 0);
  CHECK(random_user_selection(10, 10, rng) == all);

  const int K = 10, Kt = 3, n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const auto u = random_user_selection(K, Kt, rng);
    CHECK_FALSE(u.size() != std::size_t(Kt));
    hits += std::find(u.begin(), u.end(), 1) != u.end();
  }
  const double p = double(Kt) / K;
  CHECK(std::abs(double(hits) / n - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("greedy_dd_us") {
  RngStream rng(6, 0);
  {
    const ChannelMatrix H = sample_channel(6, 5, rng);
    const SymbolBlock X = sample_symbols(Scheme::DdUsGaussian, 5, 3, rng);
    CHECK(greedy_dd_us(H, X, 5).penalty == doctest::Approx(energy_penalty_block(H, X)).epsilon(1e-12));
  }
  for (int i = 0; i < 20; ++i) {
    const ChannelMatrix H = sample_channel(4, 2, rng);
    const SymbolBlock X = sample_symbols(Scheme::DdUsGaussian, 2, 5, rng);
    const double c0 = X.row(0).squaredNorm() / H.row(0).squaredNorm();
    const double c1 = X.row(1).squaredNorm() / H.row(1).squaredNorm();
    const Selection s = greedy_dd_us(H, X, 1);
    REQUIRE(s.users.size() == 1);
    CHECK(s.users[0] == (c0 <= c1 ? 0 : 1));
  }
  for (int i = 0; i < 100; ++i) {
    RngStream r(60, i);
    const ChannelMatrix H = sample_channel(8, 8, r);
    const SymbolBlock X = sample_symbols(Scheme::DdUsQpsk, 8, 2, r);
    const auto pen = all_subset_penalties(H, X, 4);
    const double best = *std::min_element(pen.begin(), pen.end());
    const double avg = std::accumulate(pen.begin(), pen.end(), 0.0) / pen.size();
    const Selection g = greedy_dd_us(H, X, 4);
    CHECK(g.penalty >= best * (1.0 - 1e-12));
    CHECK(g.penalty <= avg);
    CHECK(exhaustive_selection(H, X, 4).penalty == doctest::Approx(best).epsilon(1e-12));

    // The subset chosen by the large-T criterion (smallest Tr of the inverse Gram) never beats the minimum.
    double best_tr = 1e300;
    double pen_tr = 0.0;
    std::size_t idx = 0;
    for (unsigned mask = 0; mask < 256u; ++mask) {
      if (__builtin_popcount(mask) != 4) continue;
      std::vector<int> u;
      for (int k = 0; k < 8; ++k)
        if (mask & (1u << k)) u.push_back(k);
      const ChannelMatrix Hs = select_rows(H, u);
      const double tr = std::real((Hs * Hs.adjoint()).inverse().trace());
      if (tr < best_tr) {
        best_tr = tr;
        pen_tr = pen[idx];
      }
      ++idx;
    }
    CHECK(best <= pen_tr * (1.0 + 1e-12));
  }
}

TEST_CASE("cvp_solve") {
  RngStream rng(8, 0);
  const double b = 0.7071067811865476;
  // Identity Gram and a single user: the corner is optimal.
  {
    const int K = 5;
    const Eigen::MatrixXcd Q = sample_channel(9, 9, rng).householderQr().householderQ();
    const ChannelMatrix H = Q.topRows(K);
    const Eigen::VectorXcd x = sample_symbols(Scheme::DdUsQpsk, K, 1, rng).col(0);
    CHECK((cvp_solve(H, x).x_tilde - x).norm() < 1e-9);
    const ChannelMatrix h = sample_channel(4, 1, rng);
    CHECK((cvp_solve(h, x.head(1)).x_tilde - x.head(1)).norm() < 1e-12);
  }
  for (int i = 0; i < 20; ++i) {
    const ChannelMatrix H = sample_channel(16, 12, rng);
    const Eigen::VectorXcd x = sample_symbols(Scheme::DdUsQpsk, 12, 1, rng).col(0);
    const CvpResult r = cvp_solve(H, x);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      CHECK(r.x_tilde(k).real() * (x(k).real() > 0 ? 1.0 : -1.0) >= b - 1e-12);
      CHECK(r.x_tilde(k).imag() * (x(k).imag() > 0 ? 1.0 : -1.0) >= b - 1e-12);
    }
    CHECK(r.objective <= zf_energy(H, x) * (1.0 + 1e-12));
    CHECK(r.objective == doctest::Approx(zf_energy(H, r.x_tilde)).epsilon(1e-9));
    for (std::size_t j = 1; j < r.history.size(); ++j) CHECK(r.history[j] <= r.history[j - 1] * (1.0 + 1e-12));
  }
  const ChannelMatrix H = sample_channel(10, 10, rng);
  const Eigen::VectorXcd x = sample_symbols(Scheme::DdUsQpsk, 10, 1, rng).col(0);
  try {
    cvp_solve(H, x, CvpOptions{1e-30, 3, 50});
    FAIL("expected NotConverged");
  } catch (const NotConverged& e) {
    CHECK(e.best_iterate.size() == 10);
  }
}

TEST_CASE("empirical_penalty") {
  const SimReport full = empirical_penalty({200, 100, 100, 1, Scheme::DdUsGaussian, 20, 3}, Strategy::ZfbfFull);
  CHECK(full.trials == 20);
  CHECK(full.mean == doctest::Approx(2.0).epsilon(0.05));

  const SimConfig cfg{32, 64, 16, 4, Scheme::DdUsQpsk, 30, 4};
  const SimReport rus = empirical_penalty(cfg, Strategy::ZfbfRus);
  const SimReport greedy = empirical_penalty(cfg, Strategy::GreedyDdUs);
  CHECK(greedy.mean <= rus.mean);
  const SimReport cvp = empirical_penalty(cfg, Strategy::CvpRus);
  CHECK(cvp.trials + cvp.failed == 30);
  CHECK(cvp.mean <= rus.mean);

  const SimReport one = empirical_penalty(cfg, Strategy::GreedyDdUs, 1);
  const SimReport four = empirical_penalty(cfg, Strategy::GreedyDdUs, 4);
  CHECK(one.mean == four.mean);
  CHECK(one.std_error == four.std_error);

  CHECK_THROWS_AS(empirical_penalty({4, 8, 9, 1, Scheme::DdUsGaussian, 1, 1}, Strategy::ZfbfRus), std::invalid_argument);
}

TEST_CASE("order_stat_oracle") {
  const OrderStatReport o = order_stat_oracle(Scheme::DdUsGaussian, 1.0, 0.5, 8, 2000, 100, 12);
  const EnergyCdf m(Scheme::DdUsGaussian, 8, 1.0);
  CHECK(o.Ktilde == 1000);
  CHECK(std::abs(o.mean - m.truncated_mean(0.5)) < 3.0 * o.mean_se);
  CHECK(std::abs(o.scaled_var - m.truncated_variance(0.5)) < 3.0 * o.scaled_var_se);
  CHECK(std::abs(o.order_stat - m.quantile(0.5)) < 3.0 * o.order_stat_se);
}
