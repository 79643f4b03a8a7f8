// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace usvp {

// Root scan found no sign change in the searched range.
class NoRoot : public std::runtime_error {
 public:
  NoRoot(const std::string& what, double lo, double hi)
      : std::runtime_error(what), range_lo(lo), range_hi(hi) {}
  double range_lo;
  double range_hi;
};

// Half-line quadrature hit its panel cap before the integrand decayed.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double partial)
      : std::runtime_error(what), partial_value(partial) {}
  double partial_value;
};

// Iterative solver exhausted its iteration budget; carries the best iterate.
class NotConverged : public std::runtime_error {
 public:
  explicit NotConverged(const std::string& what, std::vector<std::complex<double>> best = {})
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  std::vector<std::complex<double>> best_iterate;
};

// Gram matrix of the selected channel rows is not invertible.
class SingularChannel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace usvp
