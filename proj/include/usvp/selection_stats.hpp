// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "usvp/charfn_cdf.hpp"

namespace usvp {

// Selection rule of the decoupled problem at a fixed q: a user is selected
// when its energy E_k(q) falls below the kappa-quantile xi.  kappa = 1 means
// every user is selected (xi = +inf).
class SelectionModel {
 public:
  SelectionModel(std::shared_ptr<const EnergyCdf> model, double kappa);
  SelectionModel(Scheme s, int T, double q, double kappa, const Quadrature& quad = {});

  Scheme scheme() const { return model_->scheme(); }
  int T() const { return model_->T(); }
  double q() const { return model_->q(); }
  double kappa() const { return kappa_; }
  double xi() const { return xi_; }
  const EnergyCdf& model() const { return *model_; }

 private:
  std::shared_ptr<const EnergyCdf> model_;
  double kappa_;
  double xi_;
};

// Pr(s_k = 1) = F(xi), which is kappa by construction.
double marginal_selection_probability(const SelectionModel& m);

// Pr(s_k = 1 | x_k) for DD-US, where E_k given the symbols is
// (1/T) sum_t |x_t - sqrt(q) z_t|^2.  symbols.size() must equal T.
double dd_us_selection_given_symbols(const SelectionModel& m, const std::vector<cplx>& symbols);

// Pr(s_k = 1 | |x_t|^2 = v) for one slot of a DD-US Gaussian user, the other
// T - 1 slots averaged over the prior.
double dd_us_selection_given_power(const SelectionModel& m, double v);

// p(|x~|^2 = v | s = 1) for DD-US Gaussian: e^{-v} Pr(s = 1 | v) / kappa.
std::vector<double> modified_power_pdf_given_selected(const SelectionModel& m,
                                                      const std::vector<double>& power_grid);

// p(y | s = 1) at |y| = y_magnitude for DD-US Gaussian over
// y = sqrt(P/q) x + n, n ~ CN(0, 1); snr = P / N0 with N0 = 1.
double conditional_output_pdf_gaussian(const SelectionModel& m, double snr, double y_magnitude);

// Same density on many radii, sharing the phase tables.
std::vector<double> conditional_output_pdf_gaussian(const SelectionModel& m, double snr,
                                                    const std::vector<double>& y_magnitudes);

}  // namespace usvp
