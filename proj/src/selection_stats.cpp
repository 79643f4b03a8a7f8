// SPDX-License-Identifier: Apache-2.0
#include "usvp/selection_stats.hpp"

#include "usvp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace usvp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegativeSlack = 1e-8;

// log of the per-slot DD-US conditional charfn 2 i w |x|^2 / (1 - 2 i q w) - log(1 - 2 i q w).
cplx log_slot_given_power(double w, double q, double v) {
  const cplx z(1.0, -2.0 * q * w);
  return cplx(0.0, 2.0 * w * v) / z - std::log(z);
}

// Pr(E <= xi) for a law with characteristic function `kernel`, mean `center`
// and standard deviation `sd`.
double probability_below(HalfLineTransform::Kernel kernel, double center, double sd, double xi,
                         const Quadrature& quad) {
  if (sd <= 0.0) return center <= xi ? 1.0 : 0.0;
  const double reach = std::max(std::abs(xi - center), 14.0 * sd) * 1.05;
  HalfLineTransform tr(std::move(kernel), center, reach, quad);
  return std::clamp(0.5 - tr.sine_integral(xi) / kPi, 0.0, 1.0);
}

void require_dd_us(const SelectionModel& m, const char* what) {
  if (m.scheme() == Scheme::UsCvpQpsk)
    throw std::invalid_argument(std::string(what) + ": requires a DD-US scheme");
}

void require_gaussian(const SelectionModel& m, const char* what) {
  if (m.scheme() != Scheme::DdUsGaussian)
    throw std::invalid_argument(std::string(what) + ": requires dd-us-gaussian");
}

cplx complex_gaussian_density(double r2, cplx variance) {
  return std::exp(-r2 / variance) / (kPi * variance);
}

}  // namespace

SelectionModel::SelectionModel(std::shared_ptr<const EnergyCdf> model, double kappa)
    : model_(std::move(model)), kappa_(kappa) {
  if (!model_) throw std::invalid_argument("SelectionModel: null model");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::domain_error("SelectionModel: kappa must lie in (0,1]");
  xi_ = kappa == 1.0 ? std::numeric_limits<double>::infinity() : model_->quantile(kappa);
}

SelectionModel::SelectionModel(Scheme s, int T, double q, double kappa, const Quadrature& quad)
    : SelectionModel(std::make_shared<const EnergyCdf>(s, T, q, quad), kappa) {}

double marginal_selection_probability(const SelectionModel& m) {
  if (m.kappa() == 1.0) return 1.0;
  return m.model().cdf(m.xi());
}

double dd_us_selection_given_symbols(const SelectionModel& m, const std::vector<cplx>& symbols) {
  require_dd_us(m, "dd_us_selection_given_symbols");
  const int T = m.T();
  if (int(symbols.size()) != T)
    throw std::invalid_argument("dd_us_selection_given_symbols: need exactly T symbols");
  if (m.kappa() == 1.0) return 1.0;
  const double q = m.q();
  std::vector<double> power(T);
  double mean = 0.0, var = 0.0;
  for (int t = 0; t < T; ++t) {
    power[t] = std::norm(symbols[t]);
    mean += power[t] + q;
    var += 2.0 * q * power[t] + q * q;
  }
  mean /= T;
  const double sd = std::sqrt(var) / T;
  auto kernel = [power, q, T](double omega) {
    const double w = omega / (2.0 * T);
    cplx acc = 0.0;
    for (double v : power) acc += log_slot_given_power(w, q, v);
    return std::exp(acc);
  };
  return probability_below(kernel, mean, sd, m.xi(), m.model().quadrature());
}

double dd_us_selection_given_power(const SelectionModel& m, double v) {
  require_gaussian(m, "dd_us_selection_given_power");
  if (v < 0.0) throw std::domain_error("dd_us_selection_given_power: power must be nonnegative");
  if (m.kappa() == 1.0) return 1.0;
  const int T = m.T();
  const double q = m.q();
  const double s2 = (1.0 + q) * (1.0 + q);
  const double mean = ((T - 1) * (1.0 + q) + v + q) / T;
  const double sd = std::sqrt((T - 1) * s2 + 2.0 * q * v + q * q) / T;
  auto kernel = [T, q, v](double omega) {
    const double w = omega / (2.0 * T);
    // Other slots: |x - sqrt(q) z|^2 ~ Exp(1 + q), charfn 1 / (1 - 2 i (1+q) w) per slot.
    const cplx rest = -double(T - 1) * std::log(cplx(1.0, -2.0 * (1.0 + q) * w));
    return std::exp(rest + log_slot_given_power(w, q, v));
  };
  return probability_below(kernel, mean, sd, m.xi(), m.model().quadrature());
}

std::vector<double> modified_power_pdf_given_selected(const SelectionModel& m,
                                                      const std::vector<double>& power_grid) {
  require_gaussian(m, "modified_power_pdf_given_selected");
  std::vector<double> out;
  out.reserve(power_grid.size());
  for (double v : power_grid) {
    if (v < 0.0) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(std::exp(-v) * dd_us_selection_given_power(m, v) / m.kappa());
  }
  return out;
}

std::vector<double> conditional_output_pdf_gaussian(const SelectionModel& m, double snr,
                                                    const std::vector<double>& y_magnitudes) {
  require_gaussian(m, "conditional_output_pdf_gaussian");
  if (!(snr > 0.0)) throw std::domain_error("conditional_output_pdf_gaussian: snr must be positive");
  const double q = m.q();
  if (!(q > 0.0)) throw std::domain_error("conditional_output_pdf_gaussian: q must be positive");
  const double gain = snr / q;
  const double T = m.T();
  std::vector<double> out;
  out.reserve(y_magnitudes.size());
  const HalfLineTransform* tr = m.model().transform();
  for (double r : y_magnitudes) {
    const double r2 = r * r;
    const double head = 0.5 * complex_gaussian_density(r2, gain + 1.0).real();
    if (m.kappa() == 1.0) {
      out.push_back(2.0 * head);
      continue;
    }
    // Selected-output variance P/q sigma^2(w/T) + N0; no square roots enter
    // the complex Gaussian density, so there is no branch to track.
    auto extra = [&](double omega) {
      const double u = omega / T;
      const cplx var = gain * cplx(1.0, -q * u) / cplx(1.0, -(1.0 + q) * u) + 1.0;
      return complex_gaussian_density(r2, var);
    };
    double integral;
    if (tr && !tr->uses_tail()) {
      integral = tr->weighted_sum(extra, m.xi());
    } else {
      // Slow decay: tabulate K * extra per radius so the tail rule applies.
      const Scheme s = m.scheme();
      const int Ti = m.T();
      const EnergyCdf& law = m.model();
      const double reach =
          std::max(std::abs(m.xi() - law.mean()), 14.0 * std::sqrt(law.variance())) * 1.05;
      HalfLineTransform local(
          [=](double omega) {
            const double u = omega / T;
            const cplx var = gain * cplx(1.0, -q * u) / cplx(1.0, -(1.0 + q) * u) + 1.0;
            return energy_charfn(s, Ti, q, omega) * complex_gaussian_density(r2, var);
          },
          law.mean(), reach, law.quadrature());
      integral = local.sine_integral(m.xi());
    }
    const double p = (head - integral / kPi) / m.kappa();
    if (p < -kNegativeSlack)
      throw NonConvergence("conditional_output_pdf_gaussian: negative density", p);
    out.push_back(std::max(0.0, p));
  }
  return out;
}

double conditional_output_pdf_gaussian(const SelectionModel& m, double snr, double y_magnitude) {
  return conditional_output_pdf_gaussian(m, snr, std::vector<double>{y_magnitude}).front();
}

}  // namespace usvp
