// SPDX-License-Identifier: Apache-2.0
#include "usvp/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "usvp/parallel.hpp"

namespace usvp {

const char* const kPenaltyColumns =
    "scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status";
const char* const kRateColumns =
    "scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status,"
    "snr_db,mi_bits,bound_bits,kappa_opt";
const char* const kSimulateColumns =
    "scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status,"
    "N,K,Ktilde,trials,mean,std_err,seed";

namespace {

constexpr const char* kSkipReason = "skipped: ακ < 1 required";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string num_or_empty(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

struct Row {
  std::vector<std::string> fields;
  bool ok = false;
};

std::string join(const std::vector<std::string>& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) s += ',';
    s += csv_field(f[i]);
  }
  return s;
}

SweepOutput assemble(const char* header, const std::vector<Row>& rows) {
  SweepOutput out;
  out.csv = std::string(header) + "\n";
  for (const auto& r : rows) {
    out.csv += join(r.fields) + "\n";
    ++out.points;
    if (!r.ok) ++out.failed;
  }
  return out;
}

std::vector<std::string> base_fields(const SweepConfig& cfg, const std::string& assumption,
                                     double ak) {
  return {std::string(scheme_name(cfg.scheme)), assumption, format_number(cfg.alpha),
          format_number(ak / cfg.alpha), format_number(ak), std::to_string(cfg.T)};
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> parse_grid(const std::string& text) {
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument("bad number '" + s + "' in grid '" + text + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("grid '" + text + "' must be a:b:n");
    const double a = to_double(parts[0]), b = to_double(parts[1]);
    const double nd = to_double(parts[2]);
    const int n = int(nd);
    if (n < 1 || double(n) != nd) throw std::invalid_argument("grid '" + text + "': n must be a positive integer");
    if (n == 1) return {a};
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

std::vector<std::string> SweepConfig::problems() const {
  std::vector<std::string> p;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) p.push_back("alpha must be positive");
  if (T < 1) p.push_back("T must be at least 1");
  if (alphakappa.empty()) p.push_back("alphakappa-grid must be nonempty");
  for (double ak : alphakappa)
    if (!(ak > 0.0)) p.push_back("alphakappa-grid values must be positive (got " + format_number(ak) + ")");
  if (assumptions.empty()) p.push_back("assumption must be rs, 1rsb or both");
  if (command == "rate-sweep") {
    if (snr_db.empty()) p.push_back("snr-db-grid must be nonempty");
    if (scheme != Scheme::UsCvpQpsk && mi_samples < 2) p.push_back("mi-samples must be at least 2");
  }
  if (command == "simulate") {
    if (N < 1) p.push_back("N must be at least 1");
    if (K < 1) p.push_back("K must be at least 1");
    if (trials < 1) p.push_back("trials must be at least 1");
    if (strategy == Strategy::CvpRus && scheme == Scheme::DdUsGaussian)
      p.push_back("strategy cvp-rus needs a QPSK scheme");
    if (strategy == Strategy::ZfbfFull && K > N) p.push_back("strategy zfbf-full needs K <= N");
  }
  return p;
}

SweepOutput run_penalty_sweep(const SweepConfig& cfg, const Logger& log) {
  struct Point {
    Assumption a;
    double ak;
  };
  std::vector<Point> pts;
  for (Assumption a : cfg.assumptions)
    for (double ak : cfg.alphakappa) pts.push_back({a, ak});
  std::vector<Row> rows(pts.size());
  parallel_for(
      pts.size(),
      [&](std::size_t i) {
        const auto [a, ak] = pts[i];
        Row& row = rows[i];
        row.fields = base_fields(cfg, std::string(assumption_name(a)), ak);
        std::optional<double> q, pen, res;
        std::string status = "ok";
        if (!(ak < 1.0)) {
          status = kSkipReason;
        } else {
          try {
            const SystemParams p{cfg.alpha, ak / cfg.alpha, cfg.T, cfg.scheme};
            if (a == Assumption::RS) {
              const RsSolution s = solve_rs(p);
              q = s.q0;
              pen = s.penalty_per_user;
              res = s.residual;
            } else {
              const OneRsbSolution s = solve_1rsb(p);
              q = s.q1;
              pen = s.penalty_per_user;
              res = std::max(std::abs(s.residual_log), std::abs(s.residual_ratio));
            }
            row.ok = true;
          } catch (const std::exception& e) {
            status = std::string("error: ") + e.what();
          }
        }
        row.fields.insert(row.fields.end(), {num_or_empty(q), num_or_empty(pen), num_or_empty(res), status});
      },
      cfg.threads);
  for (const auto& r : rows)
    if (!r.ok && log) log(join(r.fields));
  return assemble(kPenaltyColumns, rows);
}

SweepOutput run_rate_sweep(const SweepConfig& cfg, const Logger& log) {
  const bool cvp = cfg.scheme == Scheme::UsCvpQpsk;
  std::vector<Assumption> assumptions = cvp ? std::vector<Assumption>{Assumption::RS} : cfg.assumptions;
  const std::size_t nak = cfg.alphakappa.size();
  // q is independent of the SNR: solve once per (assumption, alpha*kappa).
  struct QPoint {
    std::optional<double> q, pen, res;
    std::string status = "ok";
  };
  std::vector<QPoint> qs(assumptions.size() * nak);
  parallel_for(
      qs.size(),
      [&](std::size_t i) {
        const Assumption a = assumptions[i / nak];
        const double ak = cfg.alphakappa[i % nak];
        QPoint& qp = qs[i];
        if (!(ak < 1.0)) {
          qp.status = kSkipReason;
          return;
        }
        try {
          if (cvp) {
            const RsSolution s = solve_rs_T_inf(cfg.scheme, cfg.alpha, ak / cfg.alpha);
            qp.q = s.q0;
            qp.pen = s.penalty_per_user;
            qp.res = s.residual;
          } else {
            const SystemParams p{cfg.alpha, ak / cfg.alpha, cfg.T, cfg.scheme};
            if (a == Assumption::RS) {
              const RsSolution s = solve_rs(p);
              qp.q = s.q0;
              qp.pen = s.penalty_per_user;
              qp.res = s.residual;
            } else {
              const OneRsbSolution s = solve_1rsb(p);
              qp.q = s.q1;
              qp.pen = s.penalty_per_user;
              qp.res = std::max(std::abs(s.residual_log), std::abs(s.residual_ratio));
            }
          }
        } catch (const std::exception& e) {
          qp.status = std::string("error: ") + e.what();
        }
      },
      cfg.threads);

  const std::size_t nsnr = cfg.snr_db.size();
  std::vector<Row> rows(assumptions.size() * nsnr * nak);
  std::vector<std::optional<double>> bound(rows.size()), mi(rows.size());
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        const std::size_t ia = i / (nsnr * nak), is = (i / nak) % nsnr, ik = i % nak;
        const Assumption a = assumptions[ia];
        const double ak = cfg.alphakappa[ik];
        const double snr = std::pow(10.0, cfg.snr_db[is] / 10.0);
        QPoint qp = qs[ia * nak + ik];
        if (qp.q) {
          try {
            if (cvp) {
              mi[i] = qpsk_mi(snr / *qp.q);
              bound[i] = ak * *mi[i];
            } else {
              RateParams rp{{cfg.alpha, ak / cfg.alpha, cfg.T, cfg.scheme}, snr, a};
              RateOptions ro;
              ro.mi_samples = cfg.mi_samples;
              ro.seed = derive_seed(cfg.seed, ik);  // common random numbers across SNRs
              ro.q_override = *qp.q;
              const RateResult r = sum_rate_bound_dd_us(rp, ro);
              mi[i] = r.mi_selected;
              bound[i] = r.bound;
            }
          } catch (const std::exception& e) {
            qp.status = std::string("error: ") + e.what();
          }
        }
        rows[i].ok = qp.status == "ok";
        rows[i].fields = base_fields(cfg, cvp ? "rus" : std::string(assumption_name(a)), ak);
        rows[i].fields.insert(rows[i].fields.end(),
                              {num_or_empty(qp.q), num_or_empty(qp.pen), num_or_empty(qp.res),
                               qp.status, format_number(cfg.snr_db[is]), num_or_empty(mi[i]),
                               num_or_empty(bound[i])});
      },
      cfg.threads);
  // kappa_opt: maximizer of the bound over the alpha*kappa grid at each SNR.
  for (std::size_t ia = 0; ia < assumptions.size(); ++ia)
    for (std::size_t is = 0; is < nsnr; ++is) {
      std::optional<std::size_t> best;
      for (std::size_t ik = 0; ik < nak; ++ik) {
        const std::size_t i = (ia * nsnr + is) * nak + ik;
        if (bound[i] && (!best || *bound[i] > *bound[*best])) best = i;
      }
      const std::string k = best ? format_number(cfg.alphakappa[*best % nak] / cfg.alpha) : "";
      for (std::size_t ik = 0; ik < nak; ++ik) rows[(ia * nsnr + is) * nak + ik].fields.push_back(k);
    }
  for (const auto& r : rows)
    if (!r.ok && log) log(join(r.fields));
  return assemble(kRateColumns, rows);
}

SweepOutput run_simulate(const SweepConfig& cfg, const Logger& log) {
  std::vector<double> grid = cfg.alphakappa;
  if (cfg.strategy == Strategy::ZfbfFull) grid = {double(cfg.K) / cfg.N};
  const double alpha = double(cfg.K) / cfg.N;
  std::vector<Row> rows(grid.size());
  // Trials already run in parallel inside empirical_penalty.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ak = grid[i];
    Row& row = rows[i];
    SweepConfig view = cfg;
    view.alpha = alpha;
    row.fields = base_fields(view, std::string(strategy_name(cfg.strategy)), ak);
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    const int Kt = cfg.strategy == Strategy::ZfbfFull ? cfg.K : int(std::lround(ak * cfg.N));
    std::optional<double> mean, se, pen;
    std::string status = "ok";
    int trials = 0;
    if (cfg.strategy != Strategy::ZfbfFull && !(ak < 1.0)) {
      status = kSkipReason;
    } else {
      try {
        SimConfig sc{cfg.N, cfg.K, Kt, cfg.T, cfg.scheme, cfg.trials, seed};
        const SimReport r = empirical_penalty(sc, cfg.strategy, cfg.threads);
        trials = r.trials;
        if (r.trials == 0) {
          status = "error: every trial failed";
        } else {
          mean = r.mean;
          se = r.std_error;
          pen = r.mean;
          row.ok = true;
          if (r.failed > 0) status = "ok (" + std::to_string(r.failed) + " trials failed)";
        }
      } catch (const std::exception& e) {
        status = std::string("error: ") + e.what();
      }
    }
    row.fields[3] = format_number(double(Kt) / cfg.K);  // kappa actually simulated
    row.fields.insert(row.fields.end(),
                      {"", num_or_empty(pen), "", status, std::to_string(cfg.N),
                       std::to_string(cfg.K), std::to_string(Kt), std::to_string(trials),
                       num_or_empty(mean), num_or_empty(se), std::to_string(seed)});
    if (!row.ok && log) log(join(row.fields));
  }
  return assemble(kSimulateColumns, rows);
}

}  // namespace usvp
