// SPDX-License-Identifier: Apache-2.0
// usvp: sweeps, finite-size simulation and validation suites.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "usvp/sweep.hpp"
#include "usvp/validation.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

const char* const kFooter = R"(CSV output (header row, UTF-8, LF line endings, numbers with 12 significant digits):
  penalty-sweep: scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status
  rate-sweep:    penalty-sweep columns + snr_db,mi_bits,bound_bits,kappa_opt
                 (kappa_opt is the best kappa on the grid at that snr; us-cvp rows report the
                  cvp-rus reference with assumption "rus")
  simulate:      penalty-sweep columns + N,K,Ktilde,trials,mean,std_err,seed
                 (assumption holds the strategy; q and residual are empty)
  status is "ok", "skipped: <reason>" or "error: <message>".

Config file: one "key = value" per line, keys are the long flag names without dashes,
'#' starts a comment.  Flags given on the command line override the file.

Exit status: 0 when at least one point succeeds (validate: no failed check),
1 when every point fails, 2 on usage or configuration errors.)";

// Long options accepted both as flags and as config keys.
const std::vector<std::string> kKeys{
    "scheme", "assumption", "alpha", "alphakappa-grid", "T", "snr-db-grid", "N", "K",
    "trials", "seed", "out", "strategy", "suite", "mi-samples", "threads"};

struct ConfigError {
  std::string message;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Turns the config file into "--key value" pairs; all bad lines are reported together.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError{"cannot open config file '" + path + "'"};
  const std::set<std::string> known(kKeys.begin(), kKeys.end());
  std::vector<std::string> args, errors;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(n) + ": ";
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!known.count(key)) {
      errors.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (value.empty()) {
      errors.push_back(where + "missing value for '" + key + "'");
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  if (!errors.empty()) {
    std::string all;
    for (const auto& e : errors) all += (all.empty() ? "" : "\n") + e;
    throw ConfigError{all};
  }
  return args;
}

// argv with the config file (if any) spliced in ahead of the user's own flags.
std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> user(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < user.size(); ++i) {
    if (user[i] == "--config" && i + 1 < user.size()) {
      config = user[i + 1];
      user.erase(user.begin() + i, user.begin() + i + 2);
      break;
    }
    if (user[i].rfind("--config=", 0) == 0) {
      config = user[i].substr(9);
      user.erase(user.begin() + i);
      break;
    }
  }
  std::vector<std::string> out{argv[0]};
  // The subcommand name stays first so its fallthrough options see the file values.
  std::size_t start = 0;
  if (!user.empty() && user[0].rfind("-", 0) != 0) out.push_back(user[start++]);
  if (!config.empty()) {
    const auto file = read_config(config);
    out.insert(out.end(), file.begin(), file.end());
  }
  out.insert(out.end(), user.begin() + start, user.end());
  return out;
}

struct RawOptions {
  std::string scheme = "dd-us-gaussian";
  std::string assumption = "rs";
  double alpha = 4.0;
  std::string alphakappa = "0.1:0.9:9";
  int T = 64;
  std::string snr_db = "5";
  int N = 64;
  int K = 256;
  int trials = 50;
  std::uint64_t seed = 1;
  std::string out;
  std::string strategy = "zfbf-rus";
  std::string suite = "all";
  std::size_t mi_samples = 1000000;
  unsigned threads = 0;
};

// Collects every problem instead of stopping at the first one.
usvp::SweepConfig build_config(const std::string& command, const RawOptions& o,
                               std::vector<std::string>& problems) {
  usvp::SweepConfig c;
  c.command = command;
  try {
    c.scheme = usvp::parse_scheme(o.scheme);
  } catch (const std::exception& e) {
    problems.push_back(std::string("scheme: ") + e.what());
  }
  if (o.assumption == "both") {
    c.assumptions = {usvp::Assumption::RS, usvp::Assumption::OneRSB};
  } else {
    try {
      c.assumptions = {usvp::parse_assumption(o.assumption)};
    } catch (const std::exception& e) {
      problems.push_back(std::string("assumption: ") + e.what());
    }
  }
  c.alpha = o.alpha;
  try {
    c.alphakappa = usvp::parse_grid(o.alphakappa);
  } catch (const std::exception& e) {
    problems.push_back(std::string("alphakappa-grid: ") + e.what());
  }
  c.T = o.T;
  try {
    c.snr_db = usvp::parse_grid(o.snr_db);
  } catch (const std::exception& e) {
    problems.push_back(std::string("snr-db-grid: ") + e.what());
  }
  c.N = o.N;
  c.K = o.K;
  c.trials = o.trials;
  c.seed = o.seed;
  c.out = o.out;
  try {
    c.strategy = usvp::parse_strategy(o.strategy);
  } catch (const std::exception& e) {
    problems.push_back(std::string("strategy: ") + e.what());
  }
  c.suite = o.suite;
  c.mi_samples = o.mi_samples;
  c.threads = o.threads;
  for (auto& p : c.problems()) problems.push_back(std::move(p));
  return c;
}

int run_validate(const usvp::SweepConfig& c) {
  const usvp::ValidationReport rep = usvp::run_validation(c.suite, std::cout);
  int pass = 0, fail = 0, other = 0;
  for (const auto& r : rep.results) {
    if (r.status == usvp::CheckStatus::Pass) ++pass;
    else if (r.status == usvp::CheckStatus::Fail) ++fail;
    else ++other;
  }
  std::cout << pass << " passed, " << fail << " failed, " << other << " warned/unmet" << std::endl;
  return rep.ok() ? 0 : kExitFailure;
}

int run_sweep(const usvp::SweepConfig& c) {
  const usvp::Logger log = [](const std::string& m) { std::cerr << "usvp: " << m << '\n'; };
  usvp::SweepOutput res;
  if (c.command == "penalty-sweep") res = usvp::run_penalty_sweep(c, log);
  else if (c.command == "rate-sweep") res = usvp::run_rate_sweep(c, log);
  else res = usvp::run_simulate(c, log);

  if (c.out.empty()) {
    std::cout << res.csv << std::flush;
  } else {
    std::ofstream f(c.out, std::ios::binary);
    f << res.csv;
    f.close();
    if (!f) {
      std::cerr << "usvp: cannot write '" << c.out << "'\n";
      return kExitFailure;
    }
  }
  if (res.failed > 0)
    std::cerr << "usvp: " << res.failed << " of " << res.points << " points did not succeed\n";
  return res.points > 0 && res.failed == res.points ? kExitFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-system energy penalties and sum-rate bounds for user selection with vector precoding"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RawOptions o;
  std::string config_unused;
  app.add_option("--config", config_unused, "key = value file; command-line flags override it");
  app.add_option("--scheme", o.scheme, "dd-us-gaussian | dd-us-qpsk | us-cvp")->capture_default_str();
  app.add_option("--assumption", o.assumption, "rs | 1rsb | both")->capture_default_str();
  app.add_option("--alpha", o.alpha, "users per transmit antenna, alpha = K/N")->capture_default_str();
  app.add_option("--alphakappa-grid", o.alphakappa, "grid of alpha*kappa, a:b:n or comma list")->capture_default_str();
  app.add_option("--T", o.T, "symbols per selection block")->capture_default_str();
  app.add_option("--snr-db-grid", o.snr_db, "P/N0 grid in dB (rate-sweep)")->capture_default_str();
  app.add_option("--N", o.N, "transmit antennas (simulate)")->capture_default_str();
  app.add_option("--K", o.K, "users (simulate)")->capture_default_str();
  app.add_option("--trials", o.trials, "Monte-Carlo trials per point (simulate)")->capture_default_str();
  app.add_option("--seed", o.seed, "base seed")->capture_default_str();
  app.add_option("--out", o.out, "CSV path (default: stdout)");
  app.add_option("--strategy", o.strategy, "zfbf-full | zfbf-rus | cvp-rus | greedy-dd-us (simulate)")->capture_default_str();
  app.add_option("--suite", o.suite, "math | cdf | replica | selection | rates | sim | all (validate)")->capture_default_str();
  app.add_option("--mi-samples", o.mi_samples, "Monte-Carlo samples for the Gaussian-input MI (rate-sweep)")->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads, 0 = hardware concurrency")->capture_default_str();

  for (const char* name : {"penalty-sweep", "rate-sweep", "simulate", "validate"})
    app.add_subcommand(name)->fallthrough();
  app.get_subcommand("penalty-sweep")->description("q and per-user energy penalty over the alpha*kappa grid");
  app.get_subcommand("rate-sweep")->description("sum-rate bound over alpha*kappa x snr");
  app.get_subcommand("simulate")->description("finite-size Monte-Carlo energy penalty");
  app.get_subcommand("validate")->description("run oracle and property suites");

  std::vector<std::string> args;
  try {
    args = expand_args(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "usvp: " << e.message << '\n';
    return kExitUsage;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<std::string> problems;
  const usvp::SweepConfig cfg = build_config(command, o, problems);
  if (command == "validate") {
    const auto& suites = usvp::validation_suites();
    if (std::find(suites.begin(), suites.end(), cfg.suite) == suites.end()) {
      std::cerr << "usvp: unknown suite '" << cfg.suite << "'\n" << app.help();
      return kExitUsage;
    }
    return run_validate(cfg);
  }
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "usvp: " << p << '\n';
    return kExitUsage;
  }
  try {
    return run_sweep(cfg);
  } catch (const std::exception& e) {
    std::cerr << "usvp: " << e.what() << '\n';
    return kExitFailure;
  }
}
