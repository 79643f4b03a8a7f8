// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace usvp {

enum class CheckStatus { Pass, Fail, Warn, Unmet };

struct CheckResult {
  std::string id;    // "1".."10" for acceptance criteria, "M1".. for math checks
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> results;
  // No Fail.  Warn is advisory; Unmet marks a criterion shown not to be
  // satisfiable as stated (see the detail line).
  bool ok() const;
};

// math, cdf, replica, selection, rates, sim, all
const std::vector<std::string>& validation_suites();

// Runs a suite, printing one line per check to `out` as it completes.
// Throws std::invalid_argument for an unknown suite name.
ValidationReport run_validation(const std::string& suite, std::ostream& out);

}  // namespace usvp
