// SPDX-License-Identifier: Apache-2.0
// Runs every acceptance criterion and prints one line per criterion.
#include <iostream>

#include "usvp/validation.hpp"

int main() {
  const usvp::ValidationReport rep = usvp::run_validation("all", std::cout);
  return rep.ok() ? 0 : 1;
}
