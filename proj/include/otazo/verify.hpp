// Acceptance checks grouped into named suites. Each criterion runs a
// self-contained experiment against an in-test oracle and reports one
// pass/fail line.
#pragma once

#include <string>
#include <vector>

namespace otazo {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// suite is one of "privacy", "solver", "convergence", "all".
std::vector<CriterionResult> run_suite(const std::string& suite);

// One line per criterion on stdout; returns the number of failures.
int report(const std::vector<CriterionResult>& results);

}  // namespace otazo
