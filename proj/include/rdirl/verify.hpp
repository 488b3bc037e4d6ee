#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rdirl {

// Runtime self-check suites, independent of the unit tests. Each check prints
// one "[PASS]/[FAIL] name: detail" line with the measured quantity and the
// tolerance it was held to. Suites: "gradients", "bound", "rls-equivalence",
// "mppi", "envs", or "all". Returns the number of failed checks; throws on an
// unknown suite name.
int run_verify_suite(const std::string& suite, std::ostream& out);

const std::vector<std::string>& verify_suite_names();

}  // namespace rdirl
