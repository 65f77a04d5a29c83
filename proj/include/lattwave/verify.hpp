#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lattwave {

struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    double measured = 0.0;   // the quantity compared against the bound
    double bound = 0.0;
};

// Suites runnable individually: identities, adjointness, conservation,
// counterexample, isomorphism. "all" runs every suite in that order.
std::vector<std::string> verify_suite_names();

// Throws std::invalid_argument for an unknown suite name.
std::vector<CheckResult> run_verify_suite(const std::string& suite, std::uint64_t seed);

} // namespace lattwave
