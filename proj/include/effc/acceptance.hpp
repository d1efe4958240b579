#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace effc::acceptance {

struct CriterionResult {
    std::string id;
    std::string description;
    bool pass;
    std::string detail;
    double seconds;
};

/// Runs the verification suite. suite is "quick" (fast formula/oracle checks)
/// or "full" (everything, including the long Monte Carlo criteria).
std::vector<CriterionResult> run_suite(const std::string& suite, std::uint64_t seed);

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);

}  // namespace effc::acceptance
