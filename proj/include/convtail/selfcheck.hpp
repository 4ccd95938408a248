#pragma once

#include <string>
#include <vector>

namespace convtail::selfcheck {

struct CheckOutcome {
    std::string id;
    bool pass;
    std::string detail;
};

// The acceptance criteria, one function per criterion, every tolerance pinned
// in the implementation. A1's oracle tolerance is a parameter only so the
// sensitivity of the 1e-8 bound can itself be tested.
std::vector<CheckOutcome> check_a1_oracle_exactness(double oracle_rel_tol = 1e-10);
std::vector<CheckOutcome> check_a2_gamma_self_convolution();
std::vector<CheckOutcome> check_a3_weibull_self_convolution();
std::vector<CheckOutcome> check_a4_branch_suite();
std::vector<CheckOutcome> check_a5_property_suite();

struct SuiteReport {
    std::vector<CheckOutcome> outcomes;
    bool all_passed() const;
};

SuiteReport run_acceptance_suite();

}  // namespace convtail::selfcheck
