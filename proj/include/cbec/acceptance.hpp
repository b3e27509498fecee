#pragma once

#include "cbec/counting.hpp"

#include <cstdint>
#include <set>

namespace cbec {

struct AcceptanceOptions {
    std::uint64_t seed = 2024;
    int jobs = 1;
    Fault fault = Fault::none;
    std::set<int> only;  // empty: all criteria
};

struct CriterionResult {
    int id = 0;
    std::string title;
    Report report;  // numerical checks only
    double seconds = 0.0;
    double budget = 0.0;  // seconds
    std::string error;    // exception text if the run threw

    bool within_budget() const { return seconds < budget; }
    bool pass() const { return error.empty() && report.pass() && within_budget(); }
};

constexpr int criterion_count = 10;

CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

// "PASS  3  auxiliary construction  (12.4 s / 30 s)" plus failing checks below it.
void print_result(std::ostream& os, const CriterionResult& r);

}  // namespace cbec
