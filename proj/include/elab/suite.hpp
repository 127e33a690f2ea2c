#pragma once

#include <functional>
#include <string>
#include <vector>

namespace elab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    /// Headline measurement compared against `limit`.
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
    /// Wall time; kept out of CSV bodies so they stay reproducible.
    double seconds = 0.0;
};

struct SuiteOptions {
    /// Criterion ids to run; empty runs all eleven.
    std::vector<int> only;
    /// Called after each criterion finishes.
    std::function<void(const CriterionResult&)> on_result;
};

/// Runs the fixed acceptance battery. Criteria that throw are reported as
/// failures with the exception text in `detail`.
std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& options = {});

/// Number of criteria in the battery.
inline constexpr int suite_size = 11;

}  // namespace elab
