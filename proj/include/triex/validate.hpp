#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace triex {

// One numeric property check: pass iff observed <= tolerance.
struct CheckResult {
    std::string name;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

// Truncated-moment closed forms against a direct Monte Carlo oracle on
// randomized parameter configurations.
std::vector<CheckResult> suite_lemma(std::uint64_t seed, long draws_per_config = 10'000'000,
                                     int configs = 20);

// Conditional-bias formula against MC group means at fixed allocations, plus
// conditional unbiasedness of the corrected estimator (and the raw
// estimator's failure of it).
std::vector<CheckResult> suite_bias(std::uint64_t seed, long reps = 1'000'000);

// Closed-form design MSE against MC, the analytic spot value, and the
// misselection + conditional-variance decomposition.
std::vector<CheckResult> suite_mse(std::uint64_t seed, long reps = 2'000'000);

// Winner-selection frequency against the normal-CDF prediction.
std::vector<CheckResult> suite_selection(std::uint64_t seed, long reps = 1'000'000);

// Convergence trend of the realized allocation toward the Neyman target as
// the budget grows, on the clipped domain.
std::vector<CheckResult> suite_convergence(std::uint64_t seed, long reps = 200);

// Dispatch by suite name; throws std::invalid_argument on unknown names.
std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed);

bool all_pass(const std::vector<CheckResult>& checks);

}  // namespace triex
