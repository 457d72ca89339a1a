#pragma once

#include <span>
#include <utility>
#include <vector>

#include "triex/model.hpp"
#include "triex/rng.hpp"

namespace triex {

struct SelectionResult {
    int winner = 2;          // in {1, 2}
    bool tie_broken = false; // set only when the two means were exactly equal
};

// Per-arm mean and unbiased variance; variance left undefined for counts < 2.
ArmStats sample_stats(const std::array<std::vector<double>, 3>& outcomes_by_arm);

// argmax of the two treatment means; exact ties resolved by a fair coin
SelectionResult select_winner(double mean1, double mean2, Rng& rng);

// Conditional selection bias of the raw winner estimate,
//   sigma_w^2 / (n_w sqrt(V)) * phi(Delta/sqrt(V)) / Phi(+-Delta/sqrt(V)),
// with the sign of the Phi argument flipped for winner 1. Always positive;
// underflows to 0 only when |Delta/sqrt(V)| exceeds ~40.
double bias_term(const Hyperparams& h, const Allocation& a, int winner);

inline double debias(double tau_raw, double b) { return tau_raw - b; }

// Two-stage pooled mean for one arm; returns (mean, omega) with
// omega = m / (m + n). The mean equals the grand mean of all pooled outcomes.
std::pair<double, double> pooled_mean(const ArmStats& pilot, const ArmStats& post, int arm);

}  // namespace triex
