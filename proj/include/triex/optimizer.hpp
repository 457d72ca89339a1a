#pragma once

#include <optional>

#include "triex/model.hpp"
#include "triex/objective.hpp"

namespace triex {

struct SplitResult {
    long n1 = 0;
    long n2 = 0;
    double value = 0.0;
};

// Best integer split of a treatment budget n_t across the two treatment arms.
// Ties resolve toward smaller n1.
SplitResult optimize_within_treatment(const Hyperparams& h, long n_t,
                                      ObjectiveKind kind = ObjectiveKind::Debiased);

// Minimizes treatment MSE plus sigma0^2/n0 over all integer (n0, n1, n2)
// with each arm >= 1 and n0 + n1 + n2 = T. Exhaustive below ~2e5 candidate
// pairs, coarse grid with exhaustive refinement above.
Allocation solve_oracle_allocation(const Hyperparams& h, long T,
                                   ObjectiveKind kind = ObjectiveKind::Debiased);

// Post-pilot counts implied by a full-budget target: target minus pilot.
Allocation top_up(const Allocation& full_target, const Allocation& pilot);

// Post-pilot allocation minimizing the plug-in full-budget objective with
// effective counts (n_w + m_w). Without a clip domain each post count may
// fall to zero wherever the pilot already covers the arm; with one, every
// post count stays above ceil(T1 * delta).
Allocation solve_adaptive_allocation(const ArmStats& pilot_stats, const Allocation& pilot,
                                     long T1, std::optional<ClipDomain> clip = {},
                                     ObjectiveKind kind = ObjectiveKind::Debiased);

// Neyman proportions between control and the winning arm (winner in slot 2).
NeymanTarget neyman_allocation(double sigma0, double sigma_w);

}  // namespace triex
