#pragma once

#include <array>

#include "triex/model.hpp"

namespace triex {

// Which estimator the design objective targets: the bias-corrected winner
// estimate or the raw one.
enum class ObjectiveKind { Debiased, Uncorrected };

// Closed-form E[(mu_hat_w^db - mu_wmax)^2] for the debiased winner estimate
// as a function of the treatment counts. Counts are real-valued so the same
// expression can be evaluated in proportion space.
double mse_treatment(const Hyperparams& h, double n1, double n2);

// Same quantity for the estimator without bias correction.
double mse_treatment_uncorrected(const Hyperparams& h, double n1, double n2);

double treatment_objective(const Hyperparams& h, double n1, double n2, ObjectiveKind kind);

// Full design MSE: treatment term plus Var(mu_hat_0) = sigma0^2/n0.
double oracle_mse(const Hyperparams& h, const Allocation& a);

// Plug-in objective for the post-pilot allocation: the full-budget MSE
// evaluated at effective counts (candidate + pilot) with pilot-stage estimates
// of the hyperparameters.
double adaptive_objective(const ArmStats& pilot_stats, const Allocation& pilot,
                          const Allocation& candidate,
                          ObjectiveKind kind = ObjectiveKind::Debiased);

// sigma_winner^2/p_winner + sigma0^2/p0; ignores the rejected treatment arm.
double neyman_variance(const Hyperparams& h, const std::array<double, 3>& p, int winner);

}  // namespace triex
