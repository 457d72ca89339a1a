#pragma once

#include <vector>

#include "triex/estimator.hpp"
#include "triex/model.hpp"
#include "triex/objective.hpp"
#include "triex/rng.hpp"

namespace triex {

// Abstract outcome provider for one experiment run. Finite-population sources
// throw when a draw would exceed the remaining records on an arm.
class OutcomeSource {
public:
    virtual ~OutcomeSource() = default;
    virtual void draw(int arm, long count, Rng& rng, std::vector<double>& out) = 0;
};

// i.i.d. normal outcomes per arm
class NormalSource final : public OutcomeSource {
public:
    explicit NormalSource(const Hyperparams& h);
    void draw(int arm, long count, Rng& rng, std::vector<double>& out) override;

private:
    Hyperparams h_;
    std::array<double, 3> sd_;
};

enum class BiasParams { PilotEstimates, TrueHyperparams };

struct TwoStageResult {
    DesignOutcome outcome;
    TwoStagePlan plan;
    ArmStats pilot_stats;
    ArmStats post_stats;
    bool variance_floored = false;  // a degenerate pilot arm had its variance floored
};

struct TwoStageOptions {
    BiasParams bias_params = BiasParams::PilotEstimates;
    const Hyperparams* true_h = nullptr;  // required for TrueHyperparams
    ObjectiveKind allocation_objective = ObjectiveKind::Debiased;
    bool apply_correction = true;
};

// One end-to-end two-stage adaptive run: pilot draws, plug-in allocation for
// the full budget, post-pilot draws, pooled winner selection, debiased effect.
TwoStageResult run_two_stage(OutcomeSource& source, long T, const Allocation& pilot_split,
                             Rng& rng, const TwoStageOptions& opts = {});

// Single-batch run at the oracle allocation with true-hyperparameter debiasing.
DesignOutcome run_oracle_design(OutcomeSource& source, const Hyperparams& h, long T, Rng& rng);

}  // namespace triex
