#include "triex/design.hpp"

#include <cmath>
#include <stdexcept>

#include "triex/optimizer.hpp"

namespace triex {

namespace {

constexpr double kVarianceFloor = 1e-12;

ArmStats floor_variances(const ArmStats& stats, bool& floored) {
    ArmStats out = stats;
    for (int w = 0; w < 3; ++w) {
        if (out.var_hat[w] && *out.var_hat[w] < kVarianceFloor) {
            out.var_hat[w] = kVarianceFloor;
            floored = true;
        }
    }
    return out;
}

}  // namespace

NormalSource::NormalSource(const Hyperparams& h) : h_(h) {
    h_.validate();
    for (int w = 0; w < 3; ++w) sd_[w] = std::sqrt(h_.sigma2[w]);
}

void NormalSource::draw(int arm, long count, Rng& rng, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(count));
    for (auto& y : out) y = rng.normal(h_.mu[arm], sd_[arm]);
}

TwoStageResult run_two_stage(OutcomeSource& source, long T, const Allocation& pilot_split,
                             Rng& rng, const TwoStageOptions& opts) {
    const long T0 = pilot_split.total();
    for (int w = 0; w < 3; ++w)
        if (pilot_split.n[w] < 2)
            throw std::invalid_argument("each pilot arm needs at least 2 units");
    if (T <= T0 + 2) throw std::invalid_argument("total budget leaves no post-pilot stage");
    if (opts.bias_params == BiasParams::TrueHyperparams && opts.true_h == nullptr)
        throw std::invalid_argument("true hyperparameters requested but not provided");

    TwoStageResult res;

    std::array<std::vector<double>, 3> pilot_draws;
    for (int w = 0; w < 3; ++w) source.draw(w, pilot_split.n[w], rng, pilot_draws[w]);
    res.pilot_stats = sample_stats(pilot_draws);
    const ArmStats floored = floor_variances(res.pilot_stats, res.variance_floored);

    const long T1 = T - T0;
    const Allocation post =
        solve_adaptive_allocation(floored, pilot_split, T1, {}, opts.allocation_objective);
    res.plan = TwoStagePlan{pilot_split, T, post};

    std::array<std::vector<double>, 3> post_draws;
    for (int w = 0; w < 3; ++w) source.draw(w, post.n[w], rng, post_draws[w]);
    res.post_stats = sample_stats(post_draws);

    // pooled means from raw sums across both stages
    DesignOutcome& out = res.outcome;
    Allocation effective;
    for (int w = 0; w < 3; ++w) {
        double sum = 0.0;
        for (double y : pilot_draws[w]) sum += y;
        for (double y : post_draws[w]) sum += y;
        const long n = pilot_split.n[w] + post.n[w];
        effective.n[w] = n;
        out.pooled_means[w] = sum / static_cast<double>(n);
        out.omega[w] = static_cast<double>(pilot_split.n[w]) / static_cast<double>(n);
    }

    const SelectionResult sel = select_winner(out.pooled_means[1], out.pooled_means[2], rng);
    out.winner = sel.winner;
    out.tau_raw = out.pooled_means[out.winner] - out.pooled_means[0];

    if (opts.apply_correction) {
        Hyperparams bias_h;
        if (opts.bias_params == BiasParams::TrueHyperparams) {
            bias_h = *opts.true_h;
        } else {
            for (int w = 0; w < 3; ++w) {
                bias_h.mu[w] = floored.mean[w];
                bias_h.sigma2[w] = *floored.var_hat[w];
            }
        }
        out.bias_term = bias_term(bias_h, effective, out.winner);
    } else {
        out.bias_term = 0.0;
    }
    out.tau_debiased = debias(out.tau_raw, out.bias_term);
    return res;
}

DesignOutcome run_oracle_design(OutcomeSource& source, const Hyperparams& h, long T, Rng& rng) {
    const Allocation alloc = solve_oracle_allocation(h, T);

    std::array<std::vector<double>, 3> draws;
    for (int w = 0; w < 3; ++w) source.draw(w, alloc.n[w], rng, draws[w]);
    const ArmStats stats = sample_stats(draws);

    DesignOutcome out;
    out.pooled_means = stats.mean;
    for (int w = 0; w < 3; ++w) out.omega[w] = 0.0;
    const SelectionResult sel = select_winner(stats.mean[1], stats.mean[2], rng);
    out.winner = sel.winner;
    out.tau_raw = stats.mean[out.winner] - stats.mean[0];
    out.bias_term = bias_term(h, alloc, out.winner);
    out.tau_debiased = debias(out.tau_raw, out.bias_term);
    return out;
}

}  // namespace triex
