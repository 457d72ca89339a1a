#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triex/design.hpp"
#include "triex/model.hpp"

namespace triex {

enum class Method {
    Proposal,
    ProposalNoCorr,
    SsSe,
    SsHyper,
    Nonadaptive,
    Oracle,
};

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

// Pilot budget rule: a fraction of T or a fixed count.
struct PilotRule {
    bool fixed = false;
    double value = 1.0 / 3.0;

    long budget(long T) const;
};

struct SimConfig {
    double delta = 0.1;
    double sigma_ratio = 0.8;   // sigma2/sigma1 with sigma1^2 + sigma2^2 = 1
    double sigma0_sq = 1.0;
    std::vector<long> T_grid;
    PilotRule T0_rule;
    std::optional<std::array<long, 3>> pilot_split;  // explicit counts; default equal thirds
    long replications = 20000;
    std::uint64_t master_seed = 0;
    std::vector<Method> methods;
    int workers = 1;
    bool ss_se_neyman_split = false;  // alternate SS.SE post-pilot split

    void validate() const;
    Hyperparams hyperparams() const;
    Allocation pilot_alloc(long T0) const;
};

SimConfig sim_config_from_json(const nlohmann::json& j);

struct MetricsRecord {
    std::string method;
    long T = 0;
    long T0 = 0;
    double delta = 0.0;
    double sigma_ratio = 0.0;
    double mse = 0.0, mse_se = 0.0;
    double selection_prob = 0.0, selection_prob_se = 0.0;
    double max_cond_bias = 0.0, max_cond_bias_se = 0.0;
    double expected_cond_var = 0.0, expected_cond_var_se = 0.0;
    long replications = 0;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const MetricsRecord& r);

struct RepOutcome {
    double tau_est = 0.0;
    int winner = 2;
};

// One experiment under `method` against an arbitrary outcome source. `h` is
// the population truth (used only by the oracle bias term and nonadaptive's
// budget check); `oracle_alloc` is consulted only when method == Oracle.
RepOutcome run_replication(Method method, const Hyperparams& h, OutcomeSource& src, long T,
                           const Allocation& pilot, const Allocation& oracle_alloc, Rng& rng,
                           bool ss_se_neyman_split = false);

// Fills the four metrics and their batch-means standard errors from a full
// set of replications; the identity fields of `rec` are left untouched.
void summarize_replications(const Hyperparams& h, const std::vector<RepOutcome>& reps,
                            MetricsRecord& rec);

// One record per (method, T); replications run in parallel over `workers`
// threads with per-replication substreams, reduced in replication order so
// the output does not depend on the worker count.
std::vector<MetricsRecord> run_benchmark(const SimConfig& cfg);

// Proposal and SS.Hyper across a T0 grid at fixed T.
std::vector<MetricsRecord> sweep_T0(const SimConfig& cfg, long T, const std::vector<long>& T0_grid);

std::string metrics_csv_header();
std::string metrics_to_csv(const std::vector<MetricsRecord>& records);

}  // namespace triex
