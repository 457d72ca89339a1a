#include "triex/simulator.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "triex/optimizer.hpp"

namespace triex {

namespace {

constexpr int kBatches = 100;
constexpr double kVarianceFloor = 1e-12;

Hyperparams plug_in(const ArmStats& stats) {
    Hyperparams h;
    for (int w = 0; w < 3; ++w) {
        h.mu[w] = stats.mean[w];
        h.sigma2[w] = stats.var_hat[w] ? std::max(*stats.var_hat[w], kVarianceFloor)
                                       : kVarianceFloor;
    }
    return h;
}

Allocation equal_thirds(long total) {
    const long third = total / 3;
    return Allocation{{total - 2 * third, third, third}};
}

RepOutcome rep_nonadaptive(OutcomeSource& src, long T, Rng& rng) {
    if (T < 6) throw std::invalid_argument("nonadaptive method needs T >= 6");
    const Allocation alloc = equal_thirds(T);
    std::array<std::vector<double>, 3> draws;
    for (int w = 0; w < 3; ++w) src.draw(w, alloc.n[w], rng, draws[w]);
    const ArmStats stats = sample_stats(draws);
    const SelectionResult sel = select_winner(stats.mean[1], stats.mean[2], rng);
    const double tau_raw = stats.mean[sel.winner] - stats.mean[0];
    const double b = bias_term(plug_in(stats), alloc, sel.winner);
    return {debias(tau_raw, b), sel.winner};
}

RepOutcome rep_oracle(const Hyperparams& h, OutcomeSource& src, const Allocation& alloc, Rng& rng) {
    std::array<std::vector<double>, 3> draws;
    for (int w = 0; w < 3; ++w) src.draw(w, alloc.n[w], rng, draws[w]);
    const ArmStats stats = sample_stats(draws);
    const SelectionResult sel = select_winner(stats.mean[1], stats.mean[2], rng);
    const double tau_raw = stats.mean[sel.winner] - stats.mean[0];
    return {debias(tau_raw, bias_term(h, alloc, sel.winner)), sel.winner};
}

RepOutcome rep_ss_se(OutcomeSource& src, long T, const Allocation& pilot, Rng& rng,
                    bool neyman_split) {
    std::array<std::vector<double>, 3> pilot_draws;
    for (int w = 0; w < 3; ++w) src.draw(w, pilot.n[w], rng, pilot_draws[w]);
    const ArmStats pstats = sample_stats(pilot_draws);
    const SelectionResult sel = select_winner(pstats.mean[1], pstats.mean[2], rng);

    const long T1 = T - pilot.total();
    std::vector<double> post_winner, post_control;
    double control_mean;
    if (neyman_split) {
        const double s0 = std::sqrt(std::max(*pstats.var_hat[0], kVarianceFloor));
        const double sw = std::sqrt(std::max(*pstats.var_hat[sel.winner], kVarianceFloor));
        long n0 = std::lround(static_cast<double>(T1) * s0 / (s0 + sw));
        n0 = std::min(std::max(n0, 1L), T1 - 1);
        src.draw(0, n0, rng, post_control);
        src.draw(sel.winner, T1 - n0, rng, post_winner);
        double sum = 0.0;
        for (double y : post_control) sum += y;
        control_mean = sum / static_cast<double>(n0);
    } else {
        // all post-pilot units go to the winner; control mean from the pilot
        src.draw(sel.winner, T1, rng, post_winner);
        control_mean = pstats.mean[0];
    }
    double sum = 0.0;
    for (double y : post_winner) sum += y;
    const double winner_mean = sum / static_cast<double>(post_winner.size());
    return {winner_mean - control_mean, sel.winner};
}

RepOutcome rep_ss_hyper(OutcomeSource& src, long T, const Allocation& pilot, Rng& rng) {
    std::array<std::vector<double>, 3> pilot_draws;
    for (int w = 0; w < 3; ++w) src.draw(w, pilot.n[w], rng, pilot_draws[w]);
    const Hyperparams plug = plug_in(sample_stats(pilot_draws));

    const long T1 = T - pilot.total();
    const Allocation alloc = solve_oracle_allocation(plug, T1);
    std::array<std::vector<double>, 3> draws;
    for (int w = 0; w < 3; ++w) src.draw(w, alloc.n[w], rng, draws[w]);
    const ArmStats stats = sample_stats(draws);
    const SelectionResult sel = select_winner(stats.mean[1], stats.mean[2], rng);
    const double tau_raw = stats.mean[sel.winner] - stats.mean[0];
    return {debias(tau_raw, bias_term(plug, alloc, sel.winner)), sel.winner};
}


struct Metrics {
    double mse, sel, max_bias, exp_var;
    bool valid = true;
};

Metrics compute_metrics(const Hyperparams& h, const RepOutcome* reps, long n) {
    const int wmax = h.best_arm();
    const double tau_max = h.tau(wmax);
    Metrics m{0.0, 0.0, 0.0, 0.0};
    std::array<double, 3> sum{0.0, 0.0, 0.0}, sumsq{0.0, 0.0, 0.0};
    std::array<long, 3> cnt{0, 0, 0};
    for (long i = 0; i < n; ++i) {
        const double d = reps[i].tau_est - tau_max;
        m.mse += d * d;
        if (reps[i].winner == wmax) m.sel += 1.0;
        const int w = reps[i].winner;
        const double e = reps[i].tau_est - h.tau(w);
        sum[w] += e;
        sumsq[w] += e * e;
        ++cnt[w];
    }
    m.mse /= static_cast<double>(n);
    m.sel /= static_cast<double>(n);
    for (int w = 1; w <= 2; ++w) {
        if (cnt[w] == 0) continue;
        const double mean = sum[w] / static_cast<double>(cnt[w]);
        m.max_bias = std::max(m.max_bias, std::fabs(mean));
        if (cnt[w] >= 2) {
            const double var =
                (sumsq[w] - static_cast<double>(cnt[w]) * mean * mean) /
                static_cast<double>(cnt[w] - 1);
            m.exp_var += (static_cast<double>(cnt[w]) / static_cast<double>(n)) * var;
        }
    }
    return m;
}

// standard errors from batch means over contiguous replication blocks
void batch_errors(const Hyperparams& h, const std::vector<RepOutcome>& reps, MetricsRecord& rec) {
    const long n = static_cast<long>(reps.size());
    const int nb = static_cast<int>(std::min<long>(kBatches, n));
    const long len = n / nb;
    std::vector<Metrics> batch(nb);
    for (int b = 0; b < nb; ++b) batch[b] = compute_metrics(h, reps.data() + b * len, len);

    const auto se_of = [&](auto pick) {
        double mean = 0.0;
        for (const auto& m : batch) mean += pick(m);
        mean /= nb;
        double ss = 0.0;
        for (const auto& m : batch) {
            const double d = pick(m) - mean;
            ss += d * d;
        }
        return nb > 1 ? std::sqrt(ss / (nb - 1) / nb) : 0.0;
    };
    rec.mse_se = se_of([](const Metrics& m) { return m.mse; });
    rec.selection_prob_se = se_of([](const Metrics& m) { return m.sel; });
    rec.max_cond_bias_se = se_of([](const Metrics& m) { return m.max_bias; });
    rec.expected_cond_var_se = se_of([](const Metrics& m) { return m.exp_var; });
}

MetricsRecord run_cell(const SimConfig& cfg, Method method, long T, long T0) {
    const Hyperparams h = cfg.hyperparams();
    NormalSource src(h);
    const Allocation pilot = cfg.pilot_alloc(T0);
    Allocation oracle_alloc;
    if (method == Method::Oracle) oracle_alloc = solve_oracle_allocation(h, T);

    std::vector<RepOutcome> reps(static_cast<std::size_t>(cfg.replications));
    const std::uint64_t mtag = static_cast<std::uint64_t>(method);
    const auto work = [&](long rep) {
        Rng rng = Rng::substream(cfg.master_seed,
                                 {mtag, static_cast<std::uint64_t>(T),
                                  static_cast<std::uint64_t>(T0),
                                  static_cast<std::uint64_t>(rep)});
        reps[static_cast<std::size_t>(rep)] =
            run_replication(method, h, src, T, pilot, oracle_alloc, rng, cfg.ss_se_neyman_split);
    };

    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (long r = 0; r < cfg.replications; ++r) work(r);
    } else {
        std::atomic<long> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const long r = next.fetch_add(64);
                    if (r >= cfg.replications) break;
                    const long end = std::min(r + 64, cfg.replications);
                    for (long i = r; i < end; ++i) work(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    MetricsRecord rec;
    rec.method = method_name(method);
    rec.T = T;
    rec.T0 = T0;
    rec.delta = cfg.delta;
    rec.sigma_ratio = cfg.sigma_ratio;
    rec.replications = cfg.replications;
    rec.seed = cfg.master_seed;
    summarize_replications(h, reps, rec);
    return rec;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::Proposal: return "proposal";
        case Method::ProposalNoCorr: return "proposal_nocorr";
        case Method::SsSe: return "ss_se";
        case Method::SsHyper: return "ss_hyper";
        case Method::Nonadaptive: return "nonadaptive";
        case Method::Oracle: return "oracle";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    for (Method m : {Method::Proposal, Method::ProposalNoCorr, Method::SsSe, Method::SsHyper,
                     Method::Nonadaptive, Method::Oracle})
        if (name == method_name(m)) return m;
    return {};
}

long PilotRule::budget(long T) const {
    if (fixed) return static_cast<long>(value);
    return std::lround(static_cast<double>(T) * value);
}

void SimConfig::validate() const {
    std::string errs;
    const auto fail = [&](const std::string& e) { errs += errs.empty() ? e : "; " + e; };
    if (!(sigma_ratio > 0.0)) fail("sigma_ratio must be positive");
    if (!(sigma0_sq > 0.0)) fail("sigma0_sq must be positive");
    if (T_grid.empty()) fail("T_grid must be nonempty");
    if (replications < 1) fail("replications must be >= 1");
    if (methods.empty()) fail("methods must be nonempty");
    for (long T : T_grid) {
        const long T0 = T0_rule.budget(T);
        if (T0 < 6 || T0 >= T - 2) {
            fail("T0 must satisfy 6 <= T0 < T - 2 for every T in the grid");
            break;
        }
    }
    if (pilot_split) {
        for (long m : *pilot_split)
            if (m < 2) fail("explicit pilot_split entries must be >= 2");
    }
    if (!errs.empty()) throw std::invalid_argument("invalid simulation config: " + errs);
}

Hyperparams SimConfig::hyperparams() const {
    const double r2 = sigma_ratio * sigma_ratio;
    Hyperparams h;
    h.mu = {0.0, 0.0, delta};
    h.sigma2 = {sigma0_sq, 1.0 / (1.0 + r2), r2 / (1.0 + r2)};
    return h;
}

Allocation SimConfig::pilot_alloc(long T0) const {
    if (pilot_split) return Allocation{{(*pilot_split)[0], (*pilot_split)[1], (*pilot_split)[2]}};
    return equal_thirds(T0);
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("config must carry schema_version = 1");
    SimConfig cfg;
    cfg.delta = j.at("delta").get<double>();
    cfg.sigma_ratio = j.at("sigma_ratio").get<double>();
    cfg.sigma0_sq = j.value("sigma0_sq", 1.0);
    cfg.T_grid = j.at("T_grid").get<std::vector<long>>();
    if (j.contains("T0_rule")) {
        const auto& r = j.at("T0_rule");
        const std::string type = r.at("type").get<std::string>();
        if (type == "fixed") cfg.T0_rule = {true, r.at("value").get<double>()};
        else if (type == "fraction") cfg.T0_rule = {false, r.at("value").get<double>()};
        else throw std::invalid_argument("T0_rule.type must be 'fixed' or 'fraction'");
    }
    if (j.contains("pilot_split") && !j.at("pilot_split").is_string())
        cfg.pilot_split = j.at("pilot_split").get<std::array<long, 3>>();
    cfg.replications = j.at("replications").get<long>();
    // the CLI-level --seed overrides this; the field exists for library users
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    for (const auto& name : j.at("methods")) {
        const auto m = method_from_name(name.get<std::string>());
        if (!m) throw std::invalid_argument("unknown method: " + name.get<std::string>());
        cfg.methods.push_back(*m);
    }
    cfg.ss_se_neyman_split = j.value("ss_se_neyman_split", false);
    cfg.validate();
    return cfg;
}

void to_json(nlohmann::json& j, const MetricsRecord& r) {
    j = {{"method", r.method},
         {"T", r.T},
         {"T0", r.T0},
         {"delta", r.delta},
         {"sigma_ratio", r.sigma_ratio},
         {"mse", r.mse},
         {"mse_se", r.mse_se},
         {"selection_prob", r.selection_prob},
         {"selection_prob_se", r.selection_prob_se},
         {"max_cond_bias", r.max_cond_bias},
         {"max_cond_bias_se", r.max_cond_bias_se},
         {"expected_cond_var", r.expected_cond_var},
         {"expected_cond_var_se", r.expected_cond_var_se},
         {"replications", r.replications},
         {"seed", r.seed}};
}

std::vector<MetricsRecord> run_benchmark(const SimConfig& cfg) {
    cfg.validate();
    std::vector<MetricsRecord> out;
    for (long T : cfg.T_grid)
        for (Method m : cfg.methods) out.push_back(run_cell(cfg, m, T, cfg.T0_rule.budget(T)));
    return out;
}

std::vector<MetricsRecord> sweep_T0(const SimConfig& cfg, long T, const std::vector<long>& T0_grid) {
    std::vector<MetricsRecord> out;
    for (long T0 : T0_grid) {
        if (T0 >= T - 2 || T0 < 6) throw std::invalid_argument("T0 grid entry infeasible");
        for (Method m : {Method::Proposal, Method::SsHyper}) out.push_back(run_cell(cfg, m, T, T0));
    }
    return out;
}

std::string metrics_csv_header() {
    return "method,T,T0,delta,sigma_ratio,mse,mse_se,sel_prob,sel_prob_se,"
           "max_cond_bias,max_cond_bias_se,exp_cond_var,exp_cond_var_se,replications,seed";
}

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
    std::string out = metrics_csv_header() + "\n";
    for (const auto& r : records) {
        out += r.method;
        out += ',' + std::to_string(r.T) + ',' + std::to_string(r.T0);
        out += ',' + format_double(r.delta) + ',' + format_double(r.sigma_ratio);
        out += ',' + format_double(r.mse) + ',' + format_double(r.mse_se);
        out += ',' + format_double(r.selection_prob) + ',' + format_double(r.selection_prob_se);
        out += ',' + format_double(r.max_cond_bias) + ',' + format_double(r.max_cond_bias_se);
        out += ',' + format_double(r.expected_cond_var) + ',' + format_double(r.expected_cond_var_se);
        out += ',' + std::to_string(r.replications) + ',' + std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

RepOutcome run_replication(Method method, const Hyperparams& h, OutcomeSource& src, long T,
                           const Allocation& pilot, const Allocation& oracle_alloc, Rng& rng,
                           bool ss_se_neyman_split) {
    switch (method) {
        case Method::Proposal: {
            TwoStageOptions opts;
            const TwoStageResult r = run_two_stage(src, T, pilot, rng, opts);
            return {r.outcome.tau_debiased, r.outcome.winner};
        }
        case Method::ProposalNoCorr: {
            TwoStageOptions opts;
            opts.allocation_objective = ObjectiveKind::Uncorrected;
            opts.apply_correction = false;
            const TwoStageResult r = run_two_stage(src, T, pilot, rng, opts);
            return {r.outcome.tau_debiased, r.outcome.winner};
        }
        case Method::SsSe:
            return rep_ss_se(src, T, pilot, rng, ss_se_neyman_split);
        case Method::SsHyper:
            return rep_ss_hyper(src, T, pilot, rng);
        case Method::Nonadaptive:
            return rep_nonadaptive(src, T, rng);
        case Method::Oracle:
            return rep_oracle(h, src, oracle_alloc, rng);
    }
    throw std::logic_error("unreachable");
}

void summarize_replications(const Hyperparams& h, const std::vector<RepOutcome>& reps,
                            MetricsRecord& rec) {
    const Metrics m = compute_metrics(h, reps.data(), static_cast<long>(reps.size()));
    rec.mse = m.mse;
    rec.selection_prob = m.sel;
    rec.max_cond_bias = m.max_bias;
    rec.expected_cond_var = m.exp_var;
    batch_errors(h, reps, rec);
}

}  // namespace triex
