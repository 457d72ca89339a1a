#include "triex/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "triex/design.hpp"
#include "triex/estimator.hpp"
#include "triex/gaussian.hpp"
#include "triex/objective.hpp"
#include "triex/optimizer.hpp"
#include "triex/rng.hpp"

namespace triex {

namespace {

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// streaming mean/variance accumulator
struct Acc {
    long n = 0;
    double sum = 0.0, sumsq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sumsq += x * x;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double se() const {
        const double m = mean();
        const double var = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    }
    // z-score of the accumulated mean against a target
    double z(double target) const { return std::fabs(mean() - target) / se(); }
};

Hyperparams grid_point(double delta, double ratio, double sigma0_sq = 1.0) {
    const double r2 = ratio * ratio;
    Hyperparams h;
    h.mu = {0.0, 0.0, delta};
    h.sigma2 = {sigma0_sq, 1.0 / (1.0 + r2), r2 / (1.0 + r2)};
    return h;
}

}  // namespace

std::vector<CheckResult> suite_lemma(std::uint64_t seed, long draws_per_config, int configs) {
    std::vector<CheckResult> out;
    for (int c = 0; c < configs; ++c) {
        Rng rng = Rng::substream(seed, {1, static_cast<std::uint64_t>(c)});
        GaussPair p;
        double a = 0.0, b = 0.0;
        for (;;) {
            p.mu_x = 2.0 * rng.uniform() - 1.0;
            p.mu_y = 2.0 * rng.uniform() - 1.0;
            p.var_x = 0.3 + 1.7 * rng.uniform();
            p.var_y = 0.3 + 1.7 * rng.uniform();
            a = 2.0 * rng.uniform() - 1.0;
            b = 2.0 * rng.uniform() - 1.0;
            // keep the conditioning event common enough for a stable oracle
            const double r = (p.mu_x - p.mu_y - a) / std::sqrt(p.var_x + p.var_y);
            if (std_cdf(r) >= 0.05) break;
        }
        const double sd_x = std::sqrt(p.var_x);
        const double sd_y = std::sqrt(p.var_y);
        Acc first, second;
        for (long i = 0; i < draws_per_config; ++i) {
            const double x = rng.normal(p.mu_x, sd_x);
            const double y = rng.normal(p.mu_y, sd_y);
            if (x > y + a) {
                first.add(x);
                second.add((x + b) * (x + b));
            }
        }
        const double z1 = first.z(trunc_mean(p, a));
        const double z2 = second.z(trunc_second_moment(p, a, b));
        CheckResult r;
        r.name = "lemma/config" + std::to_string(c);
        r.observed = std::max(z1, z2);
        r.tolerance = 3.0;
        r.pass = r.observed <= r.tolerance;
        r.detail = fmt("z(mean)=%.2f z(second)=%.2f", z1, z2);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CheckResult> suite_bias(std::uint64_t seed, long reps) {
    std::vector<CheckResult> out;
    int cfg = 0;
    for (double delta : {0.0, 0.1, 0.5}) {
        for (double ratio : {0.8, 1.25}) {
            // small arms at the wide gap so the losing arm still gets selected
            const Allocation alloc = delta > 0.3 ? Allocation{{50, 30, 30}}
                                                 : Allocation{{100, 150, 150}};
            const Hyperparams h = grid_point(delta, ratio);
            const double se1 = std::sqrt(h.sigma2[1] / static_cast<double>(alloc.n[1]));
            const double se2 = std::sqrt(h.sigma2[2] / static_cast<double>(alloc.n[2]));
            Rng rng = Rng::substream(seed, {2, static_cast<std::uint64_t>(cfg)});
            Acc err[3];
            for (long i = 0; i < reps; ++i) {
                const double m1 = rng.normal(h.mu[1], se1);
                const double m2 = rng.normal(h.mu[2], se2);
                const int w = select_winner(m1, m2, rng).winner;
                err[w].add((w == 1 ? m1 : m2) - h.mu[w]);
            }
            const double z1 = err[1].z(bias_term(h, alloc, 1));
            const double z2 = err[2].z(bias_term(h, alloc, 2));
            CheckResult r;
            r.name = fmt("bias/delta%.2g_ratio%.2f", delta, ratio);
            r.observed = std::max(z1, z2);
            r.tolerance = 3.0;
            r.pass = r.observed <= r.tolerance;
            r.detail = fmt("z(arm1)=%.2f z(arm2)=%.2f", z1, z2);
            out.push_back(std::move(r));
            ++cfg;
        }
    }

    // corrected estimator conditionally centered; raw estimator not
    {
        const Allocation alloc{{100, 150, 150}};
        const Hyperparams h = grid_point(0.1, 0.8);
        const double se0 = std::sqrt(h.sigma2[0] / static_cast<double>(alloc.n[0]));
        const double se1 = std::sqrt(h.sigma2[1] / static_cast<double>(alloc.n[1]));
        const double se2 = std::sqrt(h.sigma2[2] / static_cast<double>(alloc.n[2]));
        Rng rng = Rng::substream(seed, {2, 100});
        Acc corrected[3], raw[3];
        for (long i = 0; i < reps; ++i) {
            const double m0 = rng.normal(h.mu[0], se0);
            const double m1 = rng.normal(h.mu[1], se1);
            const double m2 = rng.normal(h.mu[2], se2);
            const int w = select_winner(m1, m2, rng).winner;
            const double tau_raw = (w == 1 ? m1 : m2) - m0;
            raw[w].add(tau_raw - h.tau(w));
            corrected[w].add(debias(tau_raw, bias_term(h, alloc, w)) - h.tau(w));
        }
        CheckResult centered;
        centered.name = "bias/debiased-centered";
        centered.observed = std::max(corrected[1].z(0.0), corrected[2].z(0.0));
        centered.tolerance = 3.0;
        centered.pass = centered.observed <= centered.tolerance;
        centered.detail = fmt("z(arm1)=%.2f z(arm2)=%.2f", corrected[1].z(0.0),
                              corrected[2].z(0.0));
        out.push_back(std::move(centered));

        CheckResult biased;
        biased.name = "bias/raw-off-center";
        biased.observed = std::min(raw[1].z(0.0), raw[2].z(0.0));
        biased.tolerance = 5.0;
        biased.pass = biased.observed > biased.tolerance;  // must EXCEED 5 sigma
        biased.detail = fmt("z(arm1)=%.2f z(arm2)=%.2f (must exceed tolerance)", raw[1].z(0.0),
                            raw[2].z(0.0));
        out.push_back(std::move(biased));
    }
    return out;
}

std::vector<CheckResult> suite_mse(std::uint64_t seed, long reps) {
    std::vector<CheckResult> out;
    {
        Hyperparams h;
        h.mu = {0.0, 0.0, 0.0};
        h.sigma2 = {1.0, 1.0, 1.0};
        const double target = (1.0 - 1.0 / M_PI) / 100.0;
        CheckResult spot;
        spot.name = "mse/spot-value";
        spot.observed = std::fabs(mse_treatment(h, 100.0, 100.0) - target);
        spot.tolerance = 1e-9;
        spot.pass = spot.observed <= spot.tolerance;
        spot.detail = fmt("closed=%.12g target=%.12g", mse_treatment(h, 100.0, 100.0), target);
        out.push_back(std::move(spot));
    }

    int cfg = 0;
    for (double delta : {0.1, 0.15}) {
        for (double ratio : {0.8, 1.25}) {
            const Hyperparams h = grid_point(delta, ratio);
            const Allocation alloc = solve_oracle_allocation(h, 600);
            const double closed = oracle_mse(h, alloc);
            const double tau_max = h.tau(h.best_arm());
            const double se0 = std::sqrt(h.sigma2[0] / static_cast<double>(alloc.n[0]));
            const double se1 = std::sqrt(h.sigma2[1] / static_cast<double>(alloc.n[1]));
            const double se2 = std::sqrt(h.sigma2[2] / static_cast<double>(alloc.n[2]));
            Rng rng = Rng::substream(seed, {3, static_cast<std::uint64_t>(cfg)});

            Acc sq;
            // batch means for the decomposition right-hand side
            constexpr int kBatches = 100;
            const long batch_len = reps / kBatches;
            Acc rhs;
            long mis = 0;
            Acc by_winner[3];
            const auto flush_batch = [&] {
                double ecv = 0.0;
                const long nb = by_winner[1].n + by_winner[2].n;
                for (int w = 1; w <= 2; ++w) {
                    if (by_winner[w].n < 2) continue;
                    const double m = by_winner[w].mean();
                    const double var = (by_winner[w].sumsq -
                                        static_cast<double>(by_winner[w].n) * m * m) /
                                       static_cast<double>(by_winner[w].n - 1);
                    ecv += var * static_cast<double>(by_winner[w].n) / static_cast<double>(nb);
                }
                rhs.add(delta * delta * static_cast<double>(mis) / static_cast<double>(nb) + ecv);
                mis = 0;
                by_winner[1] = Acc{};
                by_winner[2] = Acc{};
            };

            for (long i = 0; i < kBatches * batch_len; ++i) {
                const double m0 = rng.normal(h.mu[0], se0);
                const double m1 = rng.normal(h.mu[1], se1);
                const double m2 = rng.normal(h.mu[2], se2);
                const int w = select_winner(m1, m2, rng).winner;
                const double est = debias((w == 1 ? m1 : m2) - m0, bias_term(h, alloc, w));
                const double d = est - tau_max;
                sq.add(d * d);
                if (w != h.best_arm()) ++mis;
                by_winner[w].add(est);
                if ((i + 1) % batch_len == 0) flush_batch();
            }

            CheckResult mc;
            mc.name = fmt("mse/closed-vs-mc_d%.2g_r%.2f", delta, ratio);
            mc.observed = sq.z(closed);
            mc.tolerance = 3.0;
            mc.pass = mc.observed <= mc.tolerance;
            mc.detail = fmt("closed=%.6g mc=%.6g", closed, sq.mean());
            out.push_back(std::move(mc));

            if (cfg == 0) {
                CheckResult dec;
                dec.name = "mse/decomposition";
                dec.observed = rhs.z(closed);
                dec.tolerance = 3.0;
                dec.pass = dec.observed <= dec.tolerance;
                dec.detail = fmt("closed=%.6g missel+condvar=%.6g", closed, rhs.mean());
                out.push_back(std::move(dec));
            }
            ++cfg;
        }
    }
    return out;
}

std::vector<CheckResult> suite_selection(std::uint64_t seed, long reps) {
    std::vector<CheckResult> out;
    const auto run = [&](double delta, long n, double sigma2, std::uint64_t tag,
                         const std::string& name) {
        const double V = sigma2 / static_cast<double>(n) * 2.0;
        const double target = std_cdf(delta / std::sqrt(V));
        const double se = std::sqrt(sigma2 / static_cast<double>(n));
        Rng rng = Rng::substream(seed, {4, tag});
        long hits = 0;
        for (long i = 0; i < reps; ++i) {
            const double m1 = rng.normal(0.0, se);
            const double m2 = rng.normal(delta, se);
            if (select_winner(m1, m2, rng).winner == 2) ++hits;
        }
        const double p = static_cast<double>(hits) / static_cast<double>(reps);
        const double mc_se = std::sqrt(target * (1.0 - target) / static_cast<double>(reps));
        CheckResult r;
        r.name = name;
        r.observed = std::fabs(p - target) / mc_se;
        r.tolerance = 3.0;
        r.pass = r.observed <= r.tolerance;
        r.detail = fmt("freq=%.5f predicted=%.5f", p, target);
        return r;
    };
    out.push_back(run(0.1, 200, 0.5, 0, "selection/phi-prediction"));
    out.push_back(run(0.0, 200, 0.5, 1, "selection/null-symmetry"));
    return out;
}

std::vector<CheckResult> suite_convergence(std::uint64_t seed, long reps) {
    const Hyperparams h = grid_point(0.3, 1.25);
    const int wmax = h.best_arm();
    const NeymanTarget target = neyman_allocation(std::sqrt(h.sigma2[0]), std::sqrt(h.sigma2[wmax]));
    NormalSource source(h);

    const std::array<long, 3> T_grid{1000, 10000, 100000};
    std::array<double, 3> med{};
    for (std::size_t ti = 0; ti < T_grid.size(); ++ti) {
        const long T = T_grid[ti];
        const long T0 = std::lround(std::pow(static_cast<double>(T), 4.0 / 7.0));
        const long third = T0 / 3;
        const Allocation pilot{{T0 - 2 * third, third, third}};
        const ClipDomain clip = ClipDomain::bind(0.25, T);
        std::vector<double> dist(static_cast<std::size_t>(reps));
        for (long rep = 0; rep < reps; ++rep) {
            Rng rng = Rng::substream(seed, {5, static_cast<std::uint64_t>(T),
                                            static_cast<std::uint64_t>(rep)});
            std::array<std::vector<double>, 3> draws;
            for (int w = 0; w < 3; ++w) source.draw(w, pilot.n[w], rng, draws[w]);
            const ArmStats stats = sample_stats(draws);
            const Allocation post =
                solve_adaptive_allocation(stats, pilot, T - pilot.total(), clip);
            double ss = 0.0;
            for (int w = 0; w < 3; ++w) {
                const double p_hat =
                    static_cast<double>(pilot.n[w] + post.n[w]) / static_cast<double>(T);
                const double d = p_hat - target.p_star[w];
                ss += d * d;
            }
            dist[static_cast<std::size_t>(rep)] = std::sqrt(ss);
        }
        auto mid = dist.begin() + dist.size() / 2;
        std::nth_element(dist.begin(), mid, dist.end());
        med[ti] = *mid;
    }

    std::vector<CheckResult> out;
    for (int i = 1; i < 3; ++i) {
        CheckResult r;
        r.name = "convergence/T" + std::to_string(T_grid[i - 1]) + "-to-T" +
                 std::to_string(T_grid[i]);
        r.observed = med[static_cast<std::size_t>(i)];
        r.tolerance = med[static_cast<std::size_t>(i - 1)];
        r.pass = r.observed < r.tolerance;  // strictly decreasing median distance
        r.detail = fmt("median ||p-p*||: %.5f -> %.5f", med[static_cast<std::size_t>(i - 1)],
                       med[static_cast<std::size_t>(i)]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "lemma") return suite_lemma(seed);
    if (name == "bias") return suite_bias(seed);
    if (name == "mse") return suite_mse(seed);
    if (name == "selection") return suite_selection(seed);
    if (name == "convergence") return suite_convergence(seed);
    throw std::invalid_argument("unknown suite: " + name);
}

bool all_pass(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

}  // namespace triex
