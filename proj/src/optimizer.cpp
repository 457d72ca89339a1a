#include "triex/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace triex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// full enumeration below this many (n_t, n1) candidates
constexpr long kExhaustivePairs = 20000;
// final window fully scanned after bracketing a 1D minimum
constexpr long kScanWindow = 16;

struct Best {
    double value = kInf;
    long n1 = -1;
    long n0 = -1;
    long n2 = -1;

    // deterministic tie-break: smaller n1, then smaller n0
    void offer(double v, long c0, long c1, long c2) {
        if (v < value || (v == value && (c1 < n1 || (c1 == n1 && c0 < n0)))) {
            value = v;
            n0 = c0;
            n1 = c1;
            n2 = c2;
        }
    }
};

struct Inner {
    long n1 = -1;
    double value = kInf;
};

// Full scan of f over [lo, hi]; ties go to the smaller argument.
template <class F>
Inner scan_all(F&& f, long lo, long hi) {
    Inner best;
    for (long x = lo; x <= hi; ++x) {
        const double v = f(x);
        if (v < best.value) {
            best.value = v;
            best.n1 = x;
        }
    }
    return best;
}

// Locate a 1D minimum of a smooth objective: downhill walk with doubling
// steps to bracket it, integer ternary search to shrink the bracket, then an
// exhaustive window scan. Falls back to a full scan on narrow domains.
template <class F>
Inner local_min(F&& f, long lo, long hi, long hint) {
    if (hi - lo <= 4 * kScanWindow) return scan_all(f, lo, hi);
    long x = std::clamp(hint, lo, hi);
    double fx = f(x);
    const double fl = x > lo ? f(x - 1) : kInf;
    const double fr = x < hi ? f(x + 1) : kInf;
    long blo = std::max(lo, x - 1);
    long bhi = std::min(hi, x + 1);
    if (fl < fx || fr < fx) {
        const long dir = fl < fr ? -1 : 1;
        long prev = x;       // last point known to sit uphill of the walk
        long step = 2;       // the two unit neighbors are already examined
        x += dir;
        fx = std::min(fl, fr);
        for (;;) {
            const long nx = std::clamp(x + dir * step, lo, hi);
            if (nx == x) {  // hit the boundary while still descending
                blo = std::min(prev, x);
                bhi = std::max(prev, x);
                break;
            }
            const double nf = f(nx);
            if (nf < fx) {
                prev = x;
                x = nx;
                fx = nf;
                step *= 2;
            } else {
                blo = std::min(prev, nx);
                bhi = std::max(prev, nx);
                break;
            }
        }
    }
    while (bhi - blo > 2 * kScanWindow) {
        const long m1 = blo + (bhi - blo) / 3;
        const long m2 = bhi - (bhi - blo) / 3;
        if (f(m1) <= f(m2)) bhi = m2;
        else blo = m1;
    }
    return scan_all(f, std::max(lo, blo - kScanWindow), std::min(hi, bhi + kScanWindow));
}

// Minimize treat(e1, e2) + sigma0^2/e0 over integer post counts n_w >= lo_w
// summing to total, with effective counts e_w = n_w + off_w.
Allocation minimize_alloc(const Hyperparams& h, long total, const std::array<long, 3>& lo,
                          const std::array<long, 3>& off, ObjectiveKind kind) {
    const long lo_t = lo[1] + lo[2];
    const long hi_t = total - lo[0];
    if (hi_t < lo_t || lo_t < 0)
        throw std::invalid_argument("allocation domain is empty for this budget");

    const auto inner_f = [&](long n_t) {
        return [&, n_t](long n1) {
            const double e1 = static_cast<double>(n1 + off[1]);
            const double e2 = static_cast<double>(n_t - n1 + off[2]);
            return treatment_objective(h, e1, e2, kind);
        };
    };
    const auto control_term = [&](long n_t) {
        return h.sigma2[0] / static_cast<double>(total - n_t + off[0]);
    };

    Best best;
    const double range_t = static_cast<double>(hi_t - lo_t + 1);
    if (range_t * range_t / 2.0 <= static_cast<double>(kExhaustivePairs)) {
        for (long n_t = lo_t; n_t <= hi_t; ++n_t) {
            if (n_t - lo[2] < lo[1]) continue;
            const Inner in = scan_all(inner_f(n_t), lo[1], n_t - lo[2]);
            best.offer(in.value + control_term(n_t), total - n_t, in.n1, n_t - in.n1);
        }
        return Allocation{{best.n0, best.n1, best.n2}};
    }

    // coarse sweep over n_t with warm-started inner splits
    const long step = std::max<long>(1, (hi_t - lo_t) / 250);
    long hint = (lo_t + hi_t) / 2 / 2;
    Best coarse;
    for (long n_t = lo_t; n_t <= hi_t; n_t += step) {
        if (n_t - lo[2] < lo[1]) continue;
        const Inner in = local_min(inner_f(n_t), lo[1], n_t - lo[2], hint);
        hint = in.n1;
        coarse.offer(in.value + control_term(n_t), total - n_t, in.n1, n_t - in.n1);
    }
    {  // make sure the upper boundary was visited
        const long n_t = hi_t;
        const Inner in = local_min(inner_f(n_t), lo[1], n_t - lo[2], hint);
        coarse.offer(in.value + control_term(n_t), total - n_t, in.n1, n_t - in.n1);
    }

    // exhaustive refinement around the coarse optimum
    const long center_t = coarse.n1 + coarse.n2;
    hint = coarse.n1;
    for (long n_t = std::max(lo_t, center_t - 2 * step); n_t <= std::min(hi_t, center_t + 2 * step);
         ++n_t) {
        if (n_t - lo[2] < lo[1]) continue;
        const Inner in = local_min(inner_f(n_t), lo[1], n_t - lo[2], hint);
        hint = in.n1;
        best.offer(in.value + control_term(n_t), total - n_t, in.n1, n_t - in.n1);
    }
    return Allocation{{best.n0, best.n1, best.n2}};
}

}  // namespace

SplitResult optimize_within_treatment(const Hyperparams& h, long n_t, ObjectiveKind kind) {
    h.validate();
    if (n_t < 2) throw std::invalid_argument("treatment budget must be at least 2");
    const auto f = [&](long n1) {
        return treatment_objective(h, static_cast<double>(n1), static_cast<double>(n_t - n1), kind);
    };
    Inner in;
    if (n_t - 1 <= kExhaustivePairs) {
        in = scan_all(f, 1, n_t - 1);
    } else {
        const long step = std::max<long>(1, n_t / 500);
        Inner coarse;
        for (long x = 1; x <= n_t - 1; x += step) {
            const double v = f(x);
            if (v < coarse.value) {
                coarse.value = v;
                coarse.n1 = x;
            }
        }
        in = scan_all(f, std::max<long>(1, coarse.n1 - 2 * step),
                      std::min(n_t - 1, coarse.n1 + 2 * step));
    }
    return {in.n1, n_t - in.n1, in.value};
}

Allocation solve_oracle_allocation(const Hyperparams& h, long T, ObjectiveKind kind) {
    h.validate();
    if (T < 3) throw std::invalid_argument("total budget must be at least 3");
    return minimize_alloc(h, T, {1, 1, 1}, {0, 0, 0}, kind);
}

Allocation top_up(const Allocation& full_target, const Allocation& pilot) {
    Allocation post;
    for (int w = 0; w < 3; ++w) {
        post.n[w] = full_target.n[w] - pilot.n[w];
        if (post.n[w] < 0)
            throw std::invalid_argument("full-budget target falls below the pilot counts");
    }
    return post;
}

Allocation solve_adaptive_allocation(const ArmStats& pilot_stats, const Allocation& pilot,
                                     long T1, std::optional<ClipDomain> clip,
                                     ObjectiveKind kind) {
    if (T1 < 3) throw std::invalid_argument("post-pilot budget must be at least 3");
    Hyperparams plug;
    for (int w = 0; w < 3; ++w) {
        if (!pilot_stats.var_hat[w])
            throw std::invalid_argument("solve_adaptive_allocation: pilot variance undefined");
        plug.mu[w] = pilot_stats.mean[w];
        plug.sigma2[w] = *pilot_stats.var_hat[w];
    }
    std::array<long, 3> lo{};
    if (clip) {
        const long bound =
            static_cast<long>(std::ceil(static_cast<double>(T1) * clip->delta));
        lo = {bound, bound, bound};
        if (3 * bound > T1) throw std::invalid_argument("clipped domain infeasible for this budget");
    } else {
        // an arm the pilot already covers may receive no post-pilot units
        for (int w = 0; w < 3; ++w) lo[w] = pilot.n[w] >= 2 ? 0 : 1;
    }
    return minimize_alloc(plug, T1, lo, pilot.n, kind);
}

NeymanTarget neyman_allocation(double sigma0, double sigma_w) {
    if (!(sigma0 > 0.0) || !(sigma_w > 0.0))
        throw std::invalid_argument("standard deviations must be positive");
    const double denom = sigma0 + sigma_w;
    return NeymanTarget{{sigma0 / denom, 0.0, sigma_w / denom}};
}

}  // namespace triex
