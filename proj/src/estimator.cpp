#include "triex/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "triex/gaussian.hpp"

namespace triex {

ArmStats sample_stats(const std::array<std::vector<double>, 3>& outcomes_by_arm) {
    ArmStats stats;
    for (int w = 0; w < 3; ++w) {
        const auto& ys = outcomes_by_arm[w];
        const long n = static_cast<long>(ys.size());
        stats.count[w] = n;
        if (n == 0) {
            stats.mean[w] = 0.0;
            continue;
        }
        double sum = 0.0;
        for (double y : ys) sum += y;
        const double mean = sum / static_cast<double>(n);
        stats.mean[w] = mean;
        if (n >= 2) {
            double ss = 0.0;
            for (double y : ys) ss += (y - mean) * (y - mean);
            stats.var_hat[w] = ss / static_cast<double>(n - 1);
        }
    }
    return stats;
}

SelectionResult select_winner(double mean1, double mean2, Rng& rng) {
    if (!std::isfinite(mean1) || !std::isfinite(mean2))
        throw std::domain_error("select_winner: non-finite mean");
    if (mean1 == mean2) return {rng.coin() ? 2 : 1, true};
    return {mean2 > mean1 ? 2 : 1, false};
}

double bias_term(const Hyperparams& h, const Allocation& a, int winner) {
    h.validate();
    if (a.n[1] < 1 || a.n[2] < 1)
        throw std::invalid_argument("bias_term requires at least one unit on each treatment arm");
    if (winner != 1 && winner != 2) throw std::invalid_argument("winner must be 1 or 2");
    const double v = gap_variance(h, a);
    const double sqrt_v = std::sqrt(v);
    const double z = h.delta() / sqrt_v;
    // phi(z)/Phi(z) for winner 2, phi(z)/Phi(-z) for winner 1
    const double ratio = winner == 2 ? mills_ratio(z) : mills_ratio(-z);
    return h.sigma2[winner] / (static_cast<double>(a.n[winner]) * sqrt_v) * ratio;
}

std::pair<double, double> pooled_mean(const ArmStats& pilot, const ArmStats& post, int arm) {
    const long m = pilot.count[arm];
    const long n = post.count[arm];
    if (m < 0 || n < 0 || m + n == 0)
        throw std::invalid_argument("pooled_mean: no observations on arm");
    const double mm = static_cast<double>(m);
    const double nn = static_cast<double>(n);
    const double mean = (mm * pilot.mean[arm] + nn * post.mean[arm]) / (mm + nn);
    return {mean, mm / (mm + nn)};
}

}  // namespace triex
