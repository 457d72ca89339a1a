#include "triex/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "triex/gaussian.hpp"

namespace triex {

namespace {

struct GapTerms {
    double s1, s2;      // per-arm mean variances sigma_w^2 / n_w
    double v, sqrt_v;   // gap variance and its root
    double z;           // Delta / sqrt(V)
    double phi;         // phi(z)
};

GapTerms gap_terms(const Hyperparams& h, double n1, double n2) {
    h.validate();
    if (!(n1 >= 1.0) || !(n2 >= 1.0))
        throw std::invalid_argument("treatment counts must be >= 1");
    GapTerms t;
    t.s1 = h.sigma2[1] / n1;
    t.s2 = h.sigma2[2] / n2;
    t.v = t.s1 + t.s2;
    t.sqrt_v = std::sqrt(t.v);
    t.z = h.delta() / t.sqrt_v;
    t.phi = std_pdf(t.z);
    return t;
}

double selection_penalty(double delta, double z) {
    // strict inequalities: no penalty at delta == 0
    if (delta > 0.0) return delta * delta * std_cdf(-z);
    if (delta < 0.0) return delta * delta * std_cdf(z);
    return 0.0;
}

}  // namespace

double mse_treatment(const Hyperparams& h, double n1, double n2) {
    const GapTerms t = gap_terms(h, n1, n2);
    // phi^2/Phi written as phi * mills_ratio so the deep tails never divide
    // two underflowed quantities
    const double arm2 = t.s2 * std_cdf(t.z) -
                        (t.s2 * t.s2 / t.v) * t.phi * (t.z + mills_ratio(t.z));
    const double arm1 = t.s1 * std_cdf(-t.z) +
                        (t.s1 * t.s1 / t.v) * t.phi * (t.z - mills_ratio(-t.z));
    return arm1 + arm2 + selection_penalty(h.delta(), t.z);
}

double mse_treatment_uncorrected(const Hyperparams& h, double n1, double n2) {
    const GapTerms t = gap_terms(h, n1, n2);
    const double arm2 = t.s2 * std_cdf(t.z) - (t.s2 * t.s2 / t.v) * t.z * t.phi;
    const double arm1 = t.s1 * std_cdf(-t.z) + (t.s1 * t.s1 / t.v) * t.z * t.phi;
    // bias-times-gap cross term on the mis-selection branch
    const double delta = h.delta();
    double cross = 0.0;
    if (delta > 0.0) cross = -2.0 * delta * (t.s1 / t.sqrt_v) * t.phi;
    else if (delta < 0.0) cross = 2.0 * delta * (t.s2 / t.sqrt_v) * t.phi;
    return arm1 + arm2 + selection_penalty(delta, t.z) + cross;
}

double treatment_objective(const Hyperparams& h, double n1, double n2, ObjectiveKind kind) {
    return kind == ObjectiveKind::Debiased ? mse_treatment(h, n1, n2)
                                           : mse_treatment_uncorrected(h, n1, n2);
}

double oracle_mse(const Hyperparams& h, const Allocation& a) {
    if (a.n[0] < 1 || a.n[1] < 1 || a.n[2] < 1)
        throw std::invalid_argument("oracle_mse requires at least one unit per arm");
    return mse_treatment(h, static_cast<double>(a.n[1]), static_cast<double>(a.n[2])) +
           h.sigma2[0] / static_cast<double>(a.n[0]);
}

double adaptive_objective(const ArmStats& pilot_stats, const Allocation& pilot,
                          const Allocation& candidate, ObjectiveKind kind) {
    Hyperparams plug;
    for (int w = 0; w < 3; ++w) {
        if (!pilot_stats.var_hat[w])
            throw std::invalid_argument("adaptive_objective: pilot variance undefined on an arm");
        plug.mu[w] = pilot_stats.mean[w];
        plug.sigma2[w] = *pilot_stats.var_hat[w];
    }
    if (!std::isfinite(plug.delta()))
        throw std::domain_error("adaptive_objective: non-finite pilot gap estimate");
    const double e0 = static_cast<double>(candidate.n[0] + pilot.n[0]);
    const double e1 = static_cast<double>(candidate.n[1] + pilot.n[1]);
    const double e2 = static_cast<double>(candidate.n[2] + pilot.n[2]);
    if (!(e0 >= 1.0)) throw std::invalid_argument("control effective count must be >= 1");
    return treatment_objective(plug, e1, e2, kind) + plug.sigma2[0] / e0;
}

double neyman_variance(const Hyperparams& h, const std::array<double, 3>& p, int winner) {
    h.validate();
    if (winner != 1 && winner != 2) throw std::invalid_argument("winner must be 1 or 2");
    if (!(p[0] > 0.0) || !(p[winner] > 0.0))
        throw std::invalid_argument("neyman_variance: zero proportion on a used coordinate");
    return h.sigma2[winner] / p[winner] + h.sigma2[0] / p[0];
}

}  // namespace triex
