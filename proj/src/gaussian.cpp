#include "triex/gaussian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace triex {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

void require_finite(double z, const char* what) {
    if (!std::isfinite(z)) throw std::domain_error(std::string("non-finite input: ") + what);
}

// Mills ratio of the lower tail via the Laplace continued fraction
//   phi(z)/Phi(z) = t + 1/(t + 2/(t + 3/(t + ...))),  t = -z > 0,
// evaluated with the modified Lentz algorithm.
double mills_continued_fraction(double t) {
    const double tiny = 1e-300;
    double f = t;
    if (f == 0.0) f = tiny;
    double c = f;
    double d = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double a = static_cast<double>(k);
        d = t + a * d;
        if (d == 0.0) d = tiny;
        c = t + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return f;
}

}  // namespace

void GaussPair::validate() const {
    require_finite(mu_x, "mu_x");
    require_finite(mu_y, "mu_y");
    if (!(var_x > 0.0) || !std::isfinite(var_x) || !(var_y > 0.0) || !std::isfinite(var_y))
        throw std::domain_error("GaussPair variances must be positive and finite");
}

double std_pdf(double z) {
    require_finite(z, "std_pdf");
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double std_cdf(double z) {
    require_finite(z, "std_cdf");
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double log_std_cdf(double z) {
    require_finite(z, "log_std_cdf");
    if (z > -6.0) return std::log(std_cdf(z));
    return -0.5 * z * z - kLogSqrt2Pi - std::log(mills_continued_fraction(-z));
}

double mills_ratio(double z) {
    require_finite(z, "mills_ratio");
    if (z > -6.0) return std_pdf(z) / std_cdf(z);
    return mills_continued_fraction(-z);
}

double trunc_mean(const GaussPair& p, double a) {
    p.validate();
    require_finite(a, "a");
    const double gap_var = p.var_x + p.var_y;
    const double gap_sd = std::sqrt(gap_var);
    const double r = ((p.mu_x - p.mu_y) - a) / gap_sd;
    return p.mu_x + (p.var_x / gap_sd) * mills_ratio(r);
}

double trunc_second_moment(const GaussPair& p, double a, double b) {
    p.validate();
    require_finite(a, "a");
    require_finite(b, "b");
    const double gap_var = p.var_x + p.var_y;
    const double gap_sd = std::sqrt(gap_var);
    const double r = ((p.mu_x - p.mu_y) - a) / gap_sd;
    const double slope = p.var_x / gap_sd;
    return (p.mu_x + b) * (p.mu_x + b) + p.var_x +
           slope * mills_ratio(r) * (-slope * r + 2.0 * p.mu_x + 2.0 * b);
}

}  // namespace triex
