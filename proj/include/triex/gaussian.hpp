#pragma once

namespace triex {

// Parameters of two independent normals X ~ N(mu_x, var_x), Y ~ N(mu_y, var_y).
struct GaussPair {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double var_x = 1.0;
    double var_y = 1.0;

    void validate() const;
};

// standard normal density
double std_pdf(double z);

// standard normal CDF via the complementary error function; absolute error
// below 1e-12 over the representable range, tails stay nonzero down to
// z about -37.5 where the double result underflows
double std_cdf(double z);

// log of the standard normal CDF, finite for all z down to -1e6
double log_std_cdf(double z);

// phi(z) / Phi(z); direct quotient for z > -6, continued fraction for the
// deep lower tail so the value stays finite and relatively accurate
double mills_ratio(double z);

// E[X | X > Y + a]
double trunc_mean(const GaussPair& p, double a);

// E[(X + b)^2 | X > Y + a]
double trunc_second_moment(const GaussPair& p, double a, double b);

}  // namespace triex
