#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "triex/estimator.hpp"
#include "triex/gaussian.hpp"

using namespace triex;

TEST_CASE("sample_stats computes means and unbiased variances") {
    std::array<std::vector<double>, 3> data;
    data[0] = {1.0, 2.0, 3.0};
    data[1] = {4.0};
    data[2] = {2.0, 2.0};
    const ArmStats s = sample_stats(data);
    CHECK(s.count == std::array<long, 3>{3, 1, 2});
    CHECK(s.mean[0] == doctest::Approx(2.0));
    CHECK(s.var_hat[0].value() == doctest::Approx(1.0));
    CHECK(!s.var_hat[1].has_value());  // a single draw has no variance estimate
    CHECK(s.var_hat[2].value() == doctest::Approx(0.0));
    CHECK(s.delta_hat() == doctest::Approx(2.0 - 4.0));
}

TEST_CASE("winner selection is the strict argmax away from ties") {
    Rng rng(1);
    CHECK(select_winner(0.2, 0.5, rng).winner == 2);
    CHECK(select_winner(0.5, 0.2, rng).winner == 1);
    CHECK(!select_winner(0.2, 0.5, rng).tie_broken);
}

TEST_CASE("exact ties break by a fair coin") {
    Rng rng(77);
    int ones = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const SelectionResult r = select_winner(1.5, 1.5, rng);
        CHECK(r.tie_broken);
        if (r.winner == 1) ++ones;
    }
    CHECK(std::fabs(ones / static_cast<double>(n) - 0.5) < 0.02);
}

TEST_CASE("bias_term reproduces the closed form") {
    Hyperparams h;
    h.mu = {0.0, 0.1, 0.3};
    h.sigma2 = {1.0, 0.5, 0.8};
    const Allocation a{{50, 40, 60}};
    const double V = 0.5 / 40 + 0.8 / 60;
    const double z = (h.mu[2] - h.mu[1]) / std::sqrt(V);
    const double b2 = 0.8 / (60 * std::sqrt(V)) * std_pdf(z) / std_cdf(z);
    const double b1 = 0.5 / (40 * std::sqrt(V)) * std_pdf(z) / std_cdf(-z);
    CHECK(bias_term(h, a, 2) == doctest::Approx(b2).epsilon(1e-12));
    CHECK(bias_term(h, a, 1) == doctest::Approx(b1).epsilon(1e-12));
    CHECK(bias_term(h, a, 1) > 0.0);
    CHECK(bias_term(h, a, 2) > 0.0);
}

TEST_CASE("bias_term is symmetric under arm exchange at delta zero") {
    Hyperparams h;
    h.mu = {0.0, 0.2, 0.2};
    h.sigma2 = {1.0, 0.6, 0.6};
    const Allocation a{{30, 50, 50}};
    CHECK(bias_term(h, a, 1) == doctest::Approx(bias_term(h, a, 2)).epsilon(1e-14));
    // at delta = 0 the conditioning probability is 1/2
    const double V = 2 * 0.6 / 50;
    CHECK(bias_term(h, a, 2) ==
          doctest::Approx(0.6 / (50 * std::sqrt(V)) * std_pdf(0.0) / 0.5).epsilon(1e-13));
}

TEST_CASE("bias_term matches the Monte Carlo conditional bias") {
    Hyperparams h;
    h.mu = {0.0, 0.0, 0.12};
    h.sigma2 = {1.0, 0.45, 0.55};
    const Allocation a{{80, 120, 100}};
    Rng rng(5150);
    double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
    long cnt[3] = {0, 0, 0};
    const double se1 = std::sqrt(h.sigma2[1] / a.n[1]);
    const double se2 = std::sqrt(h.sigma2[2] / a.n[2]);
    for (long i = 0; i < 400000; ++i) {
        const double m1 = rng.normal(h.mu[1], se1);
        const double m2 = rng.normal(h.mu[2], se2);
        const int w = select_winner(m1, m2, rng).winner;
        const double e = (w == 1 ? m1 : m2) - h.mu[w];
        sum[w] += e;
        sumsq[w] += e * e;
        ++cnt[w];
    }
    for (int w = 1; w <= 2; ++w) {
        const double mean = sum[w] / cnt[w];
        const double se = std::sqrt((sumsq[w] / cnt[w] - mean * mean) / cnt[w]);
        CHECK(std::fabs(mean - bias_term(h, a, w)) < 4 * se);
    }
}

TEST_CASE("debias subtracts the correction") {
    CHECK(debias(0.5, 0.03) == doctest::Approx(0.47));
}

TEST_CASE("pooled mean equals the grand mean with omega = m/(m+n)") {
    std::array<std::vector<double>, 3> pilot_data{}, post_data{};
    pilot_data[1] = {1.0, 3.0};          // mean 2, m = 2
    post_data[1] = {5.0, 5.0, 5.0, 5.0}; // mean 5, n = 4
    const ArmStats pilot = sample_stats(pilot_data);
    const ArmStats post = sample_stats(post_data);
    const auto [mean, omega] = pooled_mean(pilot, post, 1);
    CHECK(mean == doctest::Approx(24.0 / 6.0).epsilon(1e-15));
    CHECK(omega == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
}
