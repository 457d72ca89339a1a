#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "triex/model.hpp"

using namespace triex;
using nlohmann::json;

TEST_CASE("hyperparameter accessors") {
    Hyperparams h;
    h.mu = {1.0, 2.0, 5.0};
    h.sigma2 = {1.0, 4.0, 9.0};
    CHECK(h.delta() == 3.0);
    CHECK(h.tau(1) == 1.0);
    CHECK(h.tau(2) == 4.0);
    CHECK(h.best_arm() == 2);
    h.mu[1] = 7.0;
    CHECK(h.best_arm() == 1);
    h.mu[1] = 5.0;  // exact tie resolves to arm 2
    CHECK(h.best_arm() == 2);
}

TEST_CASE("hyperparameter validation") {
    Hyperparams h;
    CHECK_NOTHROW(h.validate());
    h.sigma2[1] = 0.0;
    CHECK_THROWS(h.validate());
    h.sigma2[1] = 1.0;
    h.mu[0] = std::nan("");
    CHECK_THROWS(h.validate());
}

TEST_CASE("gap variance") {
    Hyperparams h;
    h.sigma2 = {1.0, 2.0, 3.0};
    Allocation a{{10, 4, 6}};
    CHECK(gap_variance(h, a) == doctest::Approx(2.0 / 4 + 3.0 / 6).epsilon(1e-15));
    CHECK(a.total() == 20);
}

TEST_CASE("clip domain binds to the budget") {
    const ClipDomain c = ClipDomain::bind(0.25, 10000);
    CHECK(c.alpha == 0.25);
    CHECK(c.delta == doctest::Approx(0.05).epsilon(1e-12));  // T^(-1/4)/2
    const ClipDomain d = ClipDomain::bind(1.0 / 3.0, 1000);
    CHECK(d.delta == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_THROWS(ClipDomain::bind(0.5, 400));  // alpha must stay inside (0, 1/2)
}

TEST_CASE("json round trips") {
    Hyperparams h;
    h.mu = {0.1, -0.2, 0.3};
    h.sigma2 = {1.5, 0.5, 2.5};
    const Hyperparams h2 = json(h).get<Hyperparams>();
    CHECK(h2.mu == h.mu);
    CHECK(h2.sigma2 == h.sigma2);

    Allocation a{{3, 4, 5}};
    CHECK(json(a).get<Allocation>().n == a.n);

    TwoStagePlan plan{a, 30, Allocation{{6, 6, 6}}};
    const TwoStagePlan plan2 = json(plan).get<TwoStagePlan>();
    CHECK(plan2.pilot.n == plan.pilot.n);
    CHECK(plan2.total_budget == 30);
    CHECK(plan2.post.n == plan.post.n);

    ArmStats stats;
    stats.count = {1, 2, 3};
    stats.mean = {0.5, 1.5, 2.5};
    stats.var_hat = {std::nullopt, 0.25, 0.75};
    const json js(stats);
    CHECK(js.at("var_hat")[0].is_null());
    const ArmStats stats2 = js.get<ArmStats>();
    CHECK(stats2.count == stats.count);
    CHECK(!stats2.var_hat[0].has_value());
    CHECK(stats2.var_hat[2].value() == 0.75);

    DesignOutcome o;
    o.winner = 1;
    o.tau_raw = 0.4;
    o.bias_term = 0.05;
    o.tau_debiased = 0.35;
    const DesignOutcome o2 = json(o).get<DesignOutcome>();
    CHECK(o2.winner == 1);
    CHECK(o2.tau_debiased == 0.35);

    NeymanTarget t{{0.4, 0.0, 0.6}};
    CHECK(json(t).get<NeymanTarget>().p_star == t.p_star);

    const ClipDomain c = ClipDomain::bind(0.25, 256);
    const ClipDomain c2 = json(c).get<ClipDomain>();
    CHECK(c2.delta == c.delta);
}
