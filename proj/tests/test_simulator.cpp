#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "triex/simulator.hpp"

using namespace triex;
using nlohmann::json;

namespace {

SimConfig small_config() {
    SimConfig cfg;
    cfg.delta = 0.1;
    cfg.sigma_ratio = 0.8;
    cfg.T_grid = {150, 300};
    cfg.T0_rule = {false, 1.0 / 3.0};
    cfg.replications = 400;
    cfg.master_seed = 31337;
    cfg.methods = {Method::Proposal, Method::SsSe, Method::Nonadaptive, Method::Oracle};
    return cfg;
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (Method m : {Method::Proposal, Method::ProposalNoCorr, Method::SsSe, Method::SsHyper,
                     Method::Nonadaptive, Method::Oracle})
        CHECK(method_from_name(method_name(m)).value() == m);
    CHECK(!method_from_name("bogus").has_value());
}

TEST_CASE("config json parsing and validation") {
    json j{{"schema_version", 1},
           {"delta", 0.1},
           {"sigma_ratio", 0.8},
           {"T_grid", {300}},
           {"replications", 100},
           {"master_seed", 7},
           {"methods", {"proposal", "oracle"}}};
    const SimConfig cfg = sim_config_from_json(j);
    CHECK(cfg.methods.size() == 2);
    CHECK(cfg.T0_rule.budget(300) == 100);
    // derived variances satisfy sigma1^2 + sigma2^2 = 1 with the given ratio
    const Hyperparams h = cfg.hyperparams();
    CHECK(h.sigma2[1] + h.sigma2[2] == doctest::Approx(1.0));
    CHECK(std::sqrt(h.sigma2[2] / h.sigma2[1]) == doctest::Approx(0.8));

    json bad = j;
    bad.erase("schema_version");
    CHECK_THROWS(sim_config_from_json(bad));
    bad = j;
    bad["methods"] = {"nope"};
    CHECK_THROWS(sim_config_from_json(bad));
    bad = j;
    bad["T_grid"] = {10};  // T0 rule lands below the minimum pilot
    CHECK_THROWS(sim_config_from_json(bad));
    bad = j;
    bad["replications"] = 0;
    CHECK_THROWS(sim_config_from_json(bad));
}

TEST_CASE("benchmark produces one record per method and budget") {
    const SimConfig cfg = small_config();
    const auto records = run_benchmark(cfg);
    REQUIRE(records.size() == cfg.T_grid.size() * cfg.methods.size());
    for (const auto& r : records) {
        CHECK(r.selection_prob >= 0.0);
        CHECK(r.selection_prob <= 1.0);
        CHECK(r.expected_cond_var >= 0.0);
        CHECK(r.mse >= 0.0);
        CHECK(r.replications == cfg.replications);
        CHECK(r.T0 == r.T / 3);
        // MSE >= expected conditional variance up to MC noise
        CHECK(r.mse >= r.expected_cond_var - 3.0 * (r.mse_se + r.expected_cond_var_se));
    }
}

TEST_CASE("identical seeds give identical records regardless of workers") {
    SimConfig cfg = small_config();
    cfg.workers = 1;
    const std::string csv1 = metrics_to_csv(run_benchmark(cfg));
    cfg.workers = 3;
    const std::string csv3 = metrics_to_csv(run_benchmark(cfg));
    CHECK(csv1 == csv3);
    cfg.workers = 1;
    CHECK(metrics_to_csv(run_benchmark(cfg)) == csv1);
}

TEST_CASE("different seeds move the estimates") {
    SimConfig cfg = small_config();
    cfg.T_grid = {150};
    cfg.methods = {Method::Nonadaptive};
    const auto a = run_benchmark(cfg);
    cfg.master_seed += 1;
    const auto b = run_benchmark(cfg);
    CHECK(a[0].mse != b[0].mse);
}

TEST_CASE("csv schema") {
    SimConfig cfg = small_config();
    cfg.T_grid = {150};
    cfg.methods = {Method::Oracle};
    const std::string csv = metrics_to_csv(run_benchmark(cfg));
    CHECK(csv.rfind("method,T,T0,delta,sigma_ratio,mse,mse_se,sel_prob,sel_prob_se,"
                    "max_cond_bias,max_cond_bias_se,exp_cond_var,exp_cond_var_se,"
                    "replications,seed\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("oracle,150,50,") != std::string::npos);
}

TEST_CASE("metrics serialize to json") {
    SimConfig cfg = small_config();
    cfg.T_grid = {150};
    cfg.methods = {Method::Proposal};
    const auto records = run_benchmark(cfg);
    const json j(records);
    CHECK(j.size() == 1);
    CHECK(j[0].at("method") == "proposal");
    CHECK(j[0].at("T") == 150);
    CHECK(j[0].contains("mse_se"));
}

TEST_CASE("sweep_T0 covers the grid for proposal and ss_hyper") {
    SimConfig cfg = small_config();
    cfg.replications = 200;
    const auto records = sweep_T0(cfg, 300, {60, 90, 120});
    REQUIRE(records.size() == 6);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].T == 300);
        CHECK(records[i].T0 == std::vector<long>{60, 60, 90, 90, 120, 120}[i]);
    }
    CHECK_THROWS(sweep_T0(cfg, 300, {299}));
}

TEST_CASE("null-symmetric nonadaptive selection is fair") {
    SimConfig cfg;
    cfg.delta = 0.0;
    cfg.sigma_ratio = 1.0;
    cfg.T_grid = {300};
    cfg.replications = 20000;
    cfg.master_seed = 99;
    cfg.methods = {Method::Nonadaptive};
    const auto records = run_benchmark(cfg);
    CHECK(std::fabs(records[0].selection_prob - 0.5) <
          3.0 * std::sqrt(0.25 / cfg.replications));
}
