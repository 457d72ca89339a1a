#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "triex/design.hpp"
#include "triex/objective.hpp"
#include "triex/optimizer.hpp"
#include "triex/replay.hpp"
#include "triex/simulator.hpp"
#include "triex/validate.hpp"

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

triex::Hyperparams hyperparams_from_sds(double delta, double sigma0, double sigma1,
                                        double sigma2) {
    triex::Hyperparams h;
    h.mu = {0.0, 0.0, delta};
    h.sigma2 = {sigma0 * sigma0, sigma1 * sigma1, sigma2 * sigma2};
    h.validate();
    return h;
}

int cmd_oracle_alloc(double delta, double sigma0, double sigma1, double sigma2, long T,
                     bool as_json) {
    const triex::Hyperparams h = hyperparams_from_sds(delta, sigma0, sigma1, sigma2);
    const triex::Allocation alloc = triex::solve_oracle_allocation(h, T);
    const double value = triex::oracle_mse(h, alloc);
    if (as_json) {
        json j{{"allocation", alloc}, {"oracle_mse", value}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("n0=%ld n1=%ld n2=%ld  oracle_mse=%.10g\n", alloc.n[0], alloc.n[1],
                    alloc.n[2], value);
    }
    return 0;
}

int cmd_two_stage(double delta, double sigma0, double sigma1, double sigma2, long T, long T0,
                  std::uint64_t seed, bool no_debias, bool as_json) {
    const triex::Hyperparams h = hyperparams_from_sds(delta, sigma0, sigma1, sigma2);
    triex::NormalSource source(h);
    const long third = T0 / 3;
    const triex::Allocation pilot{{T0 - 2 * third, third, third}};
    triex::Rng rng = triex::Rng::substream(seed, {0});
    triex::TwoStageOptions opts;
    opts.apply_correction = !no_debias;
    const triex::TwoStageResult res = triex::run_two_stage(source, T, pilot, rng, opts);
    if (as_json) {
        json j{{"plan", res.plan},
               {"outcome", res.outcome},
               {"pilot_stats", res.pilot_stats},
               {"variance_floored", res.variance_floored},
               {"seed", seed}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("pilot:  n0=%ld n1=%ld n2=%ld\n", pilot.n[0], pilot.n[1], pilot.n[2]);
        std::printf("post:   n0=%ld n1=%ld n2=%ld\n", res.plan.post.n[0], res.plan.post.n[1],
                    res.plan.post.n[2]);
        std::printf("winner=%d tau_raw=%.8g bias_term=%.8g tau_debiased=%.8g\n",
                    res.outcome.winner, res.outcome.tau_raw, res.outcome.bias_term,
                    res.outcome.tau_debiased);
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::uint64_t seed, bool full_scale, int workers, bool as_json) {
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
    json j = json::parse(in);
    triex::SimConfig cfg = triex::sim_config_from_json(j);
    cfg.master_seed = seed;
    cfg.workers = workers;
    if (full_scale) cfg.replications = 500000;
    cfg.validate();

    const std::vector<triex::MetricsRecord> records = triex::run_benchmark(cfg);
    const std::string csv = triex::metrics_to_csv(records);
    if (!out_path.empty()) write_text(out_path, csv);
    if (as_json) {
        std::cout << json(records).dump(2) << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

std::map<std::string, int> parse_arm_map(const std::string& spec) {
    std::map<std::string, int> arm_map;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw std::invalid_argument("bad --map entry (want label=index): " + item);
        arm_map[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    }
    if (arm_map.empty()) throw std::invalid_argument("--map parsed to an empty mapping");
    return arm_map;
}

int cmd_replay(const std::string& data_path, const std::string& map_spec, long T, long T0,
               long reps, std::uint64_t seed, const std::string& pseudo_spec,
               const std::vector<std::string>& method_names, const std::string& out_path,
               bool as_json) {
    triex::RecordSet rs = triex::load_records(data_path, parse_arm_map(map_spec));
    std::string corpus = data_path;

    if (!pseudo_spec.empty()) {
        std::string drop, split;
        std::stringstream ss(pseudo_spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("bad --pseudo entry: " + item);
            const std::string key = item.substr(0, eq);
            if (key == "drop") drop = item.substr(eq + 1);
            else if (key == "split") split = item.substr(eq + 1);
            else throw std::invalid_argument("--pseudo keys are drop= and split=, got: " + key);
        }
        if (drop.empty() || split.empty())
            throw std::invalid_argument("--pseudo requires both drop=<label> and split=<label>");
        triex::Rng rng = triex::Rng::substream(seed, {99});
        rs = triex::pseudo_treatment_split(rs, drop, split, rng);
        corpus += "#pseudo";
    }

    triex::ReplayConfig cfg;
    cfg.T = T;
    cfg.T0 = T0;
    cfg.replications = reps;
    cfg.master_seed = seed;
    cfg.corpus = corpus;
    for (const auto& name : method_names) {
        const auto m = triex::method_from_name(name);
        if (!m) throw std::invalid_argument("unknown method: " + name);
        cfg.methods.push_back(*m);
    }

    const std::vector<triex::ReplayRecord> records = triex::run_replay(rs, cfg);
    const std::string csv = triex::replay_to_csv(records);
    if (!out_path.empty()) write_text(out_path, csv);
    if (as_json) {
        json arr = json::array();
        for (const auto& r : records) {
            json j(r.metrics);
            j["corpus"] = r.corpus;
            arr.push_back(std::move(j));
        }
        std::cout << arr.dump(2) << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

int cmd_validate(const std::string& suite, std::uint64_t seed, bool as_json) {
    const std::vector<triex::CheckResult> checks = triex::run_suite(suite, seed);
    if (as_json) {
        json arr = json::array();
        for (const auto& c : checks)
            arr.push_back(json{{"name", c.name},
                               {"observed", c.observed},
                               {"tolerance", c.tolerance},
                               {"pass", c.pass},
                               {"detail", c.detail}});
        std::cout << arr.dump(2) << "\n";
    } else {
        for (const auto& c : checks)
            std::printf("%-4s %-32s observed=%-12.5g tolerance=%-12.5g %s\n",
                        c.pass ? "ok" : "FAIL", c.name.c_str(), c.observed, c.tolerance,
                        c.detail.c_str());
    }
    return triex::all_pass(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-arm experiment design: debiased winner estimation, MSE-optimal "
                 "allocation, two-stage adaptive runs, benchmarks and replay"};
    app.require_subcommand(1);

    double delta = 0.0, sigma0 = 1.0, sigma1 = 1.0, sigma2 = 1.0;
    long T = 0, T0 = 0, reps = 1000;
    std::uint64_t seed = 0;
    bool as_json = false, no_debias = false, full_scale = false;
    int workers = 1;
    if (const char* env = std::getenv("TRIEX_WORKERS")) workers = std::atoi(env);
    std::string config_path, out_path, data_path, map_spec, pseudo_spec, suite;
    std::vector<std::string> method_names{"proposal", "proposal_nocorr", "nonadaptive"};

    auto* oracle = app.add_subcommand("oracle-alloc", "MSE-optimal allocation for known "
                                                      "hyperparameters");
    oracle->add_option("--delta", delta, "treatment mean gap mu2 - mu1");
    oracle->add_option("--sigma0", sigma0, "control sd")->check(CLI::PositiveNumber);
    oracle->add_option("--sigma1", sigma1, "treatment-1 sd")->check(CLI::PositiveNumber);
    oracle->add_option("--sigma2", sigma2, "treatment-2 sd")->check(CLI::PositiveNumber);
    oracle->add_option("--T", T, "total budget")->required();
    oracle->add_flag("--json", as_json, "JSON output");

    auto* two = app.add_subcommand("two-stage", "one seeded two-stage adaptive run");
    two->add_option("--delta", delta, "treatment mean gap");
    two->add_option("--sigma0", sigma0, "control sd")->check(CLI::PositiveNumber);
    two->add_option("--sigma1", sigma1, "treatment-1 sd")->check(CLI::PositiveNumber);
    two->add_option("--sigma2", sigma2, "treatment-2 sd")->check(CLI::PositiveNumber);
    two->add_option("--T", T, "total budget")->required();
    two->add_option("--T0", T0, "pilot budget")->required();
    auto* two_seed = two->add_option("--seed", seed, "rng seed (random if omitted)");
    two->add_flag("--no-debias", no_debias, "report the raw estimate");
    two->add_flag("--json", as_json, "JSON output");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo benchmark from a JSON config");
    sim->add_option("--config", config_path, "JSON config file")->required();
    sim->add_option("--out", out_path, "CSV output path");
    sim->add_option("--seed", seed, "master seed")->required();
    sim->add_flag("--full-scale", full_scale, "500000 replications");
    sim->add_option("--workers", workers, "worker threads");
    sim->add_flag("--json", as_json, "JSON to stdout instead of CSV");

    auto* rep = app.add_subcommand("replay", "finite-population replay of a records CSV");
    rep->add_option("--data", data_path, "CSV with header arm,outcome")->required();
    rep->add_option("--map", map_spec, "label=index,... arm mapping")->required();
    rep->add_option("--T", T, "total budget")->required();
    rep->add_option("--T0", T0, "pilot budget")->required();
    rep->add_option("--reps", reps, "replications");
    rep->add_option("--seed", seed, "master seed")->required();
    rep->add_option("--pseudo", pseudo_spec, "drop=<label>,split=<label> pseudo-treatment");
    rep->add_option("--methods", method_names, "methods to replay");
    rep->add_option("--out", out_path, "CSV output path");
    rep->add_flag("--json", as_json, "JSON to stdout instead of CSV");

    auto* val = app.add_subcommand("validate", "run a property suite");
    val->add_option("--suite", suite, "lemma|bias|mse|convergence|selection")->required();
    val->add_option("--seed", seed, "rng seed")->required();
    val->add_flag("--json", as_json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (oracle->parsed())
            return cmd_oracle_alloc(delta, sigma0, sigma1, sigma2, T, as_json);
        if (two->parsed()) {
            if (two_seed->count() == 0) seed = std::random_device{}();
            return cmd_two_stage(delta, sigma0, sigma1, sigma2, T, T0, seed, no_debias, as_json);
        }
        if (sim->parsed())
            return cmd_simulate(config_path, out_path, seed, full_scale, workers, as_json);
        if (rep->parsed())
            return cmd_replay(data_path, map_spec, T, T0, reps, seed, pseudo_spec, method_names,
                              out_path, as_json);
        if (val->parsed()) return cmd_validate(suite, seed, as_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
