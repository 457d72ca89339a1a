#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <fstream>
#include <string>

#include "triex/replay.hpp"

using namespace triex;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = "replay_test_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

const std::map<std::string, int> kStarMap{{"regular", 0}, {"small", 1}, {"aide", 2}};

RecordSet synthetic_corpus(long n_regular, long n_small, long n_aide, std::uint64_t seed,
                           double aide_mean = 3.0, double aide_sd = 5.0) {
    Rng rng(seed);
    RecordSet rs;
    rs.arm_map = kStarMap;
    for (long i = 0; i < n_regular; ++i) rs.records.emplace_back("regular", rng.normal(0.0, 1.0));
    for (long i = 0; i < n_small; ++i) rs.records.emplace_back("small", rng.normal(0.5, 1.0));
    for (long i = 0; i < n_aide; ++i)
        rs.records.emplace_back("aide", rng.normal(aide_mean, aide_sd));
    return rs;
}

std::multiset<double> arm_multiset(const RecordSet& rs, int arm) {
    std::multiset<double> out;
    for (const auto& [label, y] : rs.records)
        if (rs.arm_map.at(label) == arm) out.insert(y);
    return out;
}

}  // namespace

TEST_CASE("load_records parses a tiny corpus") {
    TempFile f("arm,outcome\nregular,1.5\nsmall,-0.25\naide,2\n");
    const RecordSet rs = load_records(f.path, kStarMap);
    CHECK(rs.records.size() == 3);
    CHECK(rs.arm_counts() == std::array<long, 3>{1, 1, 1});
}

TEST_CASE("load_records rejects bad input with row numbers") {
    {
        TempFile f("arm,outcome\nregular,1.5\nmystery,2.0\n");
        CHECK_THROWS_WITH_AS(load_records(f.path, kStarMap),
                             doctest::Contains("row 3"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(load_records(f.path, kStarMap),
                             doctest::Contains("mystery"), std::invalid_argument);
    }
    {
        TempFile f("arm,outcome\nregular,abc\nsmall,1\naide,1\n");
        CHECK_THROWS_WITH_AS(load_records(f.path, kStarMap),
                             doctest::Contains("row 2"), std::invalid_argument);
    }
    {
        TempFile f("wrong,header\n");
        CHECK_THROWS(load_records(f.path, kStarMap));
    }
    {
        TempFile f("arm,outcome\nregular,\nsmall,1\naide,1\n");
        CHECK_THROWS(load_records(f.path, kStarMap));
    }
    CHECK_THROWS(load_records("no_such_file.csv", kStarMap));
}

TEST_CASE("finite source draws without replacement") {
    const RecordSet rs = synthetic_corpus(40, 25, 30, 1);
    FiniteSource src(rs);
    Rng rng(2);

    std::vector<double> all;
    src.draw(1, 25, rng, all);
    CHECK(std::multiset<double>(all.begin(), all.end()) == arm_multiset(rs, 1));
    CHECK_THROWS(src.draw(1, 1, rng, all));

    std::vector<double> first, second;
    src.draw(0, 15, rng, first);
    src.draw(0, 25, rng, second);
    first.insert(first.end(), second.begin(), second.end());
    CHECK(std::multiset<double>(first.begin(), first.end()) == arm_multiset(rs, 0));
}

TEST_CASE("finite draws are a deterministic function of the seed") {
    const RecordSet rs = synthetic_corpus(50, 50, 50, 3);
    std::vector<double> a, b;
    {
        FiniteSource src(rs);
        Rng rng(9);
        src.draw(2, 20, rng, a);
    }
    {
        FiniteSource src(rs);
        Rng rng(9);
        src.draw(2, 20, rng, b);
    }
    CHECK(a == b);
}

TEST_CASE("pseudo-treatment split halves the split arm") {
    const RecordSet rs = synthetic_corpus(100, 40, 60, 4);
    Rng rng(5);
    const RecordSet ps = pseudo_treatment_split(rs, "small", "regular", rng);
    const auto counts = ps.arm_counts();
    CHECK(counts == std::array<long, 3>{50, 50, 60});
    // the two halves partition the original arm
    auto combined = arm_multiset(ps, 0);
    for (double y : arm_multiset(ps, 1)) combined.insert(y);
    CHECK(combined == arm_multiset(rs, 0));
    // the kept arm survives untouched at index 2
    CHECK(arm_multiset(ps, 2) == arm_multiset(rs, 2));
}

TEST_CASE("odd split counts give the extra record to control") {
    const RecordSet rs = synthetic_corpus(101, 40, 60, 6);
    Rng rng(7);
    const RecordSet ps = pseudo_treatment_split(rs, "small", "regular", rng);
    CHECK(ps.arm_counts() == std::array<long, 3>{51, 50, 60});
}

TEST_CASE("pseudo-treatment split validates its labels") {
    const RecordSet rs = synthetic_corpus(10, 10, 10, 8);
    Rng rng(1);
    CHECK_THROWS(pseudo_treatment_split(rs, "nope", "regular", rng));
    CHECK_THROWS(pseudo_treatment_split(rs, "small", "nope", rng));
    CHECK_THROWS(pseudo_treatment_split(rs, "small", "small", rng));
}

TEST_CASE("population hyperparameters match the file moments") {
    RecordSet rs;
    rs.arm_map = kStarMap;
    rs.records = {{"regular", 1.0}, {"regular", 3.0}, {"small", 2.0},
                  {"small", 2.0},   {"aide", -1.0},   {"aide", 1.0}};
    const Hyperparams h = population_hyperparams(rs);
    CHECK(h.mu[0] == doctest::Approx(2.0));
    CHECK(h.sigma2[0] == doctest::Approx(2.0));
    CHECK(h.mu[2] == doctest::Approx(0.0));
    CHECK(h.sigma2[2] == doctest::Approx(2.0));
}

TEST_CASE("replay is reproducible and sized to the corpus") {
    const RecordSet rs = synthetic_corpus(400, 400, 400, 10);
    ReplayConfig cfg;
    cfg.T = 120;
    cfg.T0 = 45;
    cfg.replications = 50;
    cfg.master_seed = 21;
    cfg.methods = {Method::Proposal, Method::Nonadaptive};
    cfg.corpus = "synthetic";
    const auto a = run_replay(rs, cfg);
    const auto b = run_replay(rs, cfg);
    REQUIRE(a.size() == 2);
    CHECK(replay_to_csv(a) == replay_to_csv(b));
    CHECK(replay_to_csv(a).rfind("method,T,T0,") == 0);
    CHECK(replay_to_csv(a).find(",synthetic") != std::string::npos);

    ReplayConfig too_big = cfg;
    too_big.T = 500;  // exceeds every arm's record count
    CHECK_THROWS(run_replay(rs, too_big));
}

TEST_CASE("pseudo-arm replay shows the no-correction bias pattern") {
    // control and pseudo-treatment carved from N(0,1); the kept arm is the
    // N(3, 5^2) group, so selecting the pseudo arm is a rare, biased event
    Rng split_rng(12);
    RecordSet raw;
    raw.arm_map = kStarMap;
    Rng gen(13);
    for (int i = 0; i < 2400; ++i) raw.records.emplace_back("regular", gen.normal(0.0, 1.0));
    for (int i = 0; i < 300; ++i) raw.records.emplace_back("small", gen.normal(0.0, 1.0));
    for (int i = 0; i < 1200; ++i) raw.records.emplace_back("aide", gen.normal(3.0, 5.0));
    const RecordSet ps = pseudo_treatment_split(raw, "small", "regular", split_rng);

    const Hyperparams h = population_hyperparams(ps);
    // tiny budget: the high-variance real arm cannot be pinned down, so the
    // pseudo arm wins a few percent of the time
    const long T = 30;
    const Allocation pilot{{5, 5, 5}};
    double raw_sum = 0, raw_sq = 0, pred_sum = 0, db_sum = 0;
    double nc_sum = 0, nc_sq = 0;
    long wins = 0, nc_wins = 0;
    const long reps = 20000;
    for (long rep = 0; rep < reps; ++rep) {
        {
            Rng rng = Rng::substream(31, {static_cast<std::uint64_t>(rep), 0});
            FiniteSource src(ps);
            const TwoStageResult res = run_two_stage(src, T, pilot, rng);
            if (res.outcome.winner == 1) {  // pseudo arm selected; true effect ~0
                ++wins;
                raw_sum += res.outcome.tau_raw;
                raw_sq += res.outcome.tau_raw * res.outcome.tau_raw;
                db_sum += res.outcome.tau_debiased;
                const Allocation eff{{pilot.n[0] + res.plan.post.n[0],
                                      pilot.n[1] + res.plan.post.n[1],
                                      pilot.n[2] + res.plan.post.n[2]}};
                pred_sum += bias_term(h, eff, 1);
            }
        }
        {
            Rng rng = Rng::substream(31, {static_cast<std::uint64_t>(rep), 1});
            FiniteSource src(ps);
            const RepOutcome out = run_replication(Method::ProposalNoCorr, h, src, T, pilot,
                                                   Allocation{}, rng);
            if (out.winner == 1) {
                ++nc_wins;
                nc_sum += out.tau_est;
                nc_sq += out.tau_est * out.tau_est;
            }
        }
    }
    REQUIRE(wins > 50);
    REQUIRE(nc_wins > 50);
    const double raw_mean = raw_sum / wins;
    const double raw_se = std::sqrt((raw_sq / wins - raw_mean * raw_mean) / wins);
    // the conditional overshoot matches the selection-bias formula at the
    // population hyperparameters and the realized allocations
    CHECK(std::fabs(raw_mean - (h.tau(1) + pred_sum / wins)) < 4 * raw_se);
    // the no-correction variant's pseudo-arm estimate is clearly biased
    const double nc_mean = nc_sum / nc_wins;
    const double nc_se = std::sqrt((nc_sq / nc_wins - nc_mean * nc_mean) / nc_wins);
    CHECK(nc_mean - h.tau(1) > 3 * nc_se);
    // and exceeds the corrected estimate
    CHECK(nc_mean > db_sum / wins);
}
