#pragma once

#include <map>
#include <string>
#include <vector>

#include "triex/design.hpp"
#include "triex/simulator.hpp"

namespace triex {

// Labeled outcome corpus with a fixed label -> arm-index mapping.
struct RecordSet {
    std::vector<std::pair<std::string, double>> records;
    std::map<std::string, int> arm_map;  // values in {0, 1, 2}

    std::array<long, 3> arm_counts() const;
    void validate() const;
};

// CSV with header `arm,outcome`; malformed rows error with their line number.
RecordSet load_records(const std::string& path, const std::map<std::string, int>& arm_map);

// Sampling without replacement from one RecordSet; errors when a draw would
// exceed the records remaining on an arm. Single-consumer.
class FiniteSource final : public OutcomeSource {
public:
    explicit FiniteSource(const RecordSet& rs);
    void draw(int arm, long count, Rng& rng, std::vector<double>& out) override;
    long remaining(int arm) const { return static_cast<long>(pool_[arm].size()); }

private:
    std::array<std::vector<double>, 3> pool_;
};

// Removes drop_arm, halves split_arm into control (arm 0) and a zero-effect
// pseudo-treatment (arm 1); the surviving third arm moves to index 2. On an
// odd count the control side receives the extra record.
RecordSet pseudo_treatment_split(const RecordSet& rs, const std::string& drop_arm,
                                 const std::string& split_arm, Rng& rng);

// Population truth of the corpus: per-arm means and (count-1) variances.
Hyperparams population_hyperparams(const RecordSet& rs);

struct ReplayConfig {
    long T = 0;
    long T0 = 0;
    long replications = 1000;
    std::uint64_t master_seed = 0;
    std::vector<Method> methods;
    bool ss_se_neyman_split = false;
    std::string corpus;  // label echoed in the report
};

struct ReplayRecord {
    MetricsRecord metrics;
    std::string corpus;
};

// Monte Carlo over seeded replays: each replication reshuffles the corpus via
// its own substream and runs one full experiment per method.
std::vector<ReplayRecord> run_replay(const RecordSet& rs, const ReplayConfig& cfg);

std::string replay_csv_header();
std::string replay_to_csv(const std::vector<ReplayRecord>& records);

}  // namespace triex
