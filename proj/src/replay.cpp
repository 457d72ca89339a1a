#include "triex/replay.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "triex/optimizer.hpp"

namespace triex {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::array<long, 3> RecordSet::arm_counts() const {
    std::array<long, 3> counts{0, 0, 0};
    for (const auto& [label, _] : records) counts[arm_map.at(label)] += 1;
    return counts;
}

void RecordSet::validate() const {
    for (const auto& [label, idx] : arm_map)
        if (idx < 0 || idx > 2)
            throw std::invalid_argument("arm index for label '" + label + "' must be 0, 1 or 2");
    for (const auto& [label, _] : records)
        if (!arm_map.count(label))
            throw std::invalid_argument("record carries unmapped arm label '" + label + "'");
    const auto counts = arm_counts();
    for (int w = 0; w < 3; ++w)
        if (counts[w] == 0)
            throw std::invalid_argument("arm " + std::to_string(w) + " has no records");
}

RecordSet load_records(const std::string& path, const std::map<std::string, int>& arm_map) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open records file: " + path);

    RecordSet rs;
    rs.arm_map = arm_map;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string trimmed = strip(line);
        if (trimmed.empty()) {
            if (row == 1) throw std::invalid_argument("row 1: missing `arm,outcome` header");
            throw std::invalid_argument("row " + std::to_string(row) + ": blank line");
        }
        if (row == 1) {
            if (trimmed != "arm,outcome")
                throw std::invalid_argument("row 1: expected header `arm,outcome`, got `" +
                                            trimmed + "`");
            continue;
        }
        const auto comma = trimmed.find(',');
        if (comma == std::string::npos || trimmed.find(',', comma + 1) != std::string::npos)
            throw std::invalid_argument("row " + std::to_string(row) +
                                        ": expected exactly two fields");
        const std::string label = strip(trimmed.substr(0, comma));
        const std::string value = strip(trimmed.substr(comma + 1));
        if (label.empty() || value.empty())
            throw std::invalid_argument("row " + std::to_string(row) + ": blank field");
        if (!arm_map.count(label))
            throw std::invalid_argument("row " + std::to_string(row) + ": unmapped arm label '" +
                                        label + "'");
        char* end = nullptr;
        errno = 0;
        const double y = std::strtod(value.c_str(), &end);
        if (errno != 0 || end == value.c_str() || *end != '\0' || !std::isfinite(y))
            throw std::invalid_argument("row " + std::to_string(row) +
                                        ": outcome is not a finite number: '" + value + "'");
        rs.records.emplace_back(label, y);
    }
    if (row == 0) throw std::invalid_argument("records file is empty: " + path);
    rs.validate();
    return rs;
}

FiniteSource::FiniteSource(const RecordSet& rs) {
    rs.validate();
    for (const auto& [label, y] : rs.records) pool_[rs.arm_map.at(label)].push_back(y);
}

void FiniteSource::draw(int arm, long count, Rng& rng, std::vector<double>& out) {
    auto& pool = pool_[arm];
    if (count > static_cast<long>(pool.size()))
        throw std::runtime_error("arm " + std::to_string(arm) + " exhausted: requested " +
                                 std::to_string(count) + " of " + std::to_string(pool.size()) +
                                 " remaining records");
    out.resize(static_cast<std::size_t>(count));
    // partial Fisher-Yates: each draw removes a uniform record
    for (long i = 0; i < count; ++i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(pool.size())));
        out[static_cast<std::size_t>(i)] = pool[j];
        pool[j] = pool.back();
        pool.pop_back();
    }
}

RecordSet pseudo_treatment_split(const RecordSet& rs, const std::string& drop_arm,
                                 const std::string& split_arm, Rng& rng) {
    rs.validate();
    if (!rs.arm_map.count(drop_arm))
        throw std::invalid_argument("drop arm label not present: " + drop_arm);
    if (!rs.arm_map.count(split_arm))
        throw std::invalid_argument("split arm label not present: " + split_arm);
    if (drop_arm == split_arm)
        throw std::invalid_argument("drop and split arms must differ");

    const int drop_idx = rs.arm_map.at(drop_arm);
    const int split_idx = rs.arm_map.at(split_arm);

    std::vector<double> split_pool;
    RecordSet out;
    const std::string pseudo_label = split_arm + "_pseudo";
    std::string kept_label;
    for (const auto& [label, y] : rs.records) {
        const int idx = rs.arm_map.at(label);
        if (idx == drop_idx) continue;
        if (idx == split_idx) {
            split_pool.push_back(y);
        } else {
            out.records.emplace_back(label, y);
            kept_label = label;
        }
    }
    if (kept_label.empty())
        throw std::invalid_argument("no arm remains besides the split arm");

    // uniform halving via full shuffle; control keeps the extra on odd counts
    for (std::size_t i = split_pool.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(split_pool[i - 1], split_pool[j]);
    }
    const std::size_t n_control = (split_pool.size() + 1) / 2;
    for (std::size_t i = 0; i < split_pool.size(); ++i)
        out.records.emplace_back(i < n_control ? split_arm : pseudo_label, split_pool[i]);

    out.arm_map = {{split_arm, 0}, {pseudo_label, 1}, {kept_label, 2}};
    out.validate();
    return out;
}

Hyperparams population_hyperparams(const RecordSet& rs) {
    rs.validate();
    std::array<double, 3> sum{0, 0, 0}, sumsq{0, 0, 0};
    const auto counts = rs.arm_counts();
    for (const auto& [label, y] : rs.records) {
        const int w = rs.arm_map.at(label);
        sum[w] += y;
        sumsq[w] += y * y;
    }
    Hyperparams h;
    for (int w = 0; w < 3; ++w) {
        const double n = static_cast<double>(counts[w]);
        h.mu[w] = sum[w] / n;
        h.sigma2[w] = counts[w] >= 2
                          ? std::max((sumsq[w] - n * h.mu[w] * h.mu[w]) / (n - 1.0), 1e-12)
                          : 1e-12;
    }
    return h;
}

std::vector<ReplayRecord> run_replay(const RecordSet& rs, const ReplayConfig& cfg) {
    rs.validate();
    if (cfg.T < 6) throw std::invalid_argument("replay budget T must be at least 6");
    if (cfg.T0 < 6 || cfg.T0 >= cfg.T - 2)
        throw std::invalid_argument("replay pilot budget must satisfy 6 <= T0 < T - 2");
    if (cfg.replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (cfg.methods.empty()) throw std::invalid_argument("no methods requested");
    const auto counts = rs.arm_counts();
    // worst case one arm absorbs the whole budget; error up front, not mid-draw
    for (int w = 0; w < 3; ++w)
        if (counts[w] < cfg.T)
            throw std::invalid_argument("arm " + std::to_string(w) + " holds only " +
                                        std::to_string(counts[w]) +
                                        " records for budget T = " + std::to_string(cfg.T));

    const Hyperparams h = population_hyperparams(rs);
    const long third = cfg.T0 / 3;
    const Allocation pilot{{cfg.T0 - 2 * third, third, third}};

    std::vector<ReplayRecord> out;
    for (Method method : cfg.methods) {
        Allocation oracle_alloc;
        if (method == Method::Oracle) oracle_alloc = solve_oracle_allocation(h, cfg.T);

        std::vector<RepOutcome> reps(static_cast<std::size_t>(cfg.replications));
        const std::uint64_t mtag = static_cast<std::uint64_t>(method);
        for (long rep = 0; rep < cfg.replications; ++rep) {
            Rng rng = Rng::substream(cfg.master_seed,
                                     {mtag, static_cast<std::uint64_t>(cfg.T),
                                      static_cast<std::uint64_t>(cfg.T0),
                                      static_cast<std::uint64_t>(rep)});
            FiniteSource src(rs);
            reps[static_cast<std::size_t>(rep)] = run_replication(
                method, h, src, cfg.T, pilot, oracle_alloc, rng, cfg.ss_se_neyman_split);
        }

        ReplayRecord rec;
        rec.corpus = cfg.corpus;
        rec.metrics.method = method_name(method);
        rec.metrics.T = cfg.T;
        rec.metrics.T0 = cfg.T0;
        rec.metrics.delta = h.delta();
        rec.metrics.sigma_ratio = std::sqrt(h.sigma2[2] / h.sigma2[1]);
        rec.metrics.replications = cfg.replications;
        rec.metrics.seed = cfg.master_seed;
        summarize_replications(h, reps, rec.metrics);
        out.push_back(std::move(rec));
    }
    return out;
}

std::string replay_csv_header() { return metrics_csv_header() + ",corpus"; }

std::string replay_to_csv(const std::vector<ReplayRecord>& records) {
    std::string out = replay_csv_header() + "\n";
    for (const auto& r : records) {
        std::string row = metrics_to_csv({r.metrics});
        // reuse the single-record body emitted after the simulator header
        row.erase(0, row.find('\n') + 1);
        row.pop_back();
        out += row + ',' + r.corpus + '\n';
    }
    return out;
}

}  // namespace triex
