#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace triex {

// Arm indices are fixed project-wide: 0 = control, 1 = treatment 1, 2 = treatment 2.
inline constexpr int kControl = 0;

// Super-population parameters: per-arm means and variances.
struct Hyperparams {
    std::array<double, 3> mu{0.0, 0.0, 0.0};
    std::array<double, 3> sigma2{1.0, 1.0, 1.0};

    double delta() const { return mu[2] - mu[1]; }
    double tau(int w) const { return mu[w] - mu[0]; }
    // argmax over the treatment arms; ties resolve to arm 2
    int best_arm() const { return mu[2] >= mu[1] ? 2 : 1; }

    void validate() const;
};

// Integer unit counts per arm for one batch.
struct Allocation {
    std::array<long, 3> n{0, 0, 0};

    long total() const { return n[0] + n[1] + n[2]; }
};

// sigma1^2/n1 + sigma2^2/n2 for the treatment-mean difference
double gap_variance(const Hyperparams& h, const Allocation& a);

struct TwoStagePlan {
    Allocation pilot;
    long total_budget = 0;
    Allocation post;
};

// Per-arm sample statistics; var_hat is unbiased (n-1 denominator) and only
// defined for counts >= 2.
struct ArmStats {
    std::array<long, 3> count{0, 0, 0};
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    std::array<std::optional<double>, 3> var_hat{};

    double delta_hat() const { return mean[2] - mean[1]; }
};

struct DesignOutcome {
    int winner = 2;  // in {1, 2}
    double tau_raw = 0.0;
    double bias_term = 0.0;
    double tau_debiased = 0.0;
    std::array<double, 3> pooled_means{0.0, 0.0, 0.0};
    std::array<double, 3> omega{0.0, 0.0, 0.0};
};

// Lower-bound-clipped allocation simplex used by the theory-validation runs:
// each proportion stays above delta = T^(-alpha)/2 once bound to a budget T.
struct ClipDomain {
    double alpha = 0.25;
    double delta = 0.0;

    static ClipDomain bind(double alpha, long total_budget);
};

// Neyman proportions between control and the winning treatment arm.
struct NeymanTarget {
    std::array<double, 3> p_star{0.0, 0.0, 0.0};
};

// Canonical JSON serialization (field names match the struct members).
void to_json(nlohmann::json& j, const Hyperparams& h);
void from_json(const nlohmann::json& j, Hyperparams& h);
void to_json(nlohmann::json& j, const Allocation& a);
void from_json(const nlohmann::json& j, Allocation& a);
void to_json(nlohmann::json& j, const TwoStagePlan& p);
void from_json(const nlohmann::json& j, TwoStagePlan& p);
void to_json(nlohmann::json& j, const ArmStats& s);
void from_json(const nlohmann::json& j, ArmStats& s);
void to_json(nlohmann::json& j, const DesignOutcome& o);
void from_json(const nlohmann::json& j, DesignOutcome& o);
void to_json(nlohmann::json& j, const ClipDomain& c);
void from_json(const nlohmann::json& j, ClipDomain& c);
void to_json(nlohmann::json& j, const NeymanTarget& t);
void from_json(const nlohmann::json& j, NeymanTarget& t);

}  // namespace triex
