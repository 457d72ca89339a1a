#include "triex/model.hpp"

#include <cmath>
#include <stdexcept>

namespace triex {

void Hyperparams::validate() const {
    for (int w = 0; w < 3; ++w) {
        if (!std::isfinite(mu[w])) throw std::domain_error("non-finite mean");
        if (!(sigma2[w] > 0.0) || !std::isfinite(sigma2[w]))
            throw std::domain_error("variances must be positive and finite");
    }
}

double gap_variance(const Hyperparams& h, const Allocation& a) {
    h.validate();
    if (a.n[1] < 1 || a.n[2] < 1)
        throw std::invalid_argument("gap_variance requires at least one unit on each treatment arm");
    return h.sigma2[1] / static_cast<double>(a.n[1]) + h.sigma2[2] / static_cast<double>(a.n[2]);
}

ClipDomain ClipDomain::bind(double alpha, long total_budget) {
    if (!(alpha > 0.0) || !(alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 1/2)");
    if (total_budget < 1) throw std::invalid_argument("budget must be positive");
    ClipDomain c;
    c.alpha = alpha;
    c.delta = 0.5 * std::pow(static_cast<double>(total_budget), -alpha);
    if (!(c.delta < 1.0 / 3.0))
        throw std::invalid_argument("clipped simplex is empty for this budget");
    return c;
}

namespace {
nlohmann::json opt_array(const std::array<std::optional<double>, 3>& v) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& x : v) {
        if (x) j.push_back(*x); else j.push_back(nullptr);
    }
    return j;
}
}  // namespace

void to_json(nlohmann::json& j, const Hyperparams& h) {
    j = {{"mu", h.mu}, {"sigma2", h.sigma2}};
}
void from_json(const nlohmann::json& j, Hyperparams& h) {
    j.at("mu").get_to(h.mu);
    j.at("sigma2").get_to(h.sigma2);
}

void to_json(nlohmann::json& j, const Allocation& a) { j = {{"n", a.n}}; }
void from_json(const nlohmann::json& j, Allocation& a) { j.at("n").get_to(a.n); }

void to_json(nlohmann::json& j, const TwoStagePlan& p) {
    j = {{"pilot", p.pilot}, {"total_budget", p.total_budget}, {"post", p.post}};
}
void from_json(const nlohmann::json& j, TwoStagePlan& p) {
    j.at("pilot").get_to(p.pilot);
    j.at("total_budget").get_to(p.total_budget);
    j.at("post").get_to(p.post);
}

void to_json(nlohmann::json& j, const ArmStats& s) {
    j = {{"count", s.count}, {"mean", s.mean}, {"var_hat", opt_array(s.var_hat)}};
}
void from_json(const nlohmann::json& j, ArmStats& s) {
    j.at("count").get_to(s.count);
    j.at("mean").get_to(s.mean);
    const auto& v = j.at("var_hat");
    for (int w = 0; w < 3; ++w)
        s.var_hat[w] = v.at(w).is_null() ? std::optional<double>{} : std::optional<double>{v.at(w).get<double>()};
}

void to_json(nlohmann::json& j, const DesignOutcome& o) {
    j = {{"winner", o.winner},
         {"tau_raw", o.tau_raw},
         {"bias_term", o.bias_term},
         {"tau_debiased", o.tau_debiased},
         {"pooled_means", o.pooled_means},
         {"omega", o.omega}};
}
void from_json(const nlohmann::json& j, DesignOutcome& o) {
    j.at("winner").get_to(o.winner);
    j.at("tau_raw").get_to(o.tau_raw);
    j.at("bias_term").get_to(o.bias_term);
    j.at("tau_debiased").get_to(o.tau_debiased);
    j.at("pooled_means").get_to(o.pooled_means);
    j.at("omega").get_to(o.omega);
}

void to_json(nlohmann::json& j, const ClipDomain& c) {
    j = {{"alpha", c.alpha}, {"delta", c.delta}};
}
void from_json(const nlohmann::json& j, ClipDomain& c) {
    j.at("alpha").get_to(c.alpha);
    j.at("delta").get_to(c.delta);
}

void to_json(nlohmann::json& j, const NeymanTarget& t) { j = {{"p_star", t.p_star}}; }
void from_json(const nlohmann::json& j, NeymanTarget& t) { j.at("p_star").get_to(t.p_star); }

}  // namespace triex
