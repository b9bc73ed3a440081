#include "srwd/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace srwd {

ObjectiveKind parse_objective_kind(const std::string& s) {
    if (s == "pg") return ObjectiveKind::pg;
    if (s == "risk") return ObjectiveKind::risk;
    if (s == "distill") return ObjectiveKind::distill;
    if (s == "multi_margin") return ObjectiveKind::multi_margin;
    if (s == "max_margin") return ObjectiveKind::max_margin;
    if (s == "contrastive_margin") return ObjectiveKind::contrastive_margin;
    throw ConfigError("objective.kind: unknown objective '" + s + "'");
}

std::string objective_kind_name(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::pg: return "pg";
        case ObjectiveKind::risk: return "risk";
        case ObjectiveKind::distill: return "distill";
        case ObjectiveKind::multi_margin: return "multi_margin";
        case ObjectiveKind::max_margin: return "max_margin";
        case ObjectiveKind::contrastive_margin: return "contrastive_margin";
    }
    return "?";
}

void ObjectiveConfig::validate() const {
    if (alpha <= 0.0) throw ConfigError("objective.alpha: must be > 0");
}

bool objective_uses_length_norm(const ObjectiveConfig& cfg) {
    if (cfg.kind == ObjectiveKind::risk || cfg.kind == ObjectiveKind::distill) return false;
    return cfg.length_norm_scores;
}

namespace {

void check_set(const CandidateSet& set) {
    if (set.candidates.empty()) throw InputError("objective: empty candidate set");
    for (const auto& c : set.candidates)
        if (!c.reward.has_value()) throw InputError("objective: candidate missing reward");
}

double obj_score(const CandidateSet& set, const ObjectiveConfig& cfg, size_t i) {
    return set.candidates[i].score.value(objective_uses_length_norm(cfg));
}

// "better" for reward-argmax selection under the documented tie-break
bool reward_better(const CandidateSet& set, const ObjectiveConfig& cfg, size_t a, size_t b) {
    double ra = *set.candidates[a].reward, rb = *set.candidates[b].reward;
    if (ra != rb) return ra > rb;
    double sa = obj_score(set, cfg, a), sb = obj_score(set, cfg, b);
    if (sa != sb) return sa > sb;
    return set.candidates[a].tokens < set.candidates[b].tokens;
}

// among reward ties, argmin also prefers higher score then smaller tokens
bool reward_worse(const CandidateSet& set, const ObjectiveConfig& cfg, size_t a, size_t b) {
    double ra = *set.candidates[a].reward, rb = *set.candidates[b].reward;
    if (ra != rb) return ra < rb;
    double sa = obj_score(set, cfg, a), sb = obj_score(set, cfg, b);
    if (sa != sb) return sa > sb;
    return set.candidates[a].tokens < set.candidates[b].tokens;
}

ObjectiveOutput make_output(double loss, std::vector<std::pair<size_t, double>> weights) {
    ObjectiveOutput out;
    out.loss = loss;
    std::erase_if(weights, [](const auto& w) { return w.second == 0.0; });
    out.weights = std::move(weights);
    out.active = !out.weights.empty();
    return out;
}

}  // namespace

size_t reward_argmax(const CandidateSet& set, const ObjectiveConfig& cfg) {
    check_set(set);
    size_t best = 0;
    for (size_t i = 1; i < set.candidates.size(); ++i)
        if (reward_better(set, cfg, i, best)) best = i;
    return best;
}

size_t reward_argmin(const CandidateSet& set, const ObjectiveConfig& cfg) {
    check_set(set);
    size_t worst = 0;
    for (size_t i = 1; i < set.candidates.size(); ++i)
        if (reward_worse(set, cfg, i, worst)) worst = i;
    return worst;
}

namespace {

bool all_rewards_equal(const CandidateSet& set) {
    for (const auto& c : set.candidates)
        if (*c.reward != *set.candidates[0].reward) return false;
    return true;
}

}  // namespace

ObjectiveOutput pg_loss(const CandidateSet& set, const ObjectiveConfig& cfg) {
    check_set(set);
    // tied rewards: the baseline cancels every advantage exactly
    if (all_rewards_equal(set)) return make_output(0.0, {});
    const size_t n = set.candidates.size();
    double baseline = 0.0;
    for (const auto& c : set.candidates) baseline += *c.reward;
    baseline /= double(n);
    double loss = 0.0;
    std::vector<std::pair<size_t, double>> weights;
    for (size_t i = 0; i < n; ++i) {
        double advantage = *set.candidates[i].reward - baseline;
        loss -= advantage * obj_score(set, cfg, i) / double(n);
        weights.emplace_back(i, -advantage / double(n));
    }
    return make_output(loss, std::move(weights));
}

ObjectiveOutput risk_loss(const CandidateSet& set, const ObjectiveConfig& cfg) {
    (void)cfg;
    check_set(set);
    if (all_rewards_equal(set)) return make_output(-*set.candidates[0].reward, {});
    const size_t n = set.candidates.size();
    // softmax over the unnormalized total log-probs within the set
    std::vector<double> p(n);
    double mx = -1e300;
    for (size_t i = 0; i < n; ++i) mx = std::max(mx, set.candidates[i].score.total_logprob);
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
        p[i] = std::exp(set.candidates[i].score.total_logprob - mx);
        z += p[i];
    }
    double loss = 0.0, expected_reward = 0.0;
    for (size_t i = 0; i < n; ++i) {
        p[i] /= z;
        expected_reward += *set.candidates[i].reward * p[i];
    }
    loss = -expected_reward;
    std::vector<std::pair<size_t, double>> weights;
    for (size_t i = 0; i < n; ++i)
        weights.emplace_back(i, p[i] * (expected_reward - *set.candidates[i].reward));
    return make_output(loss, std::move(weights));
}

ObjectiveOutput distill_loss(const CandidateSet& set, const ObjectiveConfig& cfg) {
    size_t best = reward_argmax(set, cfg);
    double loss = -set.candidates[best].score.total_logprob;
    return make_output(loss, {{best, -1.0}});
}

ObjectiveOutput multi_margin_loss(const CandidateSet& set, const ObjectiveConfig& cfg) {
    cfg.validate();
    size_t best = reward_argmax(set, cfg);
    double s_best = obj_score(set, cfg, best);
    double r_best = *set.candidates[best].reward;
    double loss = 0.0;
    std::vector<std::pair<size_t, double>> weights;
    double best_weight = 0.0;
    for (size_t i = 0; i < set.candidates.size(); ++i) {
        if (i == best) continue;
        double margin = cfg.alpha * (r_best - *set.candidates[i].reward);
        double term = margin - s_best + obj_score(set, cfg, i);
        if (term > 0.0) {
            loss += term;
            best_weight -= 1.0;
            weights.emplace_back(i, 1.0);
        }
    }
    if (best_weight != 0.0) weights.emplace_back(best, best_weight);
    return make_output(loss, std::move(weights));
}

ObjectiveOutput max_margin_loss(const CandidateSet& set, const ObjectiveConfig& cfg) {
    cfg.validate();
    size_t best = reward_argmax(set, cfg);
    if (set.candidates.size() == 1) return make_output(0.0, {});
    // best competitor: model-score argmax over S \ {Y*_R}
    size_t rival = best == 0 ? 1 : 0;
    for (size_t i = 0; i < set.candidates.size(); ++i) {
        if (i == best) continue;
        if (obj_score(set, cfg, i) > obj_score(set, cfg, rival) ||
            (obj_score(set, cfg, i) == obj_score(set, cfg, rival) &&
             set.candidates[i].tokens < set.candidates[rival].tokens))
            rival = i;
    }
    double margin = cfg.alpha * (*set.candidates[best].reward - *set.candidates[rival].reward);
    double term = margin - obj_score(set, cfg, best) + obj_score(set, cfg, rival);
    if (term <= 0.0) return make_output(0.0, {});
    return make_output(term, {{best, -1.0}, {rival, 1.0}});
}

ObjectiveOutput contrastive_margin_loss(const CandidateSet& set, const ObjectiveConfig& cfg) {
    cfg.validate();
    size_t best = reward_argmax(set, cfg);
    size_t worst = reward_argmin(set, cfg);
    if (best == worst) return make_output(0.0, {});
    double margin = cfg.alpha * (*set.candidates[best].reward - *set.candidates[worst].reward);
    double term = margin - obj_score(set, cfg, best) + obj_score(set, cfg, worst);
    if (term <= 0.0) return make_output(0.0, {});
    return make_output(term, {{best, -1.0}, {worst, 1.0}});
}

ObjectiveOutput compute_objective(const CandidateSet& set, const ObjectiveConfig& cfg) {
    switch (cfg.kind) {
        case ObjectiveKind::pg: return pg_loss(set, cfg);
        case ObjectiveKind::risk: return risk_loss(set, cfg);
        case ObjectiveKind::distill: return distill_loss(set, cfg);
        case ObjectiveKind::multi_margin: return multi_margin_loss(set, cfg);
        case ObjectiveKind::max_margin: return max_margin_loss(set, cfg);
        case ObjectiveKind::contrastive_margin: return contrastive_margin_loss(set, cfg);
    }
    throw ConfigError("objective.kind: invalid value");
}

}  // namespace srwd
