#pragma once

#include <string>

#include "srwd/decoding.hpp"

namespace srwd {

enum class ObjectiveKind { pg, risk, distill, multi_margin, max_margin, contrastive_margin };

ObjectiveKind parse_objective_kind(const std::string& s);
std::string objective_kind_name(ObjectiveKind k);

struct ObjectiveConfig {
    ObjectiveKind kind = ObjectiveKind::contrastive_margin;
    double alpha = 0.3;             // margin scale
    bool length_norm_scores = false;  // score used by pg and the margin losses

    void validate() const;
};

// lambda_i = dL/ds_i; weights empty iff the objective is inactive.
struct ObjectiveOutput {
    double loss = 0.0;
    std::vector<std::pair<size_t, double>> weights;
    bool active = false;
};

// True when the objective reads length-normalized scores. Risk and distill
// always use the total log-probability.
bool objective_uses_length_norm(const ObjectiveConfig& cfg);

ObjectiveOutput pg_loss(const CandidateSet& set, const ObjectiveConfig& cfg);
ObjectiveOutput risk_loss(const CandidateSet& set, const ObjectiveConfig& cfg);
ObjectiveOutput distill_loss(const CandidateSet& set, const ObjectiveConfig& cfg);
ObjectiveOutput multi_margin_loss(const CandidateSet& set, const ObjectiveConfig& cfg);
ObjectiveOutput max_margin_loss(const CandidateSet& set, const ObjectiveConfig& cfg);
ObjectiveOutput contrastive_margin_loss(const CandidateSet& set, const ObjectiveConfig& cfg);

ObjectiveOutput compute_objective(const CandidateSet& set, const ObjectiveConfig& cfg);

// Deterministic reward argmax / argmin: ties broken by higher objective
// score, then lexicographically smaller tokens.
size_t reward_argmax(const CandidateSet& set, const ObjectiveConfig& cfg);
size_t reward_argmin(const CandidateSet& set, const ObjectiveConfig& cfg);

}  // namespace srwd
