#pragma once

#include <optional>

#include "srwd/model.hpp"

namespace srwd {

struct Candidate {
    TokenSeq tokens;  // payload only, no BOS/EOS
    SequenceScore score;
    std::optional<double> reward;
};

// S(X, theta, N): distinct candidates sorted by (ranking score desc,
// lexicographic tokens asc). The strict total order keeps the model-score
// argmax a singleton.
struct CandidateSet {
    std::vector<Candidate> candidates;
    TokenSeq source;
    int32_t n_requested = 0;
    bool length_norm = false;

    double ranking_score(size_t i) const { return candidates[i].score.value(length_norm); }
    void check_invariants() const;  // throws InputError on violation
};

struct DecodeConfig {
    int32_t beam_width = 4;
    int32_t n_best = 4;  // N
    bool length_norm = false;
    int32_t max_len_override = 0;  // 0: use 2*|X|+5
};

CandidateSet beam_search(const ParamsF64& params, std::span<const TokenId> source,
                         const DecodeConfig& cfg);
CandidateSet beam_search(const ModelParams& params, std::span<const TokenId> source,
                         const DecodeConfig& cfg);

CandidateSet sample_candidates(const ParamsF64& params, std::span<const TokenId> source,
                               int32_t n, double temperature, uint64_t seed,
                               bool length_norm = false, int32_t max_len_override = 0);
CandidateSet sample_candidates(const ModelParams& params, std::span<const TokenId> source,
                               int32_t n, double temperature, uint64_t seed,
                               bool length_norm = false, int32_t max_len_override = 0);

// Comparator shared by beam search, sampling and the enumeration tests.
bool candidate_order(const Candidate& a, const Candidate& b, bool length_norm);

}  // namespace srwd
