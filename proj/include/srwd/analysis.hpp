#pragma once

#include <optional>
#include <string>

#include "srwd/decoding.hpp"
#include "srwd/rewards.hpp"
#include "srwd/synthdata.hpp"

namespace srwd {

// Tie-corrected Kendall's tau-b. Returns nullopt when either list is fully
// tied (the coefficient is undefined there).
std::optional<double> kendall_tau(std::span<const double> xs, std::span<const double> ys);

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<double> tau;  // names.size()^2 row-major, averaged over samples
    size_t samples = 0;

    double at(size_t i, size_t j) const { return tau[i * names.size() + j]; }
    std::string to_csv() const;
};

struct CorrelationConfig {
    int32_t k_best = 4;
    size_t samples = 10000;
    uint64_t seed = 0;
    int32_t beam_width = 4;
    bool length_norm = true;  // the model-score "metric" is the ranking score
    int threads = 1;          // per-sample work; the result is thread-count independent
};

// Decodes k-best per sampled sentence and averages per-sentence tau over all
// metric pairs. The model ranking score participates as the metric "nmt".
CorrelationMatrix correlation_matrix(const ModelParams& params,
                                     const std::vector<const SequencePair*>& pairs,
                                     const std::vector<const RewardFunction*>& metrics,
                                     const CorrelationConfig& cfg);

struct DivergenceRecord {
    size_t sentence_id = 0;
    TokenSeq baseline_hyp;
    TokenSeq tuned_hyp;
    double delta_metric = 0.0;
    double delta_sbleu = 0.0;
};

struct DivergenceThresholds {
    double metric_up = 0.3;
    double sbleu_down = 0.03;  // on the [0,1] scale
};

std::vector<DivergenceRecord> mine_divergence(const std::vector<TokenSeq>& baseline_hyps,
                                              const std::vector<TokenSeq>& tuned_hyps,
                                              const std::vector<TokenSeq>& references,
                                              const RewardFunction& metric,
                                              const DivergenceThresholds& thresholds);

std::string divergence_tsv(const std::vector<DivergenceRecord>& records);

}  // namespace srwd
