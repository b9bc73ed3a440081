#pragma once

#include <functional>

#include "srwd/objectives.hpp"
#include "srwd/rewards.hpp"
#include "srwd/synthdata.hpp"

namespace srwd {

struct TrainConfig {
    double lr = 1e-4;             // reward fine-tuning
    double pretrain_lr = 0.1;     // NLL pretraining (desk-scale choice)
    int32_t n_candidates = 10;    // N
    int32_t beam_width_train = 10;
    int32_t eval_every = 20;
    int64_t max_iters = 1000;
    int32_t topk_for_mean = 10;
    int32_t batch_sentences = 8;
    uint64_t seed = 0;
    int32_t checkpoint_every = 100;  // pretraining cadence
    int32_t average_last = 10;
    int32_t valid_subset = 200;

    void validate() const;
};

struct TrainLogRecord {
    int64_t iter = 0;
    double best_response = 0.0;  // mean over validation of R(top-1)
    double mean_topk = 0.0;      // mean over validation of mean top-k reward
    double loss = 0.0;           // mean objective loss since the last record
    double tie_rate = 0.0;       // fraction of fully tied candidate sets in the window
};

// JSONL, one record per line; field names are part of the contract.
std::string train_log_jsonl(const std::vector<TrainLogRecord>& log);

struct PretrainResult {
    ModelParams params;  // average of the last checkpoints
    std::vector<ModelParams> checkpoints;
    double initial_nll = 0.0;
    double final_nll = 0.0;
};

PretrainResult pretrain_nll(const Corpus& corpus, const ModelDims& dims, int64_t iters,
                            const TrainConfig& cfg);

using CandidateSetObserver = std::function<void(int64_t iter, const CandidateSet& set)>;

struct FinetuneResult {
    ModelParams best_params;
    int64_t best_iter = 0;
    std::vector<TrainLogRecord> log;
    std::vector<std::pair<int64_t, ModelParams>> checkpoints;  // one per eval point
    // secondary reward curve (best-response), for divergence inspection
    std::vector<std::pair<int64_t, double>> aux_log;
};

FinetuneResult finetune_reward(const ModelParams& baseline, const Corpus& corpus,
                               const RewardFunction& reward, const ObjectiveConfig& obj_cfg,
                               const TrainConfig& cfg, const RewardFunction* aux_reward = nullptr,
                               const CandidateSetObserver& observer = nullptr);

struct EvalReport {
    std::vector<std::string> metric_names;
    std::vector<double> metric_means;  // corpus-mean sentence-level scores of top-1 decodes
    std::optional<double> mean_edit_distance;  // vs a second model's decodes

    std::string to_csv() const;
};

EvalReport evaluate_model(const ModelParams& params, const std::vector<const SequencePair*>& pairs,
                          const std::vector<const RewardFunction*>& metrics, int32_t beam_width = 4,
                          const ModelParams* other = nullptr, int threads = 1);

// Top-1 beam decodes for a corpus slice, line-aligned with the input.
std::vector<TokenSeq> decode_corpus(const ModelParams& params,
                                    const std::vector<const SequencePair*>& pairs,
                                    int32_t beam_width = 4, int threads = 1);

}  // namespace srwd
