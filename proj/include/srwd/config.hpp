#pragma once

#include <map>
#include <string>

#include "srwd/objectives.hpp"
#include "srwd/synthdata.hpp"
#include "srwd/trainer.hpp"

namespace srwd {

// Flat key=value configuration with namespaced keys. Unknown keys are
// rejected so typos fail loudly.
using KvMap = std::map<std::string, std::string>;

KvMap parse_config_text(const std::string& text);     // "key = value", '#' comments
KvMap load_config_file(const std::string& path);

enum class RewardKind { sbleu, learned, edit_sim };
RewardKind parse_reward_kind(const std::string& s);

struct RunConfig {
    // data.*
    TaskSpec data;
    std::string data_name = "corpus";
    // model.*
    int32_t emb_dim = 32;
    int32_t hidden_dim = 32;
    // score.*
    bool length_norm = false;
    // decode.*
    int32_t beam_width = 4;
    // reward.*
    RewardKind reward = RewardKind::sbleu;
    int32_t metric_examples = 2000;
    // objective.*
    ObjectiveKind objective = ObjectiveKind::contrastive_margin;
    double alpha = 0.3;
    // train.*
    TrainConfig train;
    int64_t pretrain_iters = 3000;
    // analysis.*
    int32_t analysis_k = 4;
    int64_t analysis_samples = 10000;
    double bin_width = 0.05;
    double threshold_up = 0.3;
    double threshold_down = 0.03;

    uint64_t seed = 0;

    static RunConfig from_map(const KvMap& kv);
    ObjectiveConfig objective_config() const;
};

}  // namespace srwd
