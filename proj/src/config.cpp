#include "srwd/config.hpp"

#include <fstream>
#include <sstream>

namespace srwd {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int64_t to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);  // stoull would wrap
        size_t pos = 0;
        uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

}  // namespace

KvMap parse_config_text(const std::string& text) {
    KvMap kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

KvMap load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config_text(os.str());
}

RewardKind parse_reward_kind(const std::string& s) {
    if (s == "sbleu") return RewardKind::sbleu;
    if (s == "learned") return RewardKind::learned;
    if (s == "edit_sim") return RewardKind::edit_sim;
    throw ConfigError("reward.kind: unknown reward '" + s + "' (expected sbleu|learned|edit_sim)");
}

RunConfig RunConfig::from_map(const KvMap& kv) {
    RunConfig cfg;
    for (const auto& [key, val] : kv) {
        if (key == "data.task") cfg.data.task_kind = parse_task_kind(val);
        else if (key == "data.vocab_size") cfg.data.vocab_size = int32_t(to_int(key, val));
        else if (key == "data.min_len") cfg.data.min_len = int32_t(to_int(key, val));
        else if (key == "data.max_len") cfg.data.max_len = int32_t(to_int(key, val));
        else if (key == "data.noise_drop") cfg.data.noise_drop = to_double(key, val);
        else if (key == "data.noise_swap") cfg.data.noise_swap = to_double(key, val);
        else if (key == "data.corpus_size") cfg.data.corpus_size = int32_t(to_int(key, val));
        else if (key == "data.name") cfg.data_name = val;
        else if (key == "model.emb_dim") cfg.emb_dim = int32_t(to_int(key, val));
        else if (key == "model.hidden_dim") cfg.hidden_dim = int32_t(to_int(key, val));
        else if (key == "score.length_norm") cfg.length_norm = to_bool(key, val);
        else if (key == "decode.beam_width") cfg.beam_width = int32_t(to_int(key, val));
        else if (key == "reward.kind") cfg.reward = parse_reward_kind(val);
        else if (key == "reward.metric_examples") cfg.metric_examples = int32_t(to_int(key, val));
        else if (key == "objective.kind") cfg.objective = parse_objective_kind(val);
        else if (key == "objective.alpha") cfg.alpha = to_double(key, val);
        else if (key == "train.lr") cfg.train.lr = to_double(key, val);
        else if (key == "train.pretrain_lr") cfg.train.pretrain_lr = to_double(key, val);
        else if (key == "train.pretrain_iters") cfg.pretrain_iters = to_int(key, val);
        else if (key == "train.finetune_iters") cfg.train.max_iters = to_int(key, val);
        else if (key == "train.eval_every") cfg.train.eval_every = int32_t(to_int(key, val));
        else if (key == "train.n") cfg.train.n_candidates = int32_t(to_int(key, val));
        else if (key == "train.beam_width") cfg.train.beam_width_train = int32_t(to_int(key, val));
        else if (key == "train.topk") cfg.train.topk_for_mean = int32_t(to_int(key, val));
        else if (key == "train.batch_sentences") cfg.train.batch_sentences = int32_t(to_int(key, val));
        else if (key == "train.checkpoint_every") cfg.train.checkpoint_every = int32_t(to_int(key, val));
        else if (key == "train.average_last") cfg.train.average_last = int32_t(to_int(key, val));
        else if (key == "train.valid_subset") cfg.train.valid_subset = int32_t(to_int(key, val));
        else if (key == "analysis.k") cfg.analysis_k = int32_t(to_int(key, val));
        else if (key == "analysis.samples") cfg.analysis_samples = to_int(key, val);
        else if (key == "analysis.bin_width") cfg.bin_width = to_double(key, val);
        else if (key == "analysis.threshold_up") cfg.threshold_up = to_double(key, val);
        else if (key == "analysis.threshold_down") cfg.threshold_down = to_double(key, val);
        else if (key == "seed") cfg.seed = to_u64(key, val);
        else throw ConfigError("unknown config key: " + key);
    }
    return cfg;
}

ObjectiveConfig RunConfig::objective_config() const {
    ObjectiveConfig oc;
    oc.kind = objective;
    oc.alpha = alpha;
    oc.length_norm_scores = length_norm;
    return oc;
}

}  // namespace srwd
