#include "srwd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "srwd/parallel.hpp"

namespace srwd {

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ConfigError("train.lr: must be > 0");
    if (pretrain_lr <= 0.0) throw ConfigError("train.pretrain_lr: must be > 0");
    if (eval_every < 1) throw ConfigError("train.eval_every: must be >= 1");
    if (n_candidates < 1) throw ConfigError("train.n: must be >= 1");
    if (beam_width_train < n_candidates)
        throw ConfigError("train.beam_width: must be >= train.n");
    if (batch_sentences < 1) throw ConfigError("train.batch_sentences: must be >= 1");
    if (topk_for_mean < 1) throw ConfigError("train.topk: must be >= 1");
    if (max_iters < 0) throw ConfigError("train.max_iters: must be >= 0");
}

std::string train_log_jsonl(const std::vector<TrainLogRecord>& log) {
    std::ostringstream os;
    for (const auto& r : log) {
        nlohmann::ordered_json j;
        j["iter"] = r.iter;
        j["best_response"] = r.best_response;
        j["mean_topk"] = r.mean_topk;
        j["loss"] = r.loss;
        j["tie_rate"] = r.tie_rate;
        os << j.dump() << '\n';
    }
    return os.str();
}

namespace {

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_below(i)]);
}

// cyclic batches over a reshuffled epoch order
class BatchCursor {
public:
    BatchCursor(size_t n, uint64_t seed) : order_(n), rng_(seed) {
        std::iota(order_.begin(), order_.end(), 0);
        shuffle_indices(order_, rng_);
    }

    size_t next() {
        if (pos_ >= order_.size()) {
            pos_ = 0;
            shuffle_indices(order_, rng_);
        }
        return order_[pos_++];
    }

private:
    std::vector<size_t> order_;
    Rng rng_;
    size_t pos_ = 0;
};

}  // namespace

PretrainResult pretrain_nll(const Corpus& corpus, const ModelDims& dims, int64_t iters,
                            const TrainConfig& cfg) {
    cfg.validate();
    auto train = corpus.split_pairs(Split::train);
    if (train.empty()) throw InputError("pretrain_nll: empty train split");

    PretrainResult result;
    ModelParams params = init_params(corpus.vocab_size, dims.emb_dim, dims.hidden_dim, cfg.seed);
    BatchCursor cursor(train.size(), derive_seed(cfg.seed, "pretrain_batches"));
    const double lambda = -1.0 / double(cfg.batch_sentences);

    for (int64_t it = 1; it <= iters; ++it) {
        std::vector<WeightedItem> items;
        items.reserve(cfg.batch_sentences);
        for (int32_t b = 0; b < cfg.batch_sentences; ++b) {
            const SequencePair& pair = *train[cursor.next()];
            items.push_back({pair.source, pair.reference, lambda});
        }
        auto [loss, grads] = weighted_nll_backward(params, items, /*length_norm=*/true);
        double nll = loss;  // lambda = -1/B, so the loss already is the mean per-token NLL
        if (!std::isfinite(nll))
            throw InputError("pretrain_nll: diverged (non-finite loss) at iteration " +
                             std::to_string(it));
        if (it == 1) result.initial_nll = nll;
        result.final_nll = nll;
        sgd_step(params, grads, cfg.pretrain_lr);
        if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0) {
            ModelParams ckpt = params;
            ckpt.iteration = it;
            result.checkpoints.push_back(std::move(ckpt));
        }
    }

    if (result.checkpoints.empty()) {
        params.iteration = iters;
        result.params = std::move(params);
    } else {
        size_t keep = std::min<size_t>(size_t(cfg.average_last), result.checkpoints.size());
        std::vector<ModelParams> last(result.checkpoints.end() - long(keep),
                                      result.checkpoints.end());
        result.params = average_checkpoints(last);
        result.params.iteration = iters;
    }
    result.params.seed = cfg.seed;
    return result;
}

namespace {

struct ValidationScores {
    double best_response = 0.0;
    double mean_topk = 0.0;
    double aux_best_response = 0.0;
};

ValidationScores validate_reward(const ModelParams& params,
                                 const std::vector<const SequencePair*>& valid,
                                 const RewardFunction& reward, const RewardFunction* aux,
                                 const TrainConfig& cfg, bool length_norm) {
    ParamsF64 view(params);
    DecodeConfig dcfg;
    dcfg.n_best = cfg.topk_for_mean;
    dcfg.beam_width = std::max(cfg.beam_width_train, cfg.topk_for_mean);
    dcfg.length_norm = length_norm;

    ValidationScores out;
    for (const auto* pair : valid) {
        CandidateSet set = beam_search(view, pair->source, dcfg);
        double topk_sum = 0.0;
        for (const auto& c : set.candidates) topk_sum += reward.evaluate(c.tokens, pair->reference);
        out.best_response += reward.evaluate(set.candidates[0].tokens, pair->reference);
        out.mean_topk += topk_sum / double(set.candidates.size());
        if (aux) out.aux_best_response += aux->evaluate(set.candidates[0].tokens, pair->reference);
    }
    out.best_response /= double(valid.size());
    out.mean_topk /= double(valid.size());
    out.aux_best_response /= double(valid.size());
    return out;
}

}  // namespace

FinetuneResult finetune_reward(const ModelParams& baseline, const Corpus& corpus,
                               const RewardFunction& reward, const ObjectiveConfig& obj_cfg,
                               const TrainConfig& cfg, const RewardFunction* aux_reward,
                               const CandidateSetObserver& observer) {
    cfg.validate();
    obj_cfg.validate();
    auto train = corpus.split_pairs(Split::train);
    auto valid_all = corpus.split_pairs(Split::valid);
    if (train.empty()) throw InputError("finetune_reward: empty train split");
    if (valid_all.empty()) throw InputError("finetune_reward: empty valid split");
    std::vector<const SequencePair*> valid(
        valid_all.begin(),
        valid_all.begin() + std::min<size_t>(size_t(cfg.valid_subset), valid_all.size()));

    const bool length_norm = objective_uses_length_norm(obj_cfg);

    FinetuneResult result;
    ModelParams params = baseline;
    BatchCursor cursor(train.size(), derive_seed(cfg.seed, "finetune_batches"));

    int64_t window_sets = 0, window_ties = 0, window_iters = 0;
    double window_loss = 0.0;

    auto record = [&](int64_t iter) {
        ValidationScores v = validate_reward(params, valid, reward, aux_reward, cfg, length_norm);
        TrainLogRecord rec;
        rec.iter = iter;
        rec.best_response = v.best_response;
        rec.mean_topk = v.mean_topk;
        rec.loss = window_iters > 0 ? window_loss / double(window_iters) : 0.0;
        rec.tie_rate = window_sets > 0 ? double(window_ties) / double(window_sets) : 0.0;
        result.log.push_back(rec);
        if (aux_reward) result.aux_log.emplace_back(iter, v.aux_best_response);
        ModelParams ckpt = params;
        ckpt.iteration = iter;
        result.checkpoints.emplace_back(iter, std::move(ckpt));
        window_sets = window_ties = window_iters = 0;
        window_loss = 0.0;
    };

    record(0);

    DecodeConfig dcfg;
    dcfg.n_best = cfg.n_candidates;
    dcfg.beam_width = cfg.beam_width_train;
    dcfg.length_norm = length_norm;

    for (int64_t it = 1; it <= cfg.max_iters; ++it) {
        ParamsF64 view(params);
        GradAccumulator grads(params.dims);
        double iter_loss = 0.0;
        for (int32_t b = 0; b < cfg.batch_sentences; ++b) {
            const SequencePair& pair = *train[cursor.next()];
            CandidateSet set = beam_search(view, pair.source, dcfg);
            for (auto& c : set.candidates) {
                try {
                    c.reward = reward.evaluate(c.tokens, pair.reference);
                } catch (const std::exception& e) {
                    std::ostringstream os;
                    os << "finetune_reward: reward failed at iteration " << it << " on source [";
                    for (size_t k = 0; k < pair.source.size(); ++k)
                        os << (k ? " " : "") << pair.source[k];
                    os << "]: " << e.what();
                    throw InputError(os.str());
                }
            }
            if (observer) observer(it, set);
            ++window_sets;
            double rmin = *set.candidates[0].reward, rmax = rmin;
            for (const auto& c : set.candidates) {
                rmin = std::min(rmin, *c.reward);
                rmax = std::max(rmax, *c.reward);
            }
            if (rmin == rmax) ++window_ties;

            ObjectiveOutput obj = compute_objective(set, obj_cfg);
            iter_loss += obj.loss;
            if (obj.active) {
                std::vector<WeightedItem> items;
                items.reserve(obj.weights.size());
                for (const auto& [idx, lambda] : obj.weights)
                    items.push_back({set.source, set.candidates[idx].tokens, lambda});
                auto [loss_val, g] = weighted_nll_backward(view, items, length_norm);
                (void)loss_val;
                grads.add(g);
            }
        }
        window_loss += iter_loss / double(cfg.batch_sentences);
        ++window_iters;
        sgd_step(params, grads, cfg.lr);
        if (!params.all_finite())
            throw InputError("finetune_reward: diverged (non-finite parameters) at iteration " +
                             std::to_string(it));
        if (it % cfg.eval_every == 0 || it == cfg.max_iters) record(it);
    }

    // checkpoint with the highest best-response reward; earliest wins ties
    size_t best = 0;
    for (size_t i = 1; i < result.log.size(); ++i)
        if (result.log[i].best_response > result.log[best].best_response) best = i;
    result.best_iter = result.log[best].iter;
    for (auto& [iter, ckpt] : result.checkpoints)
        if (iter == result.best_iter) result.best_params = ckpt;
    return result;
}

std::vector<TokenSeq> decode_corpus(const ModelParams& params,
                                    const std::vector<const SequencePair*>& pairs,
                                    int32_t beam_width, int threads) {
    ParamsF64 view(params);
    DecodeConfig dcfg;
    dcfg.n_best = 1;
    dcfg.beam_width = beam_width;
    std::vector<TokenSeq> out(pairs.size());
    parallel_for(pairs.size(), threads, [&](size_t i) {
        out[i] = beam_search(view, pairs[i]->source, dcfg).candidates.at(0).tokens;
    });
    return out;
}

EvalReport evaluate_model(const ModelParams& params, const std::vector<const SequencePair*>& pairs,
                          const std::vector<const RewardFunction*>& metrics, int32_t beam_width,
                          const ModelParams* other, int threads) {
    if (pairs.empty()) throw InputError("evaluate_model: empty split");
    auto decodes = decode_corpus(params, pairs, beam_width, threads);

    EvalReport report;
    for (const auto* metric : metrics) {
        std::vector<double> vals(pairs.size());
        parallel_for(pairs.size(), threads, [&](size_t i) {
            vals[i] = metric->evaluate(decodes[i], pairs[i]->reference);
        });
        double sum = 0.0;
        for (double v : vals) sum += v;
        report.metric_names.push_back(metric->name());
        report.metric_means.push_back(sum / double(pairs.size()));
    }
    if (other) {
        auto other_decodes = decode_corpus(*other, pairs, beam_width, threads);
        double sum = 0.0;
        for (size_t i = 0; i < decodes.size(); ++i)
            sum += double(token_edit_distance(decodes[i], other_decodes[i]));
        report.mean_edit_distance = sum / double(decodes.size());
    }
    return report;
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "metric,mean\n";
    for (size_t i = 0; i < metric_names.size(); ++i)
        os << metric_names[i] << ',' << metric_means[i] << '\n';
    if (mean_edit_distance) os << "edit_distance_vs_other," << *mean_edit_distance << '\n';
    return os.str();
}

}  // namespace srwd
