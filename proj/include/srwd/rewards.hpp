#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "srwd/synthdata.hpp"
#include "srwd/types.hpp"

namespace srwd {

using TokenSpan = std::span<const TokenId>;

class RewardFunction {
public:
    virtual ~RewardFunction() = default;
    virtual double evaluate(TokenSpan hyp, TokenSpan ref) const = 0;
    virtual std::string name() const = 0;
};

// Sentence BLEU with add-one smoothing on the n >= 2 precisions and
// brevity penalty min(1, exp(1 - |ref|/|hyp|)). Empty hypothesis scores 0.
double smoothed_bleu(TokenSpan hyp, TokenSpan ref, int max_n = 4);

int64_t token_edit_distance(TokenSpan a, TokenSpan b);

inline constexpr int kMetricFeatureCount = 5;

// [unigram F1, bigram F1, trigram F1, length ratio min/max, edit similarity]
std::array<double, kMetricFeatureCount> metric_features(TokenSpan hyp, TokenSpan ref);

struct LearnedMetricParams {
    std::array<double, kMetricFeatureCount> w{};
    double b = 0.0;
    int32_t feature_version = 1;
    bool ridge_fallback = false;  // set when the 1e-6 ridge was degenerate
};

struct MetricExample {
    TokenSeq hyp;
    TokenSeq ref;
    double gold = 0.0;
};

LearnedMetricParams train_learned_metric(const std::vector<MetricExample>& examples);
double learned_metric_score(const LearnedMetricParams& params, TokenSpan hyp, TokenSpan ref);

// Synthetic judgments for fitting the learned metric: corrupted hypotheses
// scored by a fixed hidden-judge blend of edit similarity and n-gram F1,
// plus Gaussian noise (sigma 0.05).
std::vector<MetricExample> make_metric_training_set(const Corpus& corpus, size_t max_examples,
                                                    uint64_t seed);

void save_learned_metric(const LearnedMetricParams& params, const std::string& path);
LearnedMetricParams load_learned_metric(const std::string& path);

class SmoothedBleuReward final : public RewardFunction {
public:
    double evaluate(TokenSpan hyp, TokenSpan ref) const override { return smoothed_bleu(hyp, ref); }
    std::string name() const override { return "sbleu"; }
};

class EditSimilarityReward final : public RewardFunction {
public:
    double evaluate(TokenSpan hyp, TokenSpan ref) const override;
    std::string name() const override { return "edit_sim"; }
};

class LearnedMetricReward final : public RewardFunction {
public:
    explicit LearnedMetricReward(LearnedMetricParams params) : params_(params) {}
    double evaluate(TokenSpan hyp, TokenSpan ref) const override {
        return learned_metric_score(params_, hyp, ref);
    }
    std::string name() const override { return "learned"; }
    const LearnedMetricParams& params() const { return params_; }

private:
    LearnedMetricParams params_;
};

struct Histogram {
    std::vector<double> bin_lo;
    std::vector<int64_t> counts;
    double bin_width = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // population
    int64_t total = 0;

    std::string to_csv() const;  // bin_lo,bin_hi,count rows + summary line
};

Histogram reward_histogram(std::span<const double> scores, double bin_width);

}  // namespace srwd
