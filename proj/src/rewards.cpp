#include "srwd/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "srwd/checkpoint.hpp"

namespace srwd {

namespace {

using NgramCounts = std::map<TokenSeq, int64_t>;

NgramCounts count_ngrams(TokenSpan seq, int n) {
    NgramCounts counts;
    if (int(seq.size()) < n) return counts;
    for (size_t i = 0; i + n <= seq.size(); ++i)
        ++counts[TokenSeq(seq.begin() + i, seq.begin() + i + n)];
    return counts;
}

int64_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
    int64_t matches = 0;
    for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) matches += std::min(count, it->second);
    }
    return matches;
}

}  // namespace

double smoothed_bleu(TokenSpan hyp, TokenSpan ref, int max_n) {
    if (ref.empty()) throw InputError("smoothed_bleu: empty reference");
    if (hyp.empty()) return 0.0;

    double log_prec_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        NgramCounts hyp_grams = count_ngrams(hyp, n);
        NgramCounts ref_grams = count_ngrams(ref, n);
        int64_t denom = std::max<int64_t>(0, int64_t(hyp.size()) - n + 1);
        int64_t matches = clipped_matches(hyp_grams, ref_grams);
        double p;
        if (n == 1) {
            if (matches == 0) return 0.0;
            p = double(matches) / double(denom);
        } else {
            p = double(matches + 1) / double(denom + 1);
        }
        log_prec_sum += std::log(p);
    }
    double bp = std::min(1.0, std::exp(1.0 - double(ref.size()) / double(hyp.size())));
    return bp * std::exp(log_prec_sum / double(max_n));
}

int64_t token_edit_distance(TokenSpan a, TokenSpan b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int64_t> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = int64_t(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = int64_t(i);
        for (size_t j = 1; j <= m; ++j) {
            int64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

double ngram_f1(TokenSpan hyp, TokenSpan ref, int n) {
    int64_t hyp_total = std::max<int64_t>(0, int64_t(hyp.size()) - n + 1);
    int64_t ref_total = std::max<int64_t>(0, int64_t(ref.size()) - n + 1);
    if (hyp_total == 0 && ref_total == 0) return 1.0;
    if (hyp_total == 0 || ref_total == 0) return 0.0;
    int64_t matches = clipped_matches(count_ngrams(hyp, n), count_ngrams(ref, n));
    return 2.0 * double(matches) / double(hyp_total + ref_total);
}

}  // namespace

std::array<double, kMetricFeatureCount> metric_features(TokenSpan hyp, TokenSpan ref) {
    if (ref.empty()) throw InputError("metric_features: empty reference");
    std::array<double, kMetricFeatureCount> f{};
    if (hyp.empty()) return f;  // all zeros, including length ratio
    f[0] = ngram_f1(hyp, ref, 1);
    f[1] = ngram_f1(hyp, ref, 2);
    f[2] = ngram_f1(hyp, ref, 3);
    double lh = double(hyp.size()), lr = double(ref.size());
    f[3] = std::min(lh, lr) / std::max(lh, lr);
    f[4] = 1.0 - double(token_edit_distance(hyp, ref)) / std::max(lh, lr);
    return f;
}

double EditSimilarityReward::evaluate(TokenSpan hyp, TokenSpan ref) const {
    if (ref.empty()) throw InputError("edit_similarity: empty reference");
    if (hyp.empty()) return 0.0;
    double mx = double(std::max(hyp.size(), ref.size()));
    return 1.0 - double(token_edit_distance(hyp, ref)) / mx;
}

namespace {

// Gaussian elimination with partial pivoting; returns false on a tiny pivot.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs,
                  std::vector<double>& out) {
    const size_t n = rhs.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-12) return false;
        std::swap(a[piv], a[col]);
        std::swap(rhs[piv], rhs[col]);
        for (size_t r = col + 1; r < n; ++r) {
            double factor = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            rhs[r] -= factor * rhs[col];
        }
    }
    out.assign(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        double v = rhs[r];
        for (size_t c = r + 1; c < n; ++c) v -= a[r][c] * out[c];
        out[r] = v / a[r][r];
    }
    return true;
}

bool fit_ridge(const std::vector<MetricExample>& examples, double ridge,
               std::vector<double>& out) {
    constexpr size_t kDim = kMetricFeatureCount + 1;  // bias last
    std::vector<std::vector<double>> ata(kDim, std::vector<double>(kDim, 0.0));
    std::vector<double> aty(kDim, 0.0);
    for (const auto& ex : examples) {
        auto feats = metric_features(ex.hyp, ex.ref);
        std::array<double, kDim> row{};
        std::copy(feats.begin(), feats.end(), row.begin());
        row[kMetricFeatureCount] = 1.0;
        for (size_t i = 0; i < kDim; ++i) {
            for (size_t j = 0; j < kDim; ++j) ata[i][j] += row[i] * row[j];
            aty[i] += row[i] * ex.gold;
        }
    }
    for (size_t i = 0; i < kDim; ++i) ata[i][i] += ridge;
    return solve_linear(std::move(ata), std::move(aty), out);
}

}  // namespace

LearnedMetricParams train_learned_metric(const std::vector<MetricExample>& examples) {
    if (examples.size() < kMetricFeatureCount + 1)
        throw InputError("train_learned_metric: need at least F+1 examples");
    LearnedMetricParams params;
    std::vector<double> solution;
    if (!fit_ridge(examples, 1e-6, solution)) {
        params.ridge_fallback = true;
        if (!fit_ridge(examples, 1e-3, solution))
            throw InputError("train_learned_metric: degenerate design matrix");
    }
    std::copy_n(solution.begin(), kMetricFeatureCount, params.w.begin());
    params.b = solution[kMetricFeatureCount];
    return params;
}

double learned_metric_score(const LearnedMetricParams& params, TokenSpan hyp, TokenSpan ref) {
    auto feats = metric_features(hyp, ref);
    double score = params.b;
    for (int i = 0; i < kMetricFeatureCount; ++i) score += params.w[i] * feats[i];
    return score;
}

std::vector<MetricExample> make_metric_training_set(const Corpus& corpus, size_t max_examples,
                                                    uint64_t seed) {
    if (corpus.pairs.empty()) throw InputError("make_metric_training_set: empty corpus");
    Rng rng(derive_seed(seed, "metric_training_set"));
    const int32_t payload_vocab = corpus.vocab_size - kFirstPayloadId;
    std::vector<MetricExample> out;
    out.reserve(max_examples);
    for (size_t k = 0; k < max_examples; ++k) {
        const auto& ref = corpus.pairs[k % corpus.pairs.size()].reference;
        MetricExample ex;
        ex.ref = ref;
        double severity = rng.next_double();  // 0: near-perfect copy, 1: heavy corruption
        for (TokenId t : ref) {
            double u = rng.next_double();
            if (u < 0.3 * severity) continue;  // drop
            if (u < 0.6 * severity)
                ex.hyp.push_back(kFirstPayloadId + TokenId(rng.next_below(uint64_t(payload_vocab))));
            else
                ex.hyp.push_back(t);
        }
        if (ex.hyp.empty()) ex.hyp.push_back(ref.front());
        for (size_t i = 0; i + 1 < ex.hyp.size(); ++i)
            if (rng.next_double() < 0.3 * severity) std::swap(ex.hyp[i], ex.hyp[i + 1]);

        auto feats = metric_features(ex.hyp, ex.ref);
        double u1 = rng.next_double(), u2 = rng.next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        double noise = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2) * 0.05;
        ex.gold = 0.5 * feats[4] + 0.3 * feats[0] + 0.2 * feats[1] + noise;
        out.push_back(std::move(ex));
    }
    return out;
}

void save_learned_metric(const LearnedMetricParams& params, const std::string& path) {
    NamedTensor w{"metric.w", {kMetricFeatureCount}, {}};
    for (double v : params.w) w.data.push_back(float(v));
    NamedTensor b{"metric.b", {1}, {float(params.b)}};
    write_tensors(path, {w, b});
}

LearnedMetricParams load_learned_metric(const std::string& path) {
    LearnedMetricParams params;
    bool have_w = false, have_b = false;
    for (const auto& t : read_tensors(path)) {
        if (t.name == "metric.w" && t.data.size() == kMetricFeatureCount) {
            for (int i = 0; i < kMetricFeatureCount; ++i) params.w[i] = t.data[i];
            have_w = true;
        } else if (t.name == "metric.b" && t.data.size() == 1) {
            params.b = t.data[0];
            have_b = true;
        }
    }
    if (!have_w || !have_b) throw IoError("learned metric: missing tensors in " + path);
    return params;
}

Histogram reward_histogram(std::span<const double> scores, double bin_width) {
    if (scores.empty()) throw InputError("reward_histogram: empty score list");
    if (bin_width <= 0.0) throw ConfigError("reward_histogram: bin_width must be > 0");
    Histogram h;
    h.bin_width = bin_width;
    h.total = int64_t(scores.size());
    double mn = scores[0], mx = scores[0], sum = 0.0;
    for (double s : scores) {
        mn = std::min(mn, s);
        mx = std::max(mx, s);
        sum += s;
    }
    h.mean = sum / double(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - h.mean) * (s - h.mean);
    h.stddev = std::sqrt(var / double(scores.size()));

    int64_t lo_bin = int64_t(std::floor(mn / bin_width));
    int64_t hi_bin = int64_t(std::floor(mx / bin_width));
    h.counts.assign(size_t(hi_bin - lo_bin + 1), 0);
    h.bin_lo.resize(h.counts.size());
    for (size_t i = 0; i < h.bin_lo.size(); ++i) h.bin_lo[i] = double(lo_bin + int64_t(i)) * bin_width;
    for (double s : scores) {
        int64_t b = int64_t(std::floor(s / bin_width)) - lo_bin;
        b = std::clamp<int64_t>(b, 0, int64_t(h.counts.size()) - 1);
        ++h.counts[size_t(b)];
    }
    return h;
}

std::string Histogram::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "bin_lo,bin_hi,count\n";
    for (size_t i = 0; i < counts.size(); ++i)
        os << bin_lo[i] << ',' << (bin_lo[i] + bin_width) << ',' << counts[i] << '\n';
    os << "# mean=" << mean << " std=" << stddev << " n=" << total << '\n';
    return os.str();
}

}  // namespace srwd
