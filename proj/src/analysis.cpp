#include "srwd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "srwd/parallel.hpp"

namespace srwd {

namespace {

// inversion count over ys via mergesort (Knight's algorithm): the number of
// strictly discordant pairs once the data is sorted by (x asc, y asc)
int64_t count_inversions(std::vector<double>& v, std::vector<double>& tmp, size_t lo, size_t hi) {
    if (hi - lo < 2) return 0;
    size_t mid = (lo + hi) / 2;
    int64_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
    size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += int64_t(mid - i);
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
    return inv;
}

int64_t tie_pairs(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    int64_t total = 0;
    size_t i = 0;
    while (i < v.size()) {
        size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        int64_t t = int64_t(j - i);
        total += t * (t - 1) / 2;
        i = j;
    }
    return total;
}

}  // namespace

std::optional<double> kendall_tau(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw InputError("kendall_tau: length mismatch");
    const size_t n = xs.size();
    if (n < 2) throw InputError("kendall_tau: need at least 2 observations");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (xs[a] != xs[b]) return xs[a] < xs[b];
        return ys[a] < ys[b];
    });

    const int64_t n0 = int64_t(n) * int64_t(n - 1) / 2;
    const int64_t n1 = tie_pairs({xs.begin(), xs.end()});
    const int64_t n2 = tie_pairs({ys.begin(), ys.end()});
    if (n0 == n1 || n0 == n2) return std::nullopt;  // a fully tied list

    int64_t n3 = 0;  // pairs tied in both
    {
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j < n && xs[order[j]] == xs[order[i]] && ys[order[j]] == ys[order[i]]) ++j;
            int64_t t = int64_t(j - i);
            n3 += t * (t - 1) / 2;
            i = j;
        }
    }

    std::vector<double> y_sorted(n), tmp(n);
    for (size_t i = 0; i < n; ++i) y_sorted[i] = ys[order[i]];
    const int64_t discordant = count_inversions(y_sorted, tmp, 0, n);
    const int64_t concordant = n0 - n1 - n2 + n3 - discordant;

    double denom = std::sqrt(double(n0 - n1)) * std::sqrt(double(n0 - n2));
    return double(concordant - discordant) / denom;
}

CorrelationMatrix correlation_matrix(const ModelParams& params,
                                     const std::vector<const SequencePair*>& pairs,
                                     const std::vector<const RewardFunction*>& metrics,
                                     const CorrelationConfig& cfg) {
    if (cfg.k_best < 2) throw ConfigError("analysis.k: k-best must be >= 2");
    if (pairs.empty()) throw InputError("correlation_matrix: empty corpus slice");
    CorrelationMatrix out;
    out.names.push_back("nmt");
    for (const auto* m : metrics) out.names.push_back(m->name());
    if (out.names.size() < 2) throw ConfigError("correlation_matrix: need at least 2 metrics");
    const size_t dim = out.names.size();
    out.samples = cfg.samples;

    std::vector<double> sums(dim * dim, 0.0);
    std::vector<int64_t> counts(dim * dim, 0);

    ParamsF64 view(params);
    DecodeConfig dcfg;
    dcfg.n_best = cfg.k_best;
    dcfg.beam_width = std::max(cfg.beam_width, cfg.k_best);
    dcfg.length_norm = cfg.length_norm;

    // indices drawn serially so the result is identical for any thread count
    Rng rng(derive_seed(cfg.seed, "correlation_matrix"));
    std::vector<size_t> picks(cfg.samples);
    for (size_t s = 0; s < cfg.samples; ++s) picks[s] = rng.next_below(pairs.size());

    std::vector<std::vector<std::optional<double>>> per_sample(cfg.samples);
    parallel_for(cfg.samples, cfg.threads, [&](size_t s) {
        const SequencePair& pair = *pairs[picks[s]];
        CandidateSet set = beam_search(view, pair.source, dcfg);
        if (set.candidates.size() < 2) return;

        std::vector<std::vector<double>> scores(dim);
        for (size_t i = 0; i < set.candidates.size(); ++i)
            scores[0].push_back(set.ranking_score(i));
        for (size_t m = 0; m < metrics.size(); ++m)
            for (const auto& c : set.candidates)
                scores[m + 1].push_back(metrics[m]->evaluate(c.tokens, pair.reference));

        auto& cell = per_sample[s];
        cell.resize(dim * dim);
        for (size_t a = 0; a < dim; ++a)
            for (size_t b = 0; b < dim; ++b)
                cell[a * dim + b] = kendall_tau(scores[a], scores[b]);
    });

    for (const auto& cell : per_sample) {
        if (cell.empty()) continue;
        for (size_t i = 0; i < dim * dim; ++i) {
            if (!cell[i]) continue;  // fully tied lists are skipped, not zero-filled
            sums[i] += *cell[i];
            ++counts[i];
        }
    }

    out.tau.assign(dim * dim, std::nan(""));
    for (size_t i = 0; i < dim * dim; ++i)
        if (counts[i] > 0) {
            // rounding in the mean of per-sample taus can stray past the
            // mathematical range by an ulp; clamp back into [-1, 1]
            out.tau[i] = std::clamp(sums[i] / double(counts[i]), -1.0, 1.0);
        }
    return out;
}

std::string CorrelationMatrix::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(10) << "metric";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (size_t i = 0; i < names.size(); ++i) {
        os << names[i];
        for (size_t j = 0; j < names.size(); ++j) os << ',' << at(i, j);
        os << '\n';
    }
    return os.str();
}

std::vector<DivergenceRecord> mine_divergence(const std::vector<TokenSeq>& baseline_hyps,
                                              const std::vector<TokenSeq>& tuned_hyps,
                                              const std::vector<TokenSeq>& references,
                                              const RewardFunction& metric,
                                              const DivergenceThresholds& thresholds) {
    if (baseline_hyps.size() != tuned_hyps.size() || baseline_hyps.size() != references.size())
        throw InputError("mine_divergence: misaligned line counts");
    std::vector<DivergenceRecord> records;
    for (size_t i = 0; i < references.size(); ++i) {
        double dm = metric.evaluate(tuned_hyps[i], references[i]) -
                    metric.evaluate(baseline_hyps[i], references[i]);
        double db = smoothed_bleu(tuned_hyps[i], references[i]) -
                    smoothed_bleu(baseline_hyps[i], references[i]);
        if (dm >= thresholds.metric_up && db <= -thresholds.sbleu_down)
            records.push_back({i, baseline_hyps[i], tuned_hyps[i], dm, db});
    }
    std::sort(records.begin(), records.end(), [](const DivergenceRecord& a, const DivergenceRecord& b) {
        if (a.delta_metric != b.delta_metric) return a.delta_metric > b.delta_metric;
        return a.sentence_id < b.sentence_id;
    });
    return records;
}

std::string divergence_tsv(const std::vector<DivergenceRecord>& records) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "id\tdelta_metric\tdelta_sbleu\tbaseline_hyp\ttuned_hyp\n";
    auto join = [](const TokenSeq& seq) {
        std::ostringstream s;
        for (size_t i = 0; i < seq.size(); ++i) {
            if (i) s << ' ';
            s << seq[i];
        }
        return s.str();
    };
    for (const auto& r : records)
        os << r.sentence_id << '\t' << r.delta_metric << '\t' << r.delta_sbleu << '\t'
           << join(r.baseline_hyp) << '\t' << join(r.tuned_hyp) << '\n';
    return os.str();
}

}  // namespace srwd
