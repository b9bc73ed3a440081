#include "srwd/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace srwd {

bool candidate_order(const Candidate& a, const Candidate& b, bool length_norm) {
    double sa = a.score.value(length_norm), sb = b.score.value(length_norm);
    if (sa != sb) return sa > sb;
    return a.tokens < b.tokens;
}

void CandidateSet::check_invariants() const {
    if (int32_t(candidates.size()) > n_requested)
        throw InputError("CandidateSet: more candidates than requested N");
    std::set<TokenSeq> seen;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (c.tokens.empty()) throw InputError("CandidateSet: empty candidate");
        if (!std::isfinite(c.score.total_logprob))
            throw InputError("CandidateSet: non-finite score");
        if (!seen.insert(c.tokens).second)
            throw InputError("CandidateSet: duplicate token sequence");
        if (i > 0 && !candidate_order(candidates[i - 1], c, length_norm))
            throw InputError("CandidateSet: not strictly ordered");
    }
}

namespace {

struct Hypothesis {
    TokenSeq tokens;            // payload so far
    std::vector<double> state;  // decoder state after consuming tokens
    double total_logprob = 0.0;
};

bool token_allowed(TokenId t) { return t >= kFirstPayloadId || t == kEos; }

Candidate finish(Hypothesis&& hyp) {
    Candidate c;
    c.score.total_logprob = hyp.total_logprob;
    c.score.normalized = hyp.total_logprob / double(hyp.tokens.size() + 1);
    c.tokens = std::move(hyp.tokens);
    return c;
}

void finalize_set(CandidateSet& set, std::vector<Candidate>&& finished, int32_t n) {
    std::sort(finished.begin(), finished.end(), [&](const Candidate& a, const Candidate& b) {
        return candidate_order(a, b, set.length_norm);
    });
    // identical payloads decode identically, so dedup only collapses repeats
    std::set<TokenSeq> seen;
    for (auto& c : finished) {
        if (int32_t(set.candidates.size()) >= n) break;
        if (seen.insert(c.tokens).second) set.candidates.push_back(std::move(c));
    }
    set.n_requested = n;
}

}  // namespace

CandidateSet beam_search(const ParamsF64& params, std::span<const TokenId> source,
                         const DecodeConfig& cfg) {
    if (cfg.n_best < 1) throw ConfigError("beam_search: n_best must be >= 1");
    if (cfg.beam_width < cfg.n_best)
        throw ConfigError("beam_search: N exceeds beam_width");

    EncodedSource enc = encode_source(params, source);
    const int32_t max_len =
        cfg.max_len_override > 0 ? cfg.max_len_override : max_decode_len(source.size());
    const int32_t vocab = params.dims.vocab_size;

    std::vector<Hypothesis> live(1);
    live[0].state.assign(params.dims.hidden_dim, 0.0);
    std::vector<Candidate> finished;

    // EOS extensions compete for beam slots like any other token, so
    // beam_width = 1 is exactly greedy decoding and a saturating width
    // enumerates the full space.
    struct Extension {
        Hypothesis hyp;
        bool eos = false;
    };
    for (int32_t step = 0; step < max_len && !live.empty(); ++step) {
        std::vector<Extension> extensions;
        for (auto& hyp : live) {
            TokenId prev = hyp.tokens.empty() ? kBos : hyp.tokens.back();
            DecoderStep out = decoder_step(params, enc, hyp.state, prev);
            for (TokenId t = 0; t < vocab; ++t) {
                if (!token_allowed(t)) continue;
                if (t == kEos && hyp.tokens.empty()) continue;  // no empty candidates
                Extension ext;
                ext.hyp = hyp;
                ext.hyp.total_logprob += out.logprobs[t];
                if (t == kEos) {
                    ext.eos = true;
                } else {
                    ext.hyp.tokens.push_back(t);
                    ext.hyp.state = out.state;
                }
                extensions.push_back(std::move(ext));
            }
        }
        std::sort(extensions.begin(), extensions.end(), [](const Extension& a, const Extension& b) {
            if (a.hyp.total_logprob != b.hyp.total_logprob)
                return a.hyp.total_logprob > b.hyp.total_logprob;
            if (a.hyp.tokens != b.hyp.tokens) return a.hyp.tokens < b.hyp.tokens;
            return a.eos && !b.eos;
        });
        if (int32_t(extensions.size()) > cfg.beam_width) extensions.resize(cfg.beam_width);
        std::vector<Hypothesis> next;
        for (auto& ext : extensions) {
            if (ext.eos) finished.push_back(finish(std::move(ext.hyp)));
            else next.push_back(std::move(ext.hyp));
        }
        live = std::move(next);
    }

    // length cap reached: force EOS on the survivors
    for (auto& hyp : live) {
        TokenId prev = hyp.tokens.back();
        DecoderStep out = decoder_step(params, enc, hyp.state, prev);
        hyp.total_logprob += out.logprobs[kEos];
        finished.push_back(finish(std::move(hyp)));
    }

    CandidateSet set;
    set.source.assign(source.begin(), source.end());
    set.length_norm = cfg.length_norm;
    finalize_set(set, std::move(finished), cfg.n_best);
    return set;
}

CandidateSet beam_search(const ModelParams& params, std::span<const TokenId> source,
                         const DecodeConfig& cfg) {
    return beam_search(ParamsF64(params), source, cfg);
}

CandidateSet sample_candidates(const ParamsF64& params, std::span<const TokenId> source,
                               int32_t n, double temperature, uint64_t seed, bool length_norm,
                               int32_t max_len_override) {
    if (temperature <= 0.0) throw ConfigError("sample_candidates: temperature must be > 0");
    if (n < 1) throw ConfigError("sample_candidates: n must be >= 1");

    EncodedSource enc = encode_source(params, source);
    const int32_t max_len =
        max_len_override > 0 ? max_len_override : max_decode_len(source.size());
    const int32_t vocab = params.dims.vocab_size;
    Rng rng(seed);

    std::vector<Candidate> drawn;
    for (int32_t k = 0; k < n; ++k) {
        Hypothesis hyp;
        hyp.state.assign(params.dims.hidden_dim, 0.0);
        bool done = false;
        while (!done) {
            TokenId prev = hyp.tokens.empty() ? kBos : hyp.tokens.back();
            DecoderStep out = decoder_step(params, enc, hyp.state, prev);
            if (int32_t(hyp.tokens.size()) >= max_len) {
                hyp.total_logprob += out.logprobs[kEos];
                break;
            }
            // tempered distribution over the allowed tokens
            double mx = -1e300;
            for (TokenId t = 0; t < vocab; ++t) {
                if (!token_allowed(t) || (t == kEos && hyp.tokens.empty())) continue;
                mx = std::max(mx, out.logprobs[t] / temperature);
            }
            double z = 0.0;
            std::vector<double> w(vocab, 0.0);
            for (TokenId t = 0; t < vocab; ++t) {
                if (!token_allowed(t) || (t == kEos && hyp.tokens.empty())) continue;
                w[t] = std::exp(out.logprobs[t] / temperature - mx);
                z += w[t];
            }
            double u = rng.next_double() * z;
            TokenId pick = -1;
            double acc = 0.0;
            for (TokenId t = 0; t < vocab; ++t) {
                if (w[t] == 0.0) continue;
                acc += w[t];
                pick = t;
                if (u < acc) break;
            }
            hyp.total_logprob += out.logprobs[pick];  // score at temperature 1
            if (pick == kEos) {
                done = true;
            } else {
                hyp.tokens.push_back(pick);
                hyp.state = out.state;
            }
        }
        drawn.push_back(finish(std::move(hyp)));
    }

    CandidateSet set;
    set.source.assign(source.begin(), source.end());
    set.length_norm = length_norm;
    finalize_set(set, std::move(drawn), n);
    return set;
}

CandidateSet sample_candidates(const ModelParams& params, std::span<const TokenId> source,
                               int32_t n, double temperature, uint64_t seed, bool length_norm,
                               int32_t max_len_override) {
    return sample_candidates(ParamsF64(params), source, n, temperature, seed, length_norm,
                             max_len_override);
}

}  // namespace srwd
