#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "srwd/types.hpp"

namespace srwd {

struct ModelDims {
    int32_t vocab_size = 0;
    int32_t emb_dim = 32;     // E
    int32_t hidden_dim = 32;  // H
};

// Single-layer recurrent encoder-decoder with dot-product attention.
// Parameters are stored as 32-bit floats; all arithmetic runs in 64-bit.
// Weight matrices are row-major with rows = input dim, cols = output dim,
// applied as y = x^T W.
struct ModelParams {
    ModelDims dims;
    std::vector<float> emb;                  // vocab x E
    std::vector<float> w_enc, u_enc, b_enc;  // E x H, H x H, H
    std::vector<float> w_dec, u_dec, v_dec, b_dec;  // E x H, H x H, H x H, H
    std::vector<float> w_out, b_out;         // H x vocab, vocab
    int64_t iteration = 0;
    uint64_t seed = 0;

    bool same_shape(const ModelParams& other) const;
    bool all_finite() const;

    // Tensor list in canonical (checkpoint) order.
    struct TensorRef {
        const char* name;
        std::vector<float>* data;
        std::vector<uint32_t> dims;
    };
    std::vector<TensorRef> tensors();
};

struct GradAccumulator {
    ModelDims dims;
    std::vector<double> emb;
    std::vector<double> w_enc, u_enc, b_enc;
    std::vector<double> w_dec, u_dec, v_dec, b_dec;
    std::vector<double> w_out, b_out;

    explicit GradAccumulator(const ModelDims& d);
    void zero();
    void add(const GradAccumulator& other);  // buffer-wise sum
    std::vector<std::pair<const char*, std::vector<double>*>> buffers();
    std::vector<std::pair<const char*, const std::vector<double>*>> buffers() const;
};

struct SequenceScore {
    double total_logprob = 0.0;
    double normalized = 0.0;  // total / (payload length + 1 for EOS)

    double value(bool length_norm) const { return length_norm ? normalized : total_logprob; }
};

ModelParams init_params(int32_t vocab_size, int32_t emb_dim, int32_t hidden_dim, uint64_t seed);

// Double-precision mirror of the parameters, built once per sentence/batch
// so the hot loops never touch float storage.
struct ParamsF64 {
    ModelDims dims;
    std::vector<double> emb;
    std::vector<double> w_enc, u_enc, b_enc;
    std::vector<double> w_dec, u_dec, v_dec, b_dec;
    std::vector<double> w_out, b_out;

    explicit ParamsF64(const ModelParams& p);
};

// Encoder states for a source sentence: h_1..h_S, each of width H.
struct EncodedSource {
    std::vector<double> states;  // S x H row-major
    int32_t len = 0;
};

EncodedSource encode_source(const ParamsF64& p, std::span<const TokenId> source);

// One decoder step: given d_{t-1} and the previous output token, produces
// d_t and the log-softmax over the vocabulary. Attention queries with d_{t-1}.
struct DecoderStep {
    std::vector<double> state;     // d_t, width H
    std::vector<double> logprobs;  // vocab
};

DecoderStep decoder_step(const ParamsF64& p, const EncodedSource& enc,
                         std::span<const double> prev_state, TokenId prev_token);

struct ForwardResult {
    SequenceScore score;
    std::vector<double> per_token_logprobs;  // payload tokens then EOS
};

ForwardResult forward_logprob(const ParamsF64& p, std::span<const TokenId> source,
                              std::span<const TokenId> target);
ForwardResult forward_logprob(const ModelParams& params, std::span<const TokenId> source,
                              std::span<const TokenId> target);

struct WeightedItem {
    TokenSeq source;
    TokenSeq target;
    double weight = 0.0;  // lambda = dL/ds
};

// L = sum_i lambda_i * s_i with s the total or length-normalized sequence
// log-probability; returns L and its exact gradient via BPTT.
std::pair<double, GradAccumulator> weighted_nll_backward(const ModelParams& params,
                                                         const std::vector<WeightedItem>& items,
                                                         bool length_norm = false);
std::pair<double, GradAccumulator> weighted_nll_backward(const ParamsF64& p,
                                                         const std::vector<WeightedItem>& items,
                                                         bool length_norm = false);

void sgd_step(ModelParams& params, const GradAccumulator& grads, double lr);

ModelParams average_checkpoints(const std::vector<ModelParams>& checkpoints);

// Decode-length cap: 2*|X| + 5 payload tokens, then EOS is forced.
inline int32_t max_decode_len(size_t source_len) { return int32_t(2 * source_len + 5); }

}  // namespace srwd
