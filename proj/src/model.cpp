#include "srwd/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "srwd/kernels.hpp"

namespace srwd {

namespace {

void check_dims(const ModelDims& d) {
    if (d.vocab_size < 1 || d.emb_dim < 1 || d.hidden_dim < 1)
        throw ConfigError("model dims: vocab_size, emb_dim, hidden_dim must all be >= 1");
}

void check_tokens(std::span<const TokenId> seq, int32_t vocab, const char* what) {
    if (seq.empty()) throw InputError(std::string(what) + ": empty sequence");
    for (TokenId t : seq)
        if (t < 0 || t >= vocab) throw InputError(std::string(what) + ": token id out of range");
}

// y += x^T W for row-major W (rows x cols), x of length rows, y of length cols.
void matvec_tn(const double* w, int rows, int cols, const double* x, double* y) {
    for (int r = 0; r < rows; ++r) kernels::axpy(x[r], w + size_t(r) * cols, y, size_t(cols));
}

// y[r] += dot(W.row(r), g); i.e. y += W g.
void matvec_nn(const double* w, int rows, int cols, const double* g, double* y) {
    for (int r = 0; r < rows; ++r) y[r] += kernels::dot(w + size_t(r) * cols, g, size_t(cols));
}

// G += outer(x, g) for row-major G (rows x cols).
void outer_acc(double* grad, int rows, int cols, const double* x, const double* g) {
    for (int r = 0; r < rows; ++r) {
        if (x[r] != 0.0) kernels::axpy(x[r], g, grad + size_t(r) * cols, size_t(cols));
    }
}

void log_softmax_inplace(std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    double lse = mx + std::log(sum);
    for (double& v : z) v -= lse;
}

std::vector<double> widen(const std::vector<float>& v) {
    return std::vector<double>(v.begin(), v.end());
}

}  // namespace

bool ModelParams::same_shape(const ModelParams& other) const {
    return dims.vocab_size == other.dims.vocab_size && dims.emb_dim == other.dims.emb_dim &&
           dims.hidden_dim == other.dims.hidden_dim;
}

bool ModelParams::all_finite() const {
    auto ok = [](const std::vector<float>& v) {
        for (float x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    return ok(emb) && ok(w_enc) && ok(u_enc) && ok(b_enc) && ok(w_dec) && ok(u_dec) &&
           ok(v_dec) && ok(b_dec) && ok(w_out) && ok(b_out);
}

std::vector<ModelParams::TensorRef> ModelParams::tensors() {
    uint32_t v = uint32_t(dims.vocab_size), e = uint32_t(dims.emb_dim), h = uint32_t(dims.hidden_dim);
    return {
        {"emb", &emb, {v, e}},     {"w_enc", &w_enc, {e, h}}, {"u_enc", &u_enc, {h, h}},
        {"b_enc", &b_enc, {h}},    {"w_dec", &w_dec, {e, h}}, {"u_dec", &u_dec, {h, h}},
        {"v_dec", &v_dec, {h, h}}, {"b_dec", &b_dec, {h}},    {"w_out", &w_out, {h, v}},
        {"b_out", &b_out, {v}},
    };
}

GradAccumulator::GradAccumulator(const ModelDims& d) : dims(d) {
    size_t v = size_t(d.vocab_size), e = size_t(d.emb_dim), h = size_t(d.hidden_dim);
    emb.assign(v * e, 0.0);
    w_enc.assign(e * h, 0.0);
    u_enc.assign(h * h, 0.0);
    b_enc.assign(h, 0.0);
    w_dec.assign(e * h, 0.0);
    u_dec.assign(h * h, 0.0);
    v_dec.assign(h * h, 0.0);
    b_dec.assign(h, 0.0);
    w_out.assign(h * v, 0.0);
    b_out.assign(v, 0.0);
}

void GradAccumulator::zero() {
    for (auto& [name, buf] : buffers()) std::fill(buf->begin(), buf->end(), 0.0);
}

void GradAccumulator::add(const GradAccumulator& other) {
    auto mine = buffers();
    auto theirs = other.buffers();
    for (size_t i = 0; i < mine.size(); ++i) {
        if (mine[i].second->size() != theirs[i].second->size())
            throw InputError("GradAccumulator::add: shape mismatch");
        const auto& src = *theirs[i].second;
        auto& dst = *mine[i].second;
        for (size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
}

std::vector<std::pair<const char*, std::vector<double>*>> GradAccumulator::buffers() {
    return {{"emb", &emb},     {"w_enc", &w_enc}, {"u_enc", &u_enc}, {"b_enc", &b_enc},
            {"w_dec", &w_dec}, {"u_dec", &u_dec}, {"v_dec", &v_dec}, {"b_dec", &b_dec},
            {"w_out", &w_out}, {"b_out", &b_out}};
}

std::vector<std::pair<const char*, const std::vector<double>*>> GradAccumulator::buffers() const {
    return {{"emb", &emb},     {"w_enc", &w_enc}, {"u_enc", &u_enc}, {"b_enc", &b_enc},
            {"w_dec", &w_dec}, {"u_dec", &u_dec}, {"v_dec", &v_dec}, {"b_dec", &b_dec},
            {"w_out", &w_out}, {"b_out", &b_out}};
}

ModelParams init_params(int32_t vocab_size, int32_t emb_dim, int32_t hidden_dim, uint64_t seed) {
    ModelDims d{vocab_size, emb_dim, hidden_dim};
    check_dims(d);
    ModelParams p;
    p.dims = d;
    p.seed = seed;
    GradAccumulator shape(d);  // reuse the shape table
    Rng rng(derive_seed(seed, "init_params"));
    auto fill = [&](std::vector<float>& dst, size_t n) {
        dst.resize(n);
        for (size_t i = 0; i < n; ++i) dst[i] = float(rng.uniform(-0.08, 0.08));
    };
    fill(p.emb, shape.emb.size());
    fill(p.w_enc, shape.w_enc.size());
    fill(p.u_enc, shape.u_enc.size());
    fill(p.b_enc, shape.b_enc.size());
    fill(p.w_dec, shape.w_dec.size());
    fill(p.u_dec, shape.u_dec.size());
    fill(p.v_dec, shape.v_dec.size());
    fill(p.b_dec, shape.b_dec.size());
    fill(p.w_out, shape.w_out.size());
    fill(p.b_out, shape.b_out.size());
    return p;
}

ParamsF64::ParamsF64(const ModelParams& p)
    : dims(p.dims),
      emb(widen(p.emb)),
      w_enc(widen(p.w_enc)),
      u_enc(widen(p.u_enc)),
      b_enc(widen(p.b_enc)),
      w_dec(widen(p.w_dec)),
      u_dec(widen(p.u_dec)),
      v_dec(widen(p.v_dec)),
      b_dec(widen(p.b_dec)),
      w_out(widen(p.w_out)),
      b_out(widen(p.b_out)) {}

EncodedSource encode_source(const ParamsF64& p, std::span<const TokenId> source) {
    check_tokens(source, p.dims.vocab_size, "encode_source");
    const int e = p.dims.emb_dim, h = p.dims.hidden_dim;
    EncodedSource enc;
    enc.len = int32_t(source.size());
    enc.states.assign(source.size() * size_t(h), 0.0);
    std::vector<double> prev(h, 0.0);
    for (size_t t = 0; t < source.size(); ++t) {
        double* ht = enc.states.data() + t * size_t(h);
        std::copy(p.b_enc.begin(), p.b_enc.end(), ht);
        matvec_tn(p.w_enc.data(), e, h, p.emb.data() + size_t(source[t]) * e, ht);
        matvec_tn(p.u_enc.data(), h, h, prev.data(), ht);
        for (int i = 0; i < h; ++i) ht[i] = std::tanh(ht[i]);
        std::copy(ht, ht + h, prev.begin());
    }
    return enc;
}

namespace {

struct StepTrace {
    std::vector<double> attn;     // S
    std::vector<double> context;  // H
    std::vector<double> state;    // H
    std::vector<double> probs;    // vocab (softmax, not log)
};

// Shared decoder-step core; optionally records the trace for backward.
void step_core(const ParamsF64& p, const EncodedSource& enc, const double* prev_state,
               TokenId prev_token, std::vector<double>& out_state,
               std::vector<double>& out_logits, StepTrace* trace) {
    const int e = p.dims.emb_dim, h = p.dims.hidden_dim, v = p.dims.vocab_size;
    const int s_len = enc.len;

    // attention: query with d_{t-1}
    std::vector<double> attn(s_len);
    double mx = -1e300;
    for (int i = 0; i < s_len; ++i) {
        attn[i] = kernels::dot(prev_state, enc.states.data() + size_t(i) * h, size_t(h));
        mx = std::max(mx, attn[i]);
    }
    double sum = 0.0;
    for (int i = 0; i < s_len; ++i) {
        attn[i] = std::exp(attn[i] - mx);
        sum += attn[i];
    }
    for (int i = 0; i < s_len; ++i) attn[i] /= sum;

    std::vector<double> context(h, 0.0);
    for (int i = 0; i < s_len; ++i)
        kernels::axpy(attn[i], enc.states.data() + size_t(i) * h, context.data(), size_t(h));

    out_state.assign(p.b_dec.begin(), p.b_dec.end());
    matvec_tn(p.w_dec.data(), e, h, p.emb.data() + size_t(prev_token) * e, out_state.data());
    matvec_tn(p.u_dec.data(), h, h, prev_state, out_state.data());
    matvec_tn(p.v_dec.data(), h, h, context.data(), out_state.data());
    for (int i = 0; i < h; ++i) out_state[i] = std::tanh(out_state[i]);

    out_logits.assign(p.b_out.begin(), p.b_out.end());
    matvec_tn(p.w_out.data(), h, v, out_state.data(), out_logits.data());

    if (trace) {
        trace->attn = std::move(attn);
        trace->context = std::move(context);
        trace->state = out_state;
    }
}

}  // namespace

DecoderStep decoder_step(const ParamsF64& p, const EncodedSource& enc,
                         std::span<const double> prev_state, TokenId prev_token) {
    if (prev_token < 0 || prev_token >= p.dims.vocab_size)
        throw InputError("decoder_step: token id out of range");
    DecoderStep out;
    step_core(p, enc, prev_state.data(), prev_token, out.state, out.logprobs, nullptr);
    log_softmax_inplace(out.logprobs);
    return out;
}

ForwardResult forward_logprob(const ParamsF64& p, std::span<const TokenId> source,
                              std::span<const TokenId> target) {
    check_tokens(target, p.dims.vocab_size, "forward_logprob target");
    EncodedSource enc = encode_source(p, source);
    const int h = p.dims.hidden_dim;

    ForwardResult res;
    std::vector<double> state(h, 0.0), next_state, logits;
    TokenId prev = kBos;
    const size_t steps = target.size() + 1;  // payload then EOS
    for (size_t t = 0; t < steps; ++t) {
        step_core(p, enc, state.data(), prev, next_state, logits, nullptr);
        log_softmax_inplace(logits);
        TokenId tgt = (t < target.size()) ? target[t] : kEos;
        res.per_token_logprobs.push_back(logits[tgt]);
        state = next_state;
        prev = tgt;
    }
    res.score.total_logprob = 0.0;
    for (double lp : res.per_token_logprobs) res.score.total_logprob += lp;
    res.score.normalized = res.score.total_logprob / double(steps);
    return res;
}

ForwardResult forward_logprob(const ModelParams& params, std::span<const TokenId> source,
                              std::span<const TokenId> target) {
    return forward_logprob(ParamsF64(params), source, target);
}

std::pair<double, GradAccumulator> weighted_nll_backward(const ModelParams& params,
                                                         const std::vector<WeightedItem>& items,
                                                         bool length_norm) {
    return weighted_nll_backward(ParamsF64(params), items, length_norm);
}

std::pair<double, GradAccumulator> weighted_nll_backward(const ParamsF64& p,
                                                         const std::vector<WeightedItem>& items,
                                                         bool length_norm) {
    const int e = p.dims.emb_dim, h = p.dims.hidden_dim, v = p.dims.vocab_size;
    GradAccumulator grads(p.dims);
    double loss = 0.0;

    for (const auto& item : items) {
        if (!std::isfinite(item.weight)) throw InputError("weighted_nll_backward: non-finite weight");
        if (item.weight == 0.0) continue;
        check_tokens(item.source, v, "weighted_nll_backward source");
        check_tokens(item.target, v, "weighted_nll_backward target");

        EncodedSource enc = encode_source(p, item.source);
        const int s_len = enc.len;
        const size_t steps = item.target.size() + 1;
        const double coeff = length_norm ? item.weight / double(steps) : item.weight;

        // forward with trace
        std::vector<StepTrace> traces(steps);
        std::vector<TokenId> inputs(steps);   // previous token per step
        std::vector<TokenId> targets(steps);  // predicted token per step
        std::vector<double> state(h, 0.0), logits;
        double total_logprob = 0.0;
        TokenId prev = kBos;
        for (size_t t = 0; t < steps; ++t) {
            inputs[t] = prev;
            targets[t] = (t < item.target.size()) ? item.target[t] : kEos;
            std::vector<double> next_state;
            step_core(p, enc, state.data(), prev, next_state, logits, &traces[t]);
            log_softmax_inplace(logits);
            total_logprob += logits[targets[t]];
            traces[t].probs.resize(v);
            for (int k = 0; k < v; ++k) traces[t].probs[k] = std::exp(logits[k]);
            state = std::move(next_state);
            prev = targets[t];
        }
        loss += item.weight * (length_norm ? total_logprob / double(steps) : total_logprob);

        // backward through time
        std::vector<double> g_state(h, 0.0);               // dL/dd_t
        std::vector<double> g_enc(size_t(s_len) * h, 0.0);  // dL/dh_i from attention
        std::vector<double> g_u(h), g_prev(h), g_ctx(h), g_query(h);
        for (size_t ts = steps; ts-- > 0;) {
            const StepTrace& tr = traces[ts];
            const double* d_prev = (ts == 0) ? nullptr : traces[ts - 1].state.data();
            std::vector<double> zero_state;
            if (!d_prev) {
                zero_state.assign(h, 0.0);
                d_prev = zero_state.data();
            }

            // output layer: dL/dz = coeff * (onehot - probs)
            std::vector<double> g_z(v);
            for (int k = 0; k < v; ++k) g_z[k] = -coeff * tr.probs[k];
            g_z[targets[ts]] += coeff;
            outer_acc(grads.w_out.data(), h, v, tr.state.data(), g_z.data());
            for (int k = 0; k < v; ++k) grads.b_out[k] += g_z[k];
            matvec_nn(p.w_out.data(), h, v, g_z.data(), g_state.data());

            // tanh
            for (int i = 0; i < h; ++i) g_u[i] = g_state[i] * (1.0 - tr.state[i] * tr.state[i]);

            std::fill(g_prev.begin(), g_prev.end(), 0.0);
            std::fill(g_ctx.begin(), g_ctx.end(), 0.0);

            for (int i = 0; i < h; ++i) grads.b_dec[i] += g_u[i];
            const double* emb_prev = p.emb.data() + size_t(inputs[ts]) * e;
            outer_acc(grads.w_dec.data(), e, h, emb_prev, g_u.data());
            matvec_nn(p.w_dec.data(), e, h, g_u.data(),
                      grads.emb.data() + size_t(inputs[ts]) * e);
            outer_acc(grads.u_dec.data(), h, h, d_prev, g_u.data());
            matvec_nn(p.u_dec.data(), h, h, g_u.data(), g_prev.data());
            outer_acc(grads.v_dec.data(), h, h, tr.context.data(), g_u.data());
            matvec_nn(p.v_dec.data(), h, h, g_u.data(), g_ctx.data());

            // attention backward: c = sum_i a_i h_i, a = softmax(q . h_i), q = d_{t-1}
            std::vector<double> g_a(s_len), g_e_att(s_len);
            double mix = 0.0;
            for (int i = 0; i < s_len; ++i) {
                const double* hi = enc.states.data() + size_t(i) * h;
                g_a[i] = kernels::dot(g_ctx.data(), hi, size_t(h));
                kernels::axpy(tr.attn[i], g_ctx.data(), g_enc.data() + size_t(i) * h, size_t(h));
                mix += tr.attn[i] * g_a[i];
            }
            std::fill(g_query.begin(), g_query.end(), 0.0);
            for (int i = 0; i < s_len; ++i) {
                g_e_att[i] = tr.attn[i] * (g_a[i] - mix);
                const double* hi = enc.states.data() + size_t(i) * h;
                kernels::axpy(g_e_att[i], hi, g_query.data(), size_t(h));
                kernels::axpy(g_e_att[i], d_prev, g_enc.data() + size_t(i) * h, size_t(h));
            }
            for (int i = 0; i < h; ++i) g_prev[i] += g_query[i];

            g_state = g_prev;  // flows to d_{t-1}; discarded at ts == 0 (d_0 is constant)
        }

        // encoder backward
        std::vector<double> carry(h, 0.0), g_uenc(h);
        for (int s = s_len; s-- > 0;) {
            const double* hs = enc.states.data() + size_t(s) * h;
            for (int i = 0; i < h; ++i) {
                double g = g_enc[size_t(s) * h + i] + carry[i];
                g_uenc[i] = g * (1.0 - hs[i] * hs[i]);
            }
            for (int i = 0; i < h; ++i) grads.b_enc[i] += g_uenc[i];
            const double* emb_s = p.emb.data() + size_t(item.source[s]) * e;
            outer_acc(grads.w_enc.data(), e, h, emb_s, g_uenc.data());
            matvec_nn(p.w_enc.data(), e, h, g_uenc.data(),
                      grads.emb.data() + size_t(item.source[s]) * e);
            std::fill(carry.begin(), carry.end(), 0.0);
            if (s > 0) {
                const double* hprev = enc.states.data() + size_t(s - 1) * h;
                outer_acc(grads.u_enc.data(), h, h, hprev, g_uenc.data());
                matvec_nn(p.u_enc.data(), h, h, g_uenc.data(), carry.data());
            }
        }
    }
    return {loss, std::move(grads)};
}

void sgd_step(ModelParams& params, const GradAccumulator& grads, double lr) {
    if (lr <= 0.0) throw ConfigError("sgd_step: lr must be > 0");
    auto tensors = params.tensors();
    auto bufs = grads.buffers();
    if (tensors.size() != bufs.size()) throw InputError("sgd_step: shape mismatch");
    for (size_t i = 0; i < tensors.size(); ++i) {
        auto& dst = *tensors[i].data;
        const auto& g = *bufs[i].second;
        if (dst.size() != g.size()) throw InputError("sgd_step: shape mismatch");
        for (size_t j = 0; j < dst.size(); ++j) dst[j] = float(double(dst[j]) - lr * g[j]);
    }
}

ModelParams average_checkpoints(const std::vector<ModelParams>& checkpoints) {
    if (checkpoints.empty()) throw InputError("average_checkpoints: empty list");
    ModelParams out = checkpoints.front();
    auto out_tensors = out.tensors();
    std::vector<std::vector<double>> acc(out_tensors.size());
    for (size_t i = 0; i < out_tensors.size(); ++i)
        acc[i].assign(out_tensors[i].data->size(), 0.0);
    for (const auto& ckpt : checkpoints) {
        if (!ckpt.same_shape(out)) throw InputError("average_checkpoints: shape mismatch");
        auto ts = const_cast<ModelParams&>(ckpt).tensors();
        for (size_t i = 0; i < ts.size(); ++i)
            for (size_t j = 0; j < ts[i].data->size(); ++j) acc[i][j] += double((*ts[i].data)[j]);
    }
    const double inv = 1.0 / double(checkpoints.size());
    for (size_t i = 0; i < out_tensors.size(); ++i)
        for (size_t j = 0; j < out_tensors[i].data->size(); ++j)
            (*out_tensors[i].data)[j] = float(acc[i][j] * inv);
    return out;
}

}  // namespace srwd
