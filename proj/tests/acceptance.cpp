// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// pass. Heavy end-to-end runs share one pretrained baseline; the final
// criterion drives the installed CLI binary twice and byte-compares every
// artifact.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "srwd/analysis.hpp"
#include "srwd/checkpoint.hpp"
#include "srwd/config.hpp"
#include "srwd/trainer.hpp"

using namespace srwd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, double seconds,
            const std::string& detail = "") {
    std::ostringstream line;
    line << "[" << (id < 10 ? " " : "") << id << "/11] " << name << " ... "
         << (ok ? "PASS" : "FAIL") << " (" << std::fixed;
    line.precision(1);
    line << seconds << "s)";
    if (!detail.empty()) line << " -- " << detail;
    std::cout << line.str() << std::endl;
    if (!ok) ++g_failures;
}

template <typename Fn>
void run(int id, const std::string& name, Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, ok, secs, detail);
}

TokenSeq random_payload(Rng& rng, int32_t vocab, size_t min_len, size_t max_len) {
    size_t len = min_len + rng.next_below(max_len - min_len + 1);
    TokenSeq s(len);
    for (auto& t : s)
        t = TokenId(kFirstPayloadId + rng.next_below(uint64_t(vocab - kFirstPayloadId)));
    return s;
}

double weighted_value(const ModelParams& params, const std::vector<WeightedItem>& items,
                      bool length_norm) {
    double total = 0.0;
    ParamsF64 view(params);
    for (const auto& it : items)
        total += it.weight * forward_logprob(view, it.source, it.target).score.value(length_norm);
    return total;
}

// ---- synthetic candidate sets for the objective checks -------------------

CandidateSet make_set(const std::vector<double>& scores, const std::vector<double>& rewards,
                      bool normalized_scores = false) {
    CandidateSet set;
    set.n_requested = int32_t(scores.size());
    set.length_norm = normalized_scores;
    for (size_t i = 0; i < scores.size(); ++i) {
        Candidate c;
        c.tokens = {TokenId(kFirstPayloadId + i)};
        if (normalized_scores) {
            c.score.normalized = scores[i];
            c.score.total_logprob = scores[i] * 2.0;
        } else {
            c.score.total_logprob = scores[i];
            c.score.normalized = scores[i] / 2.0;
        }
        c.reward = rewards[i];
        set.candidates.push_back(std::move(c));
    }
    return set;
}

void set_used_score(CandidateSet& set, const ObjectiveConfig& cfg, size_t i, double v) {
    if (objective_uses_length_norm(cfg)) {
        set.candidates[i].score.normalized = v;
        set.candidates[i].score.total_logprob = v * 2.0;
    } else {
        set.candidates[i].score.total_logprob = v;
        set.candidates[i].score.normalized = v / 2.0;
    }
}

double used_score(const CandidateSet& set, const ObjectiveConfig& cfg, size_t i) {
    return set.candidates[i].score.value(objective_uses_length_norm(cfg));
}

double fd_weight_error(const CandidateSet& base, const ObjectiveConfig& cfg) {
    ObjectiveOutput out = compute_objective(base, cfg);
    const double eps = 1e-6;
    double worst = 0.0;
    for (size_t i = 0; i < base.candidates.size(); ++i) {
        CandidateSet hi = base, lo = base;
        double s = used_score(base, cfg, i);
        set_used_score(hi, cfg, i, s + eps);
        set_used_score(lo, cfg, i, s - eps);
        double fd = (compute_objective(hi, cfg).loss - compute_objective(lo, cfg).loss) / (2 * eps);
        double analytic = 0.0;
        for (const auto& [idx, w] : out.weights)
            if (idx == i) analytic = w;
        worst = std::max(worst, std::abs(fd - analytic));
    }
    return worst;
}

bool near_kink(const CandidateSet& set, const ObjectiveConfig& cfg) {
    size_t best = reward_argmax(set, cfg);
    double s_best = used_score(set, cfg, best), r_best = *set.candidates[best].reward;
    for (size_t i = 0; i < set.candidates.size(); ++i) {
        if (i == best) continue;
        double term =
            cfg.alpha * (r_best - *set.candidates[i].reward) - s_best + used_score(set, cfg, i);
        if (std::abs(term) < 1e-3) return true;
    }
    return false;
}

// ---- shared end-to-end artifacts ------------------------------------------

// Documented master seed for the end-to-end criteria; every stream below is
// derived from it exactly like the CLI does.
constexpr uint64_t kPipelineSeed = 5;

struct PipelineState {
    Corpus corpus;
    ModelParams baseline;
    bool ready = false;
    // observer captures from the smoothed-BLEU fine-tuning run (tie-rate check)
    std::map<int64_t, std::pair<int64_t, int64_t>> tie_window;  // iter -> (sets, ties)
    std::vector<TrainLogRecord> sbleu_log;
    bool sbleu_run_done = false;
};

PipelineState g_pipe;

TrainConfig pipeline_train_config() {
    TrainConfig cfg;  // documented defaults: lr 1e-4, N 10, eval_every 20, ...
    cfg.seed = derive_seed(kPipelineSeed, "train");
    return cfg;
}

void ensure_pipeline() {
    if (g_pipe.ready) return;
    TaskSpec spec;  // lexicon, vocab 50, noise 0.1/0.1, 2000 pairs
    spec.seed = derive_seed(kPipelineSeed, "data");
    g_pipe.corpus = generate_corpus(spec);
    TrainConfig cfg = pipeline_train_config();
    ModelDims dims{g_pipe.corpus.vocab_size, 32, 32};
    g_pipe.baseline = pretrain_nll(g_pipe.corpus, dims, 3000, cfg).params;
    g_pipe.ready = true;
}

// ---- criterion 11 helpers --------------------------------------------------

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

bool run_cli_pipeline(const fs::path& dir, const fs::path& log, std::string& detail) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string base = std::string(SRWD_BIN) + " --out " + dir.string() +
                       " --seed 5 --threads 1 --kernels scalar" +
                       " --set data.corpus_size=200 --set data.vocab_size=20" +
                       " --set data.min_len=2 --set data.max_len=6" +
                       " --set model.emb_dim=8 --set model.hidden_dim=8" +
                       " --set train.pretrain_iters=80 --set train.finetune_iters=30" +
                       " --set train.eval_every=10 --set train.n=4 --set train.beam_width=4" +
                       " --set train.topk=4 --set train.valid_subset=20" +
                       " --set train.checkpoint_every=40 --set train.average_last=2" +
                       " --set reward.kind=learned --set reward.metric_examples=200" +
                       " --set analysis.samples=60 --set analysis.k=4 ";
    std::string redirect = " >> " + log.string() + " 2>&1";
    std::vector<std::string> steps = {
        "gen-data",
        "pretrain",
        "finetune",
        "evaluate --model " + (dir / "baseline.ckpt").string(),
    };
    for (const auto& s : steps)
        if (shell(base + s + redirect) != 0) {
            detail = "CLI step failed: " + s;
            return false;
        }
    fs::rename(dir / "decodes.txt", dir / "decodes_baseline.txt");
    fs::rename(dir / "eval.csv", dir / "eval_baseline.csv");
    std::vector<std::string> rest = {
        "evaluate --compare " + (dir / "baseline.ckpt").string(),
        "correlate",
        "histogram",
        "diverge --baseline-hyp " + (dir / "decodes_baseline.txt").string() + " --tuned-hyp " +
            (dir / "decodes.txt").string() + " --refs " + (dir / "corpus.test.tgt").string(),
    };
    for (const auto& s : rest)
        if (shell(base + s + redirect) != 0) {
            detail = "CLI step failed: " + s;
            return false;
        }
    return true;
}

std::map<std::string, std::string> slurp_tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream f(e.path(), std::ios::binary);
        std::ostringstream body;
        body << f.rdbuf();
        files[fs::relative(e.path(), dir).string()] = body.str();
    }
    return files;
}

}  // namespace

// ---- criteria ---------------------------------------------------------------

static bool criterion_gradients(std::string& detail) {
    Rng rng(1001);
    int bad = 0, checked = 0;
    for (int rep = 0; rep < 20; ++rep) {
        int32_t vocab = 5 + int32_t(rng.next_below(3));
        int32_t E = 2 + int32_t(rng.next_below(2));
        int32_t H = 2 + int32_t(rng.next_below(2));
        ModelParams params = init_params(vocab, E, H, 2000 + uint64_t(rep));
        bool ln = rep % 2 == 0;
        std::vector<WeightedItem> items;
        size_t n_items = 1 + rng.next_below(2);
        for (size_t k = 0; k < n_items; ++k) {
            WeightedItem it;
            it.source = random_payload(rng, vocab, 1, 3);
            it.target = random_payload(rng, vocab, 1, 3);
            it.weight = rng.uniform(-1.0, 1.0);
            items.push_back(std::move(it));
        }
        auto [loss, grads] = weighted_nll_backward(params, items, ln);
        (void)loss;
        auto tensors = params.tensors();
        auto bufs = grads.buffers();
        for (size_t ti = 0; ti < tensors.size(); ++ti) {
            auto& data = *tensors[ti].data;
            const auto& g = *bufs[ti].second;
            for (size_t i = 0; i < data.size(); ++i) {
                double fd = oracles::central_difference(
                    params, data, i, 1e-4,
                    [&](ModelParams& p) { return weighted_value(p, items, ln); });
                double analytic = g[i];
                ++checked;
                if (std::abs(analytic) <= 1e-8 && std::abs(fd) <= 1e-6) continue;
                if (std::abs(analytic - fd) / std::max(std::abs(fd), 1e-8) > 1e-3) ++bad;
            }
        }
    }
    detail = std::to_string(checked) + " coordinates, " + std::to_string(bad) + " over tolerance";
    return bad == 0;
}

static bool criterion_objective_weights(std::string& detail) {
    const ObjectiveKind kinds[] = {ObjectiveKind::pg,           ObjectiveKind::risk,
                                   ObjectiveKind::distill,      ObjectiveKind::multi_margin,
                                   ObjectiveKind::max_margin,   ObjectiveKind::contrastive_margin};
    Rng rng(1002);
    double worst = 0.0;
    for (ObjectiveKind k : kinds) {
        int done = 0;
        while (done < 100) {
            size_t n = 1 + rng.next_below(8);
            std::vector<double> s(n), r(n);
            for (auto& v : s) v = rng.uniform(-6.0, -0.1);
            for (auto& v : r) v = rng.next_double();
            ObjectiveConfig cfg;
            cfg.kind = k;
            cfg.alpha = 0.1 + rng.next_double();
            cfg.length_norm_scores = rng.next_below(2) == 0;
            CandidateSet set = make_set(s, r, objective_uses_length_norm(cfg));
            if ((k == ObjectiveKind::multi_margin || k == ObjectiveKind::max_margin ||
                 k == ObjectiveKind::contrastive_margin) &&
                near_kink(set, cfg))
                continue;
            worst = std::max(worst, fd_weight_error(set, cfg));
            ++done;
        }
    }
    std::ostringstream d;
    d << "max |analytic - fd| = " << worst;
    detail = d.str();
    return worst <= 1e-6;
}

static bool criterion_contrastive_degeneracies(std::string& detail) {
    ObjectiveConfig cfg;
    cfg.kind = ObjectiveKind::contrastive_margin;
    cfg.alpha = 1.0;
    cfg.length_norm_scores = true;

    auto single = compute_objective(make_set({-2.0}, {0.5}, true), cfg);
    bool ok = single.loss == 0.0 && single.weights.empty();

    auto tied = compute_objective(make_set({-1.0, -2.0, -0.5}, {0.4, 0.4, 0.4}, true), cfg);
    ok = ok && tied.weights.empty();

    auto quiet = compute_objective(make_set({-1.0, -3.0}, {0.8, 0.2}, true), cfg);
    ok = ok && quiet.loss == 0.0 && quiet.weights.empty();

    auto hot = compute_objective(make_set({-2.0, -1.9}, {0.8, 0.2}, true), cfg);
    ok = ok && std::abs(hot.loss - 0.7) < 1e-12 && hot.weights.size() == 2;

    std::ostringstream d;
    d << "N=1 loss " << single.loss << ", tied weights " << tied.weights.size() << ", anchors L="
      << quiet.loss << " and L=" << hot.loss;
    detail = d.str();
    return ok;
}

static bool criterion_beam_oracle(std::string& detail) {
    Rng rng(1003);
    int models = 0, mismatches = 0;
    while (models < 50) {
        int32_t vocab = 5 + int32_t(rng.next_below(2));  // 5 or 6 (payload 1-2 symbols)
        int max_len = 3 + int(rng.next_below(3));        // 3..5
        bool ln = rng.next_below(2) == 0;
        ModelParams params = init_params(vocab, 2 + int32_t(rng.next_below(2)),
                                         2 + int32_t(rng.next_below(2)), 3000 + uint64_t(models));
        TokenSeq source = random_payload(rng, vocab, 1, 3);
        auto all = oracles::enumerate_candidates(params, source, max_len, ln);

        DecodeConfig dcfg;
        dcfg.beam_width = int32_t(all.size()) + 8;  // saturating: nothing pruned
        dcfg.n_best = int32_t(all.size());
        dcfg.length_norm = ln;
        dcfg.max_len_override = max_len;
        CandidateSet got = beam_search(params, source, dcfg);
        if (got.candidates.size() != all.size()) {
            ++mismatches;
        } else {
            for (size_t i = 0; i < all.size(); ++i)
                if (got.candidates[i].tokens != all[i].tokens ||
                    got.candidates[i].score.total_logprob != all[i].score.total_logprob) {
                    ++mismatches;
                    break;
                }
        }
        ++models;
    }
    detail = std::to_string(models) + " models, " + std::to_string(mismatches) + " mismatches";
    return mismatches == 0;
}

static bool criterion_reward_oracles(std::string& detail) {
    TokenSeq ref = {4, 5, 6, 7};
    bool ok = smoothed_bleu(ref, ref) == 1.0;
    ok = ok && smoothed_bleu(TokenSeq{}, ref) == 0.0;
    double expect = std::pow(0.75 * 0.75 * (2.0 / 3.0) * 0.5, 0.25);
    double got = smoothed_bleu(TokenSeq{4, 5, 6, 7}, TokenSeq{4, 5, 6, 8});
    ok = ok && std::abs(got - expect) < 1e-3 && std::abs(expect - 0.658) < 2e-3;

    Rng rng(1004);
    int violations = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        TokenSeq a = random_payload(rng, 9, 0, 6);
        TokenSeq b = random_payload(rng, 9, 0, 6);
        TokenSeq c = random_payload(rng, 9, 0, 6);
        int64_t ab = token_edit_distance(a, b);
        if (ab != token_edit_distance(b, a)) ++violations;
        if ((ab == 0) != (a == b)) ++violations;
        if (ab > token_edit_distance(a, c) + token_edit_distance(c, b)) ++violations;
        if (ab != oracles::edit_distance_matrix(a, b)) ++violations;
    }
    std::ostringstream d;
    d << "anchor " << got << " vs " << expect << ", " << violations << " axiom violations";
    detail = d.str();
    return ok && violations == 0;
}

static bool criterion_kendall(std::string& detail) {
    Rng rng(1005);
    int mismatches = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        size_t n = 2 + rng.next_below(12);
        auto draw = [&](int levels) {
            std::vector<double> v(n);
            for (auto& x : v) x = double(rng.next_below(uint64_t(levels)));
            return v;
        };
        auto xs = draw(1 + int(rng.next_below(6)));
        auto ys = draw(1 + int(rng.next_below(6)));
        auto got = kendall_tau(xs, ys);
        auto expect = oracles::kendall_tau_pairwise(xs, ys);
        if (got.has_value() != expect.has_value()) ++mismatches;
        else if (got && *got != *expect) ++mismatches;
    }
    detail = "1000 lists, " + std::to_string(mismatches) + " mismatches";
    return mismatches == 0;
}

static bool criterion_sbleu_gain(std::string& detail) {
    ensure_pipeline();
    SmoothedBleuReward reward;
    ObjectiveConfig obj;
    obj.kind = ObjectiveKind::contrastive_margin;
    obj.alpha = 0.3;
    TrainConfig cfg = pipeline_train_config();

    auto observer = [&](int64_t iter, const CandidateSet& set) {
        auto& [sets, ties] = g_pipe.tie_window[iter];
        ++sets;
        double mn = *set.candidates[0].reward, mx = mn;
        for (const auto& c : set.candidates) {
            mn = std::min(mn, *c.reward);
            mx = std::max(mx, *c.reward);
        }
        if (mn == mx) ++ties;
    };
    FinetuneResult r =
        finetune_reward(g_pipe.baseline, g_pipe.corpus, reward, obj, cfg, nullptr, observer);
    g_pipe.sbleu_log = r.log;
    g_pipe.sbleu_run_done = true;

    double base = r.log.front().best_response;
    double best = base;
    for (const auto& rec : r.log) best = std::max(best, rec.best_response);
    double gain_points = (best - base) * 100.0;
    std::ostringstream d;
    d << "seed " << kPipelineSeed << ": validation SBLEU " << base * 100.0 << " -> " << best * 100.0
      << " (+" << gain_points << " points, best iter " << r.best_iter << ")";
    detail = d.str();
    return gain_points >= 1.0;
}

static bool criterion_learned_metric_gain(std::string& detail) {
    ensure_pipeline();
    auto examples = make_metric_training_set(g_pipe.corpus, 2000, derive_seed(kPipelineSeed, "metric"));
    LearnedMetricReward reward(train_learned_metric(examples));
    SmoothedBleuReward aux;
    ObjectiveConfig obj;
    obj.kind = ObjectiveKind::contrastive_margin;
    obj.alpha = 0.1;
    TrainConfig cfg = pipeline_train_config();

    FinetuneResult r = finetune_reward(g_pipe.baseline, g_pipe.corpus, reward, obj, cfg, &aux);
    double base = r.log.front().best_response;
    double best = base;
    size_t best_idx = 0;
    for (size_t i = 0; i < r.log.size(); ++i)
        if (r.log[i].best_response > best) {
            best = r.log[i].best_response;
            best_idx = i;
        }
    double rel = (best - base) / std::abs(base);
    bool trajectory = r.aux_log.size() == r.log.size();
    std::ostringstream d;
    d << "learned metric " << base << " -> " << best << " (" << rel * 100.0
      << "% relative); SBLEU trajectory " << r.aux_log.front().second << " -> "
      << r.aux_log[best_idx].second << " at the selected point (reported, not asserted)";
    detail = d.str();
    return rel >= 0.05 && trajectory;
}

static bool criterion_tie_rate(std::string& detail) {
    if (!g_pipe.sbleu_run_done) {
        detail = "smoothed-BLEU fine-tuning run unavailable";
        return false;
    }
    const auto& log = g_pipe.sbleu_log;
    int mismatches = 0;
    for (size_t k = 1; k < log.size(); ++k) {
        int64_t lo = log[k - 1].iter, hi = log[k].iter;
        int64_t sets = 0, ties = 0;
        for (const auto& [iter, counts] : g_pipe.tie_window)
            if (iter > lo && iter <= hi) {
                sets += counts.first;
                ties += counts.second;
            }
        if (sets == 0 || log[k].tie_rate != double(ties) / double(sets)) ++mismatches;
    }
    // a fully tied candidate set exercises the zero-gradient path
    ObjectiveConfig obj;
    obj.kind = ObjectiveKind::contrastive_margin;
    obj.alpha = 0.3;
    auto tied = compute_objective(make_set({-1.0, -2.0, -3.0}, {0.5, 0.5, 0.5}), obj);
    bool zero_grad = tied.weights.empty() && !tied.active;
    detail = std::to_string(log.size() - 1) + " windows, " + std::to_string(mismatches) +
             " mismatches; fully tied set yields " + std::to_string(tied.weights.size()) +
             " weights";
    return mismatches == 0 && zero_grad;
}

static bool criterion_divergence(std::string& detail) {
    // metric that rises exactly when unigram overlap falls: makes a guaranteed
    // qualifying record without depending on any trained model
    LearnedMetricParams neg;
    neg.w = {-1.0, 0.0, 0.0, 0.0, 0.0};
    neg.b = 1.0;
    LearnedMetricReward metric(neg);
    DivergenceThresholds th;  // 0.3 / 0.03 defaults

    std::vector<TokenSeq> refs = {
        {4, 5, 6, 7}, {4, 5, 6, 7}, {4, 5, 6, 7, 8}, {8, 9, 10, 11}};
    std::vector<TokenSeq> base = {
        {4, 5, 6, 7},    // perfect decode
        {4, 5, 6, 7},    // perfect decode, stays perfect
        {4, 5, 6, 7, 8}, // perfect, tuned reorders (sbleu drop, metric flat)
        {8, 9, 10, 11}};
    std::vector<TokenSeq> tuned = {
        {12, 13, 14},    // qualifies: metric +1, sbleu -1
        {4, 5, 6, 7},    // no change
        {8, 4, 5, 6, 7}, // sbleu drops, unigram overlap unchanged -> metric flat
        {8, 9, 10, 12}}; // metric rises a little, below threshold

    auto records = mine_divergence(base, tuned, refs, metric, th);
    int bad = 0;
    std::vector<bool> emitted(refs.size(), false);
    for (const auto& r : records) {
        emitted[r.sentence_id] = true;
        double dm = metric.evaluate(r.tuned_hyp, refs[r.sentence_id]) -
                    metric.evaluate(r.baseline_hyp, refs[r.sentence_id]);
        double db = smoothed_bleu(r.tuned_hyp, refs[r.sentence_id]) -
                    smoothed_bleu(r.baseline_hyp, refs[r.sentence_id]);
        if (!(dm >= th.metric_up && db <= -th.sbleu_down)) ++bad;
        if (r.delta_metric != dm || r.delta_sbleu != db) ++bad;
    }
    for (size_t i = 0; i < refs.size(); ++i) {
        if (emitted[i]) continue;
        double dm = metric.evaluate(tuned[i], refs[i]) - metric.evaluate(base[i], refs[i]);
        double db = smoothed_bleu(tuned[i], refs[i]) - smoothed_bleu(base[i], refs[i]);
        if (dm >= th.metric_up && db <= -th.sbleu_down) ++bad;
    }
    // random fuzz with the same iff + rescoring contract
    Rng rng(1006);
    std::vector<TokenSeq> frefs, fbase, ftuned;
    for (int i = 0; i < 300; ++i) {
        frefs.push_back(random_payload(rng, 12, 3, 8));
        fbase.push_back(random_payload(rng, 12, 1, 8));
        ftuned.push_back(random_payload(rng, 12, 1, 8));
    }
    auto frecords = mine_divergence(fbase, ftuned, frefs, metric, th);
    std::vector<bool> femitted(frefs.size(), false);
    for (const auto& r : frecords) femitted[r.sentence_id] = true;
    for (size_t i = 0; i < frefs.size(); ++i) {
        double dm = metric.evaluate(ftuned[i], frefs[i]) - metric.evaluate(fbase[i], frefs[i]);
        double db = smoothed_bleu(ftuned[i], frefs[i]) - smoothed_bleu(fbase[i], frefs[i]);
        if (femitted[i] != (dm >= th.metric_up && db <= -th.sbleu_down)) ++bad;
    }
    detail = std::to_string(records.size()) + " constructed + " + std::to_string(frecords.size()) +
             " fuzzed records, " + std::to_string(bad) + " contract violations";
    return !records.empty() && bad == 0;
}

static bool criterion_reproducibility(std::string& detail) {
    fs::path root = fs::temp_directory_path() / "srwd_accept_pipeline";
    fs::remove_all(root);
    fs::create_directories(root);
    fs::path log1 = root / "run1.log", log2 = root / "run2.log";
    { std::ofstream(log1.string()); std::ofstream(log2.string()); }
    if (!run_cli_pipeline(root / "run1", log1, detail)) return false;
    if (!run_cli_pipeline(root / "run2", log2, detail)) return false;

    auto a = slurp_tree(root / "run1");
    auto b = slurp_tree(root / "run2");
    if (a.size() != b.size() || a.empty()) {
        detail = "artifact sets differ: " + std::to_string(a.size()) + " vs " +
                 std::to_string(b.size());
        return false;
    }
    int differing = 0;
    for (const auto& [name, body] : a) {
        auto it = b.find(name);
        if (it == b.end() || it->second != body) ++differing;
    }
    detail = std::to_string(a.size()) + " artifacts compared, " + std::to_string(differing) +
             " differ";
    fs::remove_all(root);
    return differing == 0;
}

int main() {
    std::cout << "acceptance suite (seed " << kPipelineSeed << " for the end-to-end runs)\n";
    run(1, "gradient exactness vs central finite differences", criterion_gradients);
    run(2, "objective weights match finite-difference dL/ds", criterion_objective_weights);
    run(3, "contrastive-margin degeneracies and hand anchors", criterion_contrastive_degeneracies);
    run(4, "saturated beam equals exhaustive enumeration", criterion_beam_oracle);
    run(5, "smoothed BLEU anchors and edit-distance axioms", criterion_reward_oracles);
    run(6, "Kendall tau-b equals the pair-counting oracle", criterion_kendall);
    run(7, "end-to-end SBLEU gain from contrastive fine-tuning", criterion_sbleu_gain);
    run(8, "learned-metric fine-tuning relative gain", criterion_learned_metric_gain);
    run(9, "tie-rate log matches brute-force recomputation", criterion_tie_rate);
    run(10, "divergence miner emits exactly the qualifying records", criterion_divergence);
    run(11, "same-seed pipelines are byte-identical", criterion_reproducibility);

    if (g_failures == 0) {
        std::cout << "all 11 criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criteria failed\n";
    return 1;
}
