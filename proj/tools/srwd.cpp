// Command-line entry point wiring all modules into reproducible experiments.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "srwd/analysis.hpp"
#include "srwd/checkpoint.hpp"
#include "srwd/config.hpp"
#include "srwd/kernels.hpp"
#include "srwd/parallel.hpp"
#include "srwd/trainer.hpp"

namespace fs = std::filesystem;
using namespace srwd;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    bool overwrite = false;
    std::vector<std::string> overrides;
    std::string kernels = "auto";
};

RunConfig resolve_config(const GlobalArgs& g) {
    KvMap kv;
    if (!g.config_path.empty()) kv = load_config_file(g.config_path);
    for (const auto& ov : g.overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + ov + "'");
        for (auto& [k, v] : parse_config_text(ov)) kv[k] = v;
    }
    RunConfig cfg = RunConfig::from_map(kv);
    if (g.seed_given) cfg.seed = g.seed;
    // per-module derived seeds, all flowing from the master seed
    cfg.data.seed = derive_seed(cfg.seed, "data");
    cfg.train.seed = derive_seed(cfg.seed, "train");
    return cfg;
}

void refuse_existing(const std::vector<std::string>& paths, bool overwrite) {
    if (overwrite) return;
    for (const auto& p : paths)
        if (fs::exists(p))
            throw IoError("output already exists: " + p + " (pass --overwrite to replace)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << text;
}

Corpus load_corpus(const GlobalArgs& g, const RunConfig& cfg) {
    return read_corpus(g.out_dir, cfg.data_name, cfg.data.vocab_size);
}

LearnedMetricParams ensure_metric(const GlobalArgs& g, const RunConfig& cfg) {
    std::string path = g.out_dir + "/metric.ckpt";
    if (!fs::exists(path)) {
        Corpus corpus = load_corpus(g, cfg);
        auto examples = make_metric_training_set(corpus, size_t(cfg.metric_examples),
                                                 derive_seed(cfg.seed, "metric"));
        LearnedMetricParams params = train_learned_metric(examples);
        if (params.ridge_fallback)
            std::cerr << "warning: learned-metric fit fell back to ridge 1e-3\n";
        save_learned_metric(params, path);
    }
    // always score with the round-tripped f32 weights
    return load_learned_metric(path);
}

std::unique_ptr<RewardFunction> make_reward(const GlobalArgs& g, const RunConfig& cfg) {
    switch (cfg.reward) {
        case RewardKind::sbleu: return std::make_unique<SmoothedBleuReward>();
        case RewardKind::edit_sim: return std::make_unique<EditSimilarityReward>();
        case RewardKind::learned:
            return std::make_unique<LearnedMetricReward>(ensure_metric(g, cfg));
    }
    throw ConfigError("reward.kind: invalid value");
}

int cmd_gen_data(const GlobalArgs& g, const RunConfig& cfg) {
    fs::create_directories(g.out_dir);
    std::string stats_path = g.out_dir + "/stats.csv";
    refuse_existing({stats_path, g.out_dir + "/" + cfg.data_name + ".train.src"}, g.overwrite);
    Corpus corpus = generate_corpus(cfg.data);
    write_corpus(corpus, g.out_dir, cfg.data_name);
    write_text(stats_path, corpus_stats(corpus).to_csv());
    std::cout << "wrote " << corpus.pairs.size() << " pairs to " << g.out_dir << "/"
              << cfg.data_name << ".{train,valid,test}.{src,tgt}\n";
    return 0;
}

int cmd_pretrain(const GlobalArgs& g, const RunConfig& cfg) {
    std::string ckpt_path = g.out_dir + "/baseline.ckpt";
    refuse_existing({ckpt_path}, g.overwrite);
    Corpus corpus = load_corpus(g, cfg);
    ModelDims dims{cfg.data.vocab_size, cfg.emb_dim, cfg.hidden_dim};
    PretrainResult result = pretrain_nll(corpus, dims, cfg.pretrain_iters, cfg.train);
    save_checkpoint(result.params, ckpt_path);
    std::cout << "pretrained " << cfg.pretrain_iters << " iters, mean NLL "
              << result.initial_nll << " -> " << result.final_nll << "; saved " << ckpt_path
              << "\n";
    return 0;
}

int cmd_finetune(const GlobalArgs& g, const RunConfig& cfg, const std::string& baseline_path) {
    std::string log_path = g.out_dir + "/train_log.jsonl";
    std::string best_path = g.out_dir + "/best.ckpt";
    refuse_existing({log_path, best_path}, g.overwrite);

    ModelParams baseline =
        load_checkpoint(baseline_path.empty() ? g.out_dir + "/baseline.ckpt" : baseline_path);
    Corpus corpus = load_corpus(g, cfg);
    auto reward = make_reward(g, cfg);
    std::unique_ptr<RewardFunction> aux;
    if (cfg.reward != RewardKind::sbleu) aux = std::make_unique<SmoothedBleuReward>();

    FinetuneResult result = finetune_reward(baseline, corpus, *reward, cfg.objective_config(),
                                            cfg.train, aux.get());
    write_text(log_path, train_log_jsonl(result.log));
    for (const auto& [iter, ckpt] : result.checkpoints)
        save_checkpoint(ckpt, g.out_dir + "/ckpt_" + std::to_string(iter));
    save_checkpoint(result.best_params, best_path);
    if (aux) {
        std::string text;
        for (const auto& [iter, value] : result.aux_log) {
            nlohmann::ordered_json j;
            j["iter"] = iter;
            j["best_response"] = value;
            text += j.dump() + "\n";
        }
        write_text(g.out_dir + "/aux_reward.jsonl", text);
    }
    std::cout << "finetuned " << cfg.train.max_iters << " iters with "
              << objective_kind_name(cfg.objective) << " + " << reward->name()
              << "; best checkpoint at iter " << result.best_iter << " (best-response "
              << result.log.front().best_response << " -> "
              << [&] {
                     double best = result.log.front().best_response;
                     for (const auto& r : result.log) best = std::max(best, r.best_response);
                     return best;
                 }()
              << "); saved " << best_path << "\n";
    return 0;
}

int cmd_evaluate(const GlobalArgs& g, const RunConfig& cfg, const std::string& model_path,
                 const std::string& compare_path) {
    std::string eval_path = g.out_dir + "/eval.csv";
    std::string decodes_path = g.out_dir + "/decodes.txt";
    refuse_existing({eval_path, decodes_path}, g.overwrite);

    ModelParams params = load_checkpoint(model_path.empty() ? g.out_dir + "/best.ckpt" : model_path);
    Corpus corpus = load_corpus(g, cfg);
    auto test = corpus.split_pairs(Split::test);

    SmoothedBleuReward sbleu;
    EditSimilarityReward edit;
    LearnedMetricReward learned(ensure_metric(g, cfg));
    std::vector<const RewardFunction*> metrics = {&sbleu, &edit, &learned};

    ModelParams other;
    const ModelParams* other_ptr = nullptr;
    if (!compare_path.empty()) {
        other = load_checkpoint(compare_path);
        other_ptr = &other;
    }
    EvalReport report =
        evaluate_model(params, test, metrics, cfg.beam_width, other_ptr, g.threads);
    write_text(eval_path, report.to_csv());
    write_token_file(decodes_path, decode_corpus(params, test, cfg.beam_width, g.threads));
    std::cout << report.to_csv();
    return 0;
}

int cmd_correlate(const GlobalArgs& g, const RunConfig& cfg, const std::string& model_path) {
    std::string out_path = g.out_dir + "/correlation.csv";
    refuse_existing({out_path}, g.overwrite);
    ModelParams params =
        load_checkpoint(model_path.empty() ? g.out_dir + "/baseline.ckpt" : model_path);
    Corpus corpus = load_corpus(g, cfg);
    auto test = corpus.split_pairs(Split::test);

    SmoothedBleuReward sbleu;
    EditSimilarityReward edit;
    LearnedMetricReward learned(ensure_metric(g, cfg));

    CorrelationConfig ccfg;
    ccfg.k_best = cfg.analysis_k;
    ccfg.samples = size_t(cfg.analysis_samples);
    ccfg.seed = derive_seed(cfg.seed, "correlate");
    ccfg.beam_width = cfg.beam_width;
    ccfg.threads = g.threads;
    CorrelationMatrix m = correlation_matrix(params, test, {&sbleu, &edit, &learned}, ccfg);
    write_text(out_path, m.to_csv());
    std::cout << m.to_csv();
    return 0;
}

int cmd_diverge(const GlobalArgs& g, const RunConfig& cfg, const std::string& baseline_hyp,
                const std::string& tuned_hyp, const std::string& refs) {
    std::string out_path = g.out_dir + "/divergence.tsv";
    refuse_existing({out_path}, g.overwrite);
    LearnedMetricReward learned(ensure_metric(g, cfg));
    DivergenceThresholds thresholds{cfg.threshold_up, cfg.threshold_down};
    auto records = mine_divergence(read_token_file(baseline_hyp), read_token_file(tuned_hyp),
                                   read_token_file(refs), learned, thresholds);
    write_text(out_path, divergence_tsv(records));
    std::cout << records.size() << " divergence records -> " << out_path << "\n";
    return 0;
}

int cmd_histogram(const GlobalArgs& g, const RunConfig& cfg, const std::string& model_path) {
    std::string out_path = g.out_dir + "/histogram.csv";
    refuse_existing({out_path}, g.overwrite);
    ModelParams params =
        load_checkpoint(model_path.empty() ? g.out_dir + "/baseline.ckpt" : model_path);
    Corpus corpus = load_corpus(g, cfg);
    auto test = corpus.split_pairs(Split::test);
    auto reward = make_reward(g, cfg);

    ParamsF64 view(params);
    DecodeConfig dcfg;
    dcfg.beam_width = cfg.beam_width;
    dcfg.n_best = cfg.beam_width;
    std::vector<std::vector<double>> per_sentence(test.size());
    parallel_for(test.size(), g.threads, [&](size_t i) {
        CandidateSet set = beam_search(view, test[i]->source, dcfg);
        for (const auto& c : set.candidates)
            per_sentence[i].push_back(reward->evaluate(c.tokens, test[i]->reference));
    });
    std::vector<double> scores;
    for (const auto& v : per_sentence) scores.insert(scores.end(), v.begin(), v.end());
    Histogram h = reward_histogram(scores, cfg.bin_width);
    write_text(out_path, h.to_csv());
    std::cout << "histogram over " << scores.size() << " " << reward->name()
              << " scores: mean " << h.mean << ", std " << h.stddev << " -> " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-optimization toolkit for tiny encoder-decoder translation models"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--config", g.config_path, "config file (key = value lines)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "master seed (overrides config)")
        ->each([&](const std::string&) { g.seed_given = true; });
    app.add_option("--threads", g.threads, "worker threads; 1 is bit-reproducible")
        ->capture_default_str();
    app.add_flag("--overwrite", g.overwrite, "replace existing outputs");
    app.add_option("--set", g.overrides, "override a config key, e.g. --set objective.alpha=0.1");
    app.add_option("--kernels", g.kernels, "simd backend: auto|scalar|avx2")
        ->capture_default_str();

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic parallel corpus");
    auto* pre = app.add_subcommand("pretrain", "NLL-pretrain the baseline model");
    auto* fin = app.add_subcommand("finetune", "reward fine-tuning from the baseline");
    auto* eva = app.add_subcommand("evaluate", "score top-1 decodes on the test split");
    auto* cor = app.add_subcommand("correlate", "Kendall tau agreement between metrics");
    auto* div = app.add_subcommand("diverge", "mine metric/SBLEU divergent hypotheses");
    auto* his = app.add_subcommand("histogram", "reward histogram over beam candidates");

    std::string baseline_path, model_path, compare_path;
    std::string hyp_a, hyp_b, refs;
    fin->add_option("--baseline", baseline_path, "baseline checkpoint (default <out>/baseline.ckpt)");
    eva->add_option("--model", model_path, "checkpoint to evaluate (default <out>/best.ckpt)");
    eva->add_option("--compare", compare_path, "second checkpoint for the edit-distance column");
    cor->add_option("--model", model_path, "checkpoint to decode with (default <out>/baseline.ckpt)");
    his->add_option("--model", model_path, "checkpoint to decode with (default <out>/baseline.ckpt)");
    div->add_option("--baseline-hyp", hyp_a, "baseline hypotheses file")->required();
    div->add_option("--tuned-hyp", hyp_b, "tuned hypotheses file")->required();
    div->add_option("--refs", refs, "references file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (g.kernels == "scalar") kernels::set_backend(kernels::Backend::scalar);
        else if (g.kernels == "avx2") kernels::set_backend(kernels::Backend::avx2);
        else if (g.kernels == "auto") kernels::set_backend(kernels::Backend::auto_detect);
        else throw ConfigError("--kernels: expected auto|scalar|avx2");

        RunConfig cfg = resolve_config(g);
        if (gen->parsed()) return cmd_gen_data(g, cfg);
        if (pre->parsed()) return cmd_pretrain(g, cfg);
        if (fin->parsed()) return cmd_finetune(g, cfg, baseline_path);
        if (eva->parsed()) return cmd_evaluate(g, cfg, model_path, compare_path);
        if (cor->parsed()) return cmd_correlate(g, cfg, model_path);
        if (div->parsed()) return cmd_diverge(g, cfg, hyp_a, hyp_b, refs);
        if (his->parsed()) return cmd_histogram(g, cfg, model_path);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
