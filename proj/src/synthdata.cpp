#include "srwd/synthdata.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace srwd {

TaskKind parse_task_kind(const std::string& s) {
    if (s == "copy") return TaskKind::copy;
    if (s == "reverse") return TaskKind::reverse;
    if (s == "lexicon") return TaskKind::lexicon;
    throw ConfigError("task_kind: unknown task '" + s + "' (expected copy|reverse|lexicon)");
}

std::string task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::copy: return "copy";
        case TaskKind::reverse: return "reverse";
        case TaskKind::lexicon: return "lexicon";
    }
    return "?";
}

void TaskSpec::validate() const {
    if (vocab_size <= kFirstPayloadId)
        throw ConfigError("vocab_size: must exceed the reserved-id range (>= 5)");
    if (min_len < 1) throw ConfigError("min_len: must be positive");
    if (max_len < min_len) throw ConfigError("max_len: must be >= min_len");
    if (noise_drop < 0.0 || noise_drop > 1.0) throw ConfigError("noise_drop: must be in [0,1]");
    if (noise_swap < 0.0 || noise_swap > 1.0) throw ConfigError("noise_swap: must be in [0,1]");
    if (corpus_size < 1) throw ConfigError("corpus_size: must be positive");
}

std::vector<const SequencePair*> Corpus::split_pairs(Split s) const {
    std::vector<const SequencePair*> out;
    for (size_t i = 0; i < pairs.size(); ++i)
        if (splits[i] == s) out.push_back(&pairs[i]);
    return out;
}

std::vector<TokenId> lexicon_permutation(int32_t vocab_size, uint64_t seed) {
    // Fisher-Yates over payload ids; reserved ids map to themselves.
    std::vector<TokenId> perm(vocab_size);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, "lexicon_permutation"));
    for (int32_t i = vocab_size - 1; i > kFirstPayloadId; --i) {
        int32_t j = kFirstPayloadId + int32_t(rng.next_below(uint64_t(i - kFirstPayloadId + 1)));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

namespace {

Split split_of_index(size_t index) {
    // 90/5/5 by deterministic hash of the pair index, independent of the seed.
    Rng h(uint64_t(index) * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    uint64_t bucket = h.next_below(100);
    if (bucket < 90) return Split::train;
    if (bucket < 95) return Split::valid;
    return Split::test;
}

TokenSeq corrupt(const TokenSeq& ref, double noise_drop, double noise_swap, Rng& rng) {
    TokenSeq out;
    out.reserve(ref.size());
    for (TokenId t : ref) {
        if (noise_drop > 0.0 && rng.next_double() < noise_drop) continue;
        out.push_back(t);
    }
    if (out.empty()) out.push_back(ref.front());
    if (noise_swap > 0.0) {
        for (size_t i = 0; i + 1 < out.size(); ++i)
            if (rng.next_double() < noise_swap) std::swap(out[i], out[i + 1]);
    }
    return out;
}

}  // namespace

Corpus generate_corpus(const TaskSpec& spec) {
    spec.validate();
    Corpus corpus;
    corpus.vocab_size = spec.vocab_size;
    corpus.pairs.reserve(spec.corpus_size);
    corpus.splits.reserve(spec.corpus_size);

    const int32_t payload_vocab = spec.vocab_size - kFirstPayloadId;
    if (payload_vocab < 1) throw ConfigError("vocab_size: no payload ids left after reserved range");

    std::vector<TokenId> perm;
    if (spec.task_kind == TaskKind::lexicon) perm = lexicon_permutation(spec.vocab_size, spec.seed);

    Rng rng(derive_seed(spec.seed, "generate_corpus"));
    for (int32_t i = 0; i < spec.corpus_size; ++i) {
        SequencePair pair;
        int32_t len = spec.min_len + int32_t(rng.next_below(uint64_t(spec.max_len - spec.min_len + 1)));
        pair.source.reserve(len);
        for (int32_t t = 0; t < len; ++t)
            pair.source.push_back(kFirstPayloadId + TokenId(rng.next_below(uint64_t(payload_vocab))));

        switch (spec.task_kind) {
            case TaskKind::copy:
                pair.reference = pair.source;
                break;
            case TaskKind::reverse:
                pair.reference.assign(pair.source.rbegin(), pair.source.rend());
                break;
            case TaskKind::lexicon: {
                pair.reference.reserve(len);
                for (TokenId t : pair.source) pair.reference.push_back(perm[t]);
                pair.reference = corrupt(pair.reference, spec.noise_drop, spec.noise_swap, rng);
                break;
            }
        }
        corpus.pairs.push_back(std::move(pair));
        corpus.splits.push_back(split_of_index(size_t(i)));
    }
    return corpus;
}

StatsReport corpus_stats(const Corpus& corpus) {
    if (corpus.pairs.empty()) throw InputError("corpus_stats: empty corpus");
    StatsReport report;
    const Split kinds[] = {Split::train, Split::valid, Split::test};
    const char* names[] = {"train", "valid", "test"};
    for (int k = 0; k < 3; ++k) {
        SplitStats row;
        row.split = names[k];
        int64_t total_len = 0;
        for (size_t i = 0; i < corpus.pairs.size(); ++i) {
            if (corpus.splits[i] != kinds[k]) continue;
            ++row.count;
            total_len += int64_t(corpus.pairs[i].reference.size());
        }
        row.avg_len = row.count > 0 ? double(total_len) / double(row.count) : 0.0;
        report.rows.push_back(row);
    }
    return report;
}

std::string StatsReport::to_csv() const {
    std::ostringstream os;
    os << "split,count,avg_len\n";
    for (const auto& row : rows) os << row.split << ',' << row.count << ',' << row.avg_len << '\n';
    return os.str();
}

void write_token_file(const std::string& path, const std::vector<TokenSeq>& lines) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    for (const auto& line : lines) {
        for (size_t i = 0; i < line.size(); ++i) {
            if (i) f << ' ';
            f << line[i];
        }
        f << '\n';
    }
}

std::vector<TokenSeq> read_token_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<TokenSeq> lines;
    std::string line;
    while (std::getline(f, line)) {
        TokenSeq seq;
        std::istringstream is(line);
        long v;
        while (is >> v) seq.push_back(TokenId(v));
        lines.push_back(std::move(seq));
    }
    return lines;
}

void write_corpus(const Corpus& corpus, const std::string& dir, const std::string& name) {
    const Split kinds[] = {Split::train, Split::valid, Split::test};
    const char* names[] = {"train", "valid", "test"};
    for (int k = 0; k < 3; ++k) {
        std::vector<TokenSeq> src, tgt;
        for (size_t i = 0; i < corpus.pairs.size(); ++i) {
            if (corpus.splits[i] != kinds[k]) continue;
            src.push_back(corpus.pairs[i].source);
            tgt.push_back(corpus.pairs[i].reference);
        }
        std::string base = dir + "/" + name + "." + names[k];
        write_token_file(base + ".src", src);
        write_token_file(base + ".tgt", tgt);
    }
}

Corpus read_corpus(const std::string& dir, const std::string& name, int32_t vocab_size) {
    Corpus corpus;
    corpus.vocab_size = vocab_size;
    const Split kinds[] = {Split::train, Split::valid, Split::test};
    const char* names[] = {"train", "valid", "test"};
    for (int k = 0; k < 3; ++k) {
        std::string base = dir + "/" + name + "." + names[k];
        auto src = read_token_file(base + ".src");
        auto tgt = read_token_file(base + ".tgt");
        if (src.size() != tgt.size())
            throw IoError("misaligned corpus files: " + base + ".src vs .tgt");
        for (size_t i = 0; i < src.size(); ++i) {
            corpus.pairs.push_back({std::move(src[i]), std::move(tgt[i])});
            corpus.splits.push_back(kinds[k]);
        }
    }
    return corpus;
}

}  // namespace srwd
