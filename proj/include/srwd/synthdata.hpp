#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srwd/types.hpp"

namespace srwd {

enum class TaskKind { copy, reverse, lexicon };

TaskKind parse_task_kind(const std::string& s);
std::string task_kind_name(TaskKind k);

struct TaskSpec {
    TaskKind task_kind = TaskKind::lexicon;
    int32_t vocab_size = 50;
    int32_t min_len = 4;
    int32_t max_len = 12;
    double noise_drop = 0.1;
    double noise_swap = 0.1;
    int32_t corpus_size = 2000;
    uint64_t seed = 0;

    void validate() const;  // throws ConfigError naming the bad field
};

enum class Split { train, valid, test };

struct SequencePair {
    TokenSeq source;
    TokenSeq reference;
};

struct Corpus {
    std::vector<SequencePair> pairs;
    std::vector<Split> splits;  // parallel to pairs
    int32_t vocab_size = 0;

    std::vector<const SequencePair*> split_pairs(Split s) const;
};

struct SplitStats {
    std::string split;
    int64_t count = 0;
    double avg_len = 0.0;  // mean reference length in tokens
};

struct StatsReport {
    std::vector<SplitStats> rows;
    std::string to_csv() const;  // header: split,count,avg_len
};

Corpus generate_corpus(const TaskSpec& spec);
StatsReport corpus_stats(const Corpus& corpus);

// The seed-derived payload-vocabulary bijection used by the lexicon task.
std::vector<TokenId> lexicon_permutation(int32_t vocab_size, uint64_t seed);

// Parallel-file io: one sentence per line, whitespace-separated decimal ids.
void write_token_file(const std::string& path, const std::vector<TokenSeq>& lines);
std::vector<TokenSeq> read_token_file(const std::string& path);

void write_corpus(const Corpus& corpus, const std::string& dir, const std::string& name);
Corpus read_corpus(const std::string& dir, const std::string& name, int32_t vocab_size);

}  // namespace srwd
