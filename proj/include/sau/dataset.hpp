#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sau {

// One memorized key/value pair: the model is trained to produce the answer
// tokens given the prompt tokens.
struct Fact {
    std::vector<int> prompt;
    std::vector<int> answer;
};

// Synthetic memorization task with disjoint forget/retain splits.
struct FactDataset {
    std::vector<Fact> facts;
    int vocab = 0;
    std::vector<int> forget_ids;  // sorted, disjoint from retain_ids
    std::vector<int> retain_ids;  // sorted; union covers all facts

    std::vector<Fact> subset(const std::vector<int>& ids) const;
    std::vector<Fact> forget_facts() const { return subset(forget_ids); }
    std::vector<Fact> retain_facts() const { return subset(retain_ids); }
    int max_sequence_len() const;

    void validate() const;
};

// Generates n_facts with unique keys; |forget_ids| = round(forget_fraction *
// n_facts). Deterministic under seed.
FactDataset gen_facts(int n_facts, int vocab, int key_len, int val_len, double forget_fraction,
                      std::uint64_t seed);

// Line-oriented text format. Header: "<vocab> <n_facts> <n_forget> <forget
// ids...>", then one fact per line, space-separated token ids with "|"
// between prompt and answer.
void save_dataset(const FactDataset& ds, const std::string& path);
FactDataset load_dataset(const std::string& path);

}  // namespace sau
