#include "sau/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sau/errors.hpp"
#include "sau/rng.hpp"

namespace sau {

std::vector<Fact> FactDataset::subset(const std::vector<int>& ids) const {
    std::vector<Fact> out;
    out.reserve(ids.size());
    for (int id : ids) {
        out.push_back(facts[static_cast<std::size_t>(id)]);
    }
    return out;
}

int FactDataset::max_sequence_len() const {
    int m = 0;
    for (const auto& f : facts) {
        m = std::max(m, static_cast<int>(f.prompt.size() + f.answer.size()));
    }
    return m;
}

void FactDataset::validate() const {
    std::set<int> forget(forget_ids.begin(), forget_ids.end());
    std::set<int> retain(retain_ids.begin(), retain_ids.end());
    if (forget.size() + retain.size() != facts.size()) {
        throw ContractError("dataset splits do not cover all facts exactly once");
    }
    for (int id : forget) {
        if (retain.count(id)) {
            throw ContractError("dataset splits overlap at fact " + std::to_string(id));
        }
    }
    for (const auto& f : facts) {
        for (int t : f.prompt) {
            if (t < 0 || t >= vocab) {
                throw ContractError("prompt token out of vocab range");
            }
        }
        for (int t : f.answer) {
            if (t < 0 || t >= vocab) {
                throw ContractError("answer token out of vocab range");
            }
        }
    }
}

FactDataset gen_facts(int n_facts, int vocab, int key_len, int val_len, double forget_fraction,
                      std::uint64_t seed) {
    if (n_facts < 2) {
        throw ContractError("gen_facts: n_facts must be >= 2");
    }
    if (!(forget_fraction > 0.0 && forget_fraction < 1.0)) {
        throw ContractError("gen_facts: forget_fraction must be in (0, 1)");
    }
    if (vocab < 1 || key_len < 1 || val_len < 1) {
        throw ContractError("gen_facts: vocab, key_len, val_len must be >= 1");
    }
    // Quick capacity check; the retry loop below catches the rest.
    double capacity = 1.0;
    for (int i = 0; i < key_len && capacity < 1e18; ++i) {
        capacity *= static_cast<double>(vocab);
    }
    if (capacity < static_cast<double>(n_facts)) {
        throw GenerationError("gen_facts: vocab^key_len < n_facts, keys cannot be unique");
    }

    Rng rng(seed);
    std::set<std::vector<int>> seen;
    FactDataset ds;
    ds.vocab = vocab;
    ds.facts.reserve(static_cast<std::size_t>(n_facts));
    const long max_attempts = 1000L * n_facts;
    long attempts = 0;
    while (static_cast<int>(ds.facts.size()) < n_facts) {
        if (++attempts > max_attempts) {
            throw GenerationError("gen_facts: could not generate unique keys after " +
                                  std::to_string(max_attempts) + " attempts");
        }
        std::vector<int> key(static_cast<std::size_t>(key_len));
        for (auto& t : key) {
            t = static_cast<int>(rng.next_index(vocab));
        }
        if (!seen.insert(key).second) {
            continue;
        }
        std::vector<int> value(static_cast<std::size_t>(val_len));
        for (auto& t : value) {
            t = static_cast<int>(rng.next_index(vocab));
        }
        ds.facts.push_back(Fact{std::move(key), std::move(value)});
    }

    const auto n_forget =
        static_cast<int>(std::llround(forget_fraction * static_cast<double>(n_facts)));
    std::vector<int> order(static_cast<std::size_t>(n_facts));
    for (int i = 0; i < n_facts; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    rng.shuffle(order);
    ds.forget_ids.assign(order.begin(), order.begin() + n_forget);
    ds.retain_ids.assign(order.begin() + n_forget, order.end());
    std::sort(ds.forget_ids.begin(), ds.forget_ids.end());
    std::sort(ds.retain_ids.begin(), ds.retain_ids.end());
    return ds;
}

void save_dataset(const FactDataset& ds, const std::string& path) {
    std::ostringstream out;
    out << ds.vocab << ' ' << ds.facts.size() << ' ' << ds.forget_ids.size();
    for (int id : ds.forget_ids) {
        out << ' ' << id;
    }
    out << '\n';
    for (const auto& f : ds.facts) {
        for (std::size_t i = 0; i < f.prompt.size(); ++i) {
            out << (i ? " " : "") << f.prompt[i];
        }
        out << " |";
        for (int t : f.answer) {
            out << ' ' << t;
        }
        out << '\n';
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("cannot open for writing: " + path);
    }
    file << out.str();
    if (!file) {
        throw IoError("write failed: " + path);
    }
}

FactDataset load_dataset(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw IoError("cannot open: " + path);
    }
    std::string line;
    if (!std::getline(file, line)) {
        throw IoError("dataset file is empty: " + path);
    }
    std::istringstream header(line);
    FactDataset ds;
    std::size_t n_facts = 0, n_forget = 0;
    if (!(header >> ds.vocab >> n_facts >> n_forget)) {
        throw IoError("malformed dataset header: " + path);
    }
    ds.forget_ids.resize(n_forget);
    for (auto& id : ds.forget_ids) {
        if (!(header >> id)) {
            throw IoError("truncated forget id list: " + path);
        }
    }
    std::set<int> forget(ds.forget_ids.begin(), ds.forget_ids.end());
    while (std::getline(file, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        Fact f;
        std::string tok;
        bool in_answer = false;
        while (ls >> tok) {
            if (tok == "|") {
                in_answer = true;
            } else {
                (in_answer ? f.answer : f.prompt).push_back(std::stoi(tok));
            }
        }
        if (!in_answer || f.prompt.empty() || f.answer.empty()) {
            throw IoError("malformed fact line: " + line);
        }
        ds.facts.push_back(std::move(f));
    }
    if (ds.facts.size() != n_facts) {
        throw IoError("dataset fact count mismatch: header says " + std::to_string(n_facts) +
                      ", file has " + std::to_string(ds.facts.size()));
    }
    for (int i = 0; i < static_cast<int>(n_facts); ++i) {
        if (!forget.count(i)) {
            ds.retain_ids.push_back(i);
        }
    }
    ds.validate();
    return ds;
}

}  // namespace sau
