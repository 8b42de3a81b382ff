#include "sau/model.hpp"

#include <algorithm>
#include <cmath>

#include "sau/errors.hpp"
#include "sau/rng.hpp"

namespace sau {

std::string arch_name(Arch a) { return a == Arch::mlp ? "mlp" : "char_lm"; }

Arch arch_from_name(const std::string& s) {
    if (s == "mlp") {
        return Arch::mlp;
    }
    if (s == "char_lm") {
        return Arch::char_lm;
    }
    throw ConfigError("arch: unknown architecture '" + s + "'");
}

void ModelConfig::validate() const {
    if (vocab < 1) {
        throw ConfigError("vocab: must be >= 1");
    }
    if (context_len < 1) {
        throw ConfigError("context_len: must be >= 1");
    }
    if (widths.empty()) {
        throw ConfigError("widths: must not be empty");
    }
    for (int w : widths) {
        if (w < 1) {
            throw ConfigError("widths: every width must be >= 1");
        }
    }
}

Model Model::init(const ModelConfig& config) {
    config.validate();
    Rng rng(config.seed);
    ParamSet p;
    // Input coordinates per context position: embedding row or one-hot over
    // vocab + pad.
    const int per_tok = config.arch == Arch::char_lm ? kEmbedDim : config.vocab + 1;
    if (config.arch == Arch::char_lm) {
        p.add("embed", Tensor::randn({config.vocab + 1, kEmbedDim}, rng, 0.1), false);
    }
    std::int64_t fan_in = static_cast<std::int64_t>(config.context_len) * per_tok;
    for (std::size_t i = 0; i < config.widths.size(); ++i) {
        const std::int64_t w = config.widths[i];
        const std::string base = "fc" + std::to_string(i + 1);
        p.add(base + ".w",
              Tensor::randn({fan_in, w}, rng, std::sqrt(2.0 / static_cast<double>(fan_in))),
              true);
        p.add(base + ".b", Tensor::zeros({w}), false);
        fan_in = w;
    }
    p.add("head.w", Tensor::zeros({fan_in, config.vocab}), true);
    p.add("head.b", Tensor::zeros({config.vocab}), false);
    for (auto& e : p.entries()) {
        e.tensor.requires_grad = true;
    }
    return Model(config, std::move(p));
}

void Model::set_params(ParamSet p) {
    if (p.size() != params_.size()) {
        throw ContractError("set_params: structure mismatch");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.entries()[i].name != params_.entries()[i].name ||
            p.entries()[i].tensor.shape != params_.entries()[i].tensor.shape) {
            throw ContractError("set_params: structure mismatch at " + p.entries()[i].name);
        }
        p.entries()[i].tensor.requires_grad = true;
        p.entries()[i].prunable = params_.entries()[i].prunable;
    }
    params_ = std::move(p);
}

std::vector<int> Model::context_row(const Fact& fact, std::span<const int> decoded,
                                    int answer_pos) const {
    const auto needed =
        static_cast<int>(fact.prompt.size()) + static_cast<int>(fact.answer.size());
    if (needed > config_.context_len) {
        throw ContractError("sequence length " + std::to_string(needed) +
                            " exceeds context length " + std::to_string(config_.context_len));
    }
    std::vector<int> row(static_cast<std::size_t>(config_.context_len), pad_id());
    std::vector<int> seq(fact.prompt.begin(), fact.prompt.end());
    for (int j = 0; j < answer_pos; ++j) {
        seq.push_back(decoded[static_cast<std::size_t>(j)]);
    }
    // Right-aligned in the window.
    const auto offset = row.size() - seq.size();
    std::copy(seq.begin(), seq.end(), row.begin() + static_cast<std::ptrdiff_t>(offset));
    return row;
}

void Model::make_rows(std::span<const Fact> facts, std::vector<std::vector<int>>& contexts,
                      std::vector<int>& targets) const {
    for (const auto& f : facts) {
        for (int j = 0; j < static_cast<int>(f.answer.size()); ++j) {
            contexts.push_back(context_row(f, f.answer, j));
            targets.push_back(f.answer[static_cast<std::size_t>(j)]);
        }
    }
}

Tensor Model::one_hot_rows(const std::vector<std::vector<int>>& contexts) const {
    const auto B = static_cast<std::int64_t>(contexts.size());
    const std::int64_t per_tok = config_.vocab + 1;
    const std::int64_t L = config_.context_len;
    Tensor x = Tensor::zeros({B, L * per_tok});
    for (std::int64_t r = 0; r < B; ++r) {
        for (std::int64_t l = 0; l < L; ++l) {
            const int tok = contexts[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)];
            if (tok < 0 || tok > config_.vocab) {
                throw IndexError("token " + std::to_string(tok) + " out of range");
            }
            x.data[static_cast<std::size_t>(r * (L * per_tok) + l * per_tok + tok)] = 1.0;
        }
    }
    return x;
}

Var Model::logits_graph(Graph& g, const std::vector<std::vector<int>>& contexts,
                        std::map<std::string, Tensor>* capture) const {
    std::map<std::string, Var> leaves;
    for (const auto& e : params_.entries()) {
        leaves[e.name] = g.param(e.name, e.tensor, e.prunable);
    }
    Var h;
    if (config_.arch == Arch::char_lm) {
        h = g.embed(leaves.at("embed"), contexts);
    } else {
        h = g.input(one_hot_rows(contexts));
    }
    for (std::size_t i = 0; i < config_.widths.size(); ++i) {
        const std::string base = "fc" + std::to_string(i + 1);
        if (capture) {
            (*capture)[base + ".w"] = g.value(h);
        }
        h = g.relu(g.add(g.matmul(h, leaves.at(base + ".w")), leaves.at(base + ".b")));
    }
    if (capture) {
        (*capture)["head.w"] = g.value(h);
    }
    return g.add(g.matmul(h, leaves.at("head.w")), leaves.at("head.b"));
}

Var Model::loss_graph(Graph& g, std::span<const Fact> facts) const {
    if (facts.empty()) {
        throw ContractError("loss: empty batch");
    }
    std::vector<std::vector<int>> contexts;
    std::vector<int> targets;
    make_rows(facts, contexts, targets);
    Var logits = logits_graph(g, contexts, nullptr);
    return g.softmax_cross_entropy(logits, targets);
}

double Model::loss_value(std::span<const Fact> facts) const {
    Graph g;
    return g.scalar_value(loss_graph(g, facts));
}

ParamSet Model::loss_grad(std::span<const Fact> facts) const {
    Graph g;
    Var loss = loss_graph(g, facts);
    return g.backward(loss);
}

EmScore Model::exact_match(std::span<const Fact> facts) const {
    if (facts.empty()) {
        return EmScore{1.0, true};
    }
    // Batched greedy decode: one forward per answer position across all
    // still-active facts.
    std::vector<std::vector<int>> decoded(facts.size());
    std::size_t max_answer = 0;
    for (const auto& f : facts) {
        max_answer = std::max(max_answer, f.answer.size());
    }
    for (std::size_t pos = 0; pos < max_answer; ++pos) {
        std::vector<std::size_t> active;
        std::vector<std::vector<int>> contexts;
        for (std::size_t i = 0; i < facts.size(); ++i) {
            if (pos < facts[i].answer.size()) {
                active.push_back(i);
                contexts.push_back(
                    context_row(facts[i], decoded[i], static_cast<int>(pos)));
            }
        }
        if (contexts.empty()) {
            break;
        }
        Graph g;
        const Tensor& logits = g.value(logits_graph(g, contexts, nullptr));
        const std::int64_t C = logits.cols();
        for (std::size_t r = 0; r < active.size(); ++r) {
            int best = 0;
            double best_v = logits.at(static_cast<std::int64_t>(r), 0);
            for (std::int64_t c = 1; c < C; ++c) {
                const double v = logits.at(static_cast<std::int64_t>(r), c);
                if (v > best_v) {
                    best_v = v;
                    best = static_cast<int>(c);
                }
            }
            decoded[active[r]].push_back(best);
        }
    }
    std::size_t matched = 0;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        if (decoded[i] == facts[i].answer) {
            ++matched;
        }
    }
    return EmScore{static_cast<double>(matched) / static_cast<double>(facts.size()), false};
}

std::map<std::string, std::vector<double>> Model::activation_rms(
    std::span<const Fact> facts) const {
    if (facts.empty()) {
        throw ContractError("activation_rms: empty calibration batch");
    }
    std::vector<std::vector<int>> contexts;
    std::vector<int> targets;
    make_rows(facts, contexts, targets);
    std::map<std::string, Tensor> capture;
    Graph g;
    (void)logits_graph(g, contexts, &capture);
    std::map<std::string, std::vector<double>> out;
    for (const auto& [name, acts] : capture) {
        const std::int64_t rows = acts.rows(), cols = acts.cols();
        std::vector<double> rms(static_cast<std::size_t>(cols), 0.0);
        for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < cols; ++c) {
                const double v = acts.at(r, c);
                rms[static_cast<std::size_t>(c)] += v * v;
            }
        }
        for (auto& v : rms) {
            v = std::sqrt(v / static_cast<double>(rows));
        }
        out[name] = std::move(rms);
    }
    return out;
}

std::vector<double> train(Model& model, const FactDataset& dataset, const TrainConfig& cfg) {
    if (!(cfg.lr >= 0.0)) {
        throw ConfigError("lr: must be >= 0");
    }
    if (cfg.epochs < 0) {
        throw ConfigError("epochs: must be >= 0");
    }
    if (cfg.batch_size < 1) {
        throw ConfigError("batch_size: must be >= 1");
    }
    Rng rng(cfg.seed);
    std::vector<double> trace;
    trace.push_back(model.loss_value(dataset.facts));
    std::vector<int> order(dataset.facts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<int>(i);
    }
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<Fact> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(dataset.facts[static_cast<std::size_t>(order[i])]);
            }
            ParamSet grads = model.loss_grad(batch);
            axpy(model.params(), -cfg.lr, grads);
        }
        const double loss = model.loss_value(dataset.facts);
        if (!std::isfinite(loss)) {
            throw TrainingError("training diverged at epoch " + std::to_string(epoch));
        }
        trace.push_back(loss);
    }
    return trace;
}

}  // namespace sau
