#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sau/dataset.hpp"
#include "sau/graph.hpp"
#include "sau/param_set.hpp"

namespace sau {

enum class Arch { mlp, char_lm };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& s);

struct ModelConfig {
    Arch arch = Arch::char_lm;
    std::vector<int> widths = {128, 128};
    int vocab = 64;
    int context_len = 8;
    std::uint64_t seed = 42;

    void validate() const;
};

// Embedding width of the char_lm; the architecture is fixed.
inline constexpr int kEmbedDim = 32;

struct EmScore {
    double value = 0.0;
    bool vacuous = false;  // empty subset: defined as 1.0
};

// Feed-forward answer predictor over a fixed context window. Both
// architectures consume the prompt plus previously decoded answer tokens,
// left-padded with a reserved pad id (== vocab); char_lm embeds tokens,
// mlp one-hot encodes them. The output head starts at zero so an untrained
// model is exactly uniform over the vocab.
class Model {
public:
    static Model init(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    void set_params(ParamSet p);

    // Scalar mean cross-entropy over the answer positions of `facts`, built
    // on the caller's graph (registers all params as leaves).
    Var loss_graph(Graph& g, std::span<const Fact> facts) const;

    double loss_value(std::span<const Fact> facts) const;
    // Gradient of the mean loss over `facts` for every parameter.
    ParamSet loss_grad(std::span<const Fact> facts) const;

    // Greedy decoding (argmax, ties to the lowest token id); a fact matches
    // iff every answer token is reproduced.
    EmScore exact_match(std::span<const Fact> facts) const;

    // Root-mean-square input activation per fan-in coordinate of each
    // prunable weight matrix, over all answer rows of `facts`.
    std::map<std::string, std::vector<double>> activation_rms(std::span<const Fact> facts) const;

private:
    Model(ModelConfig cfg, ParamSet p) : config_(std::move(cfg)), params_(std::move(p)) {}

    int pad_id() const { return config_.vocab; }
    std::vector<int> context_row(const Fact& fact, std::span<const int> decoded,
                                 int answer_pos) const;
    // One row per answer position; targets are the answer tokens.
    void make_rows(std::span<const Fact> facts, std::vector<std::vector<int>>& contexts,
                   std::vector<int>& targets) const;
    Var logits_graph(Graph& g, const std::vector<std::vector<int>>& contexts,
                     std::map<std::string, Tensor>* capture) const;
    Tensor one_hot_rows(const std::vector<std::vector<int>>& contexts) const;

    ModelConfig config_;
    ParamSet params_;
};

struct TrainConfig {
    double lr = 0.5;
    int epochs = 300;
    int batch_size = 16;
    std::uint64_t seed = 42;
};

// Plain SGD over shuffled fact batches; returns the dataset loss before
// training and after each epoch (length epochs + 1). Deterministic under
// seed; throws TrainingError naming the epoch if the loss goes non-finite.
std::vector<double> train(Model& model, const FactDataset& dataset, const TrainConfig& cfg);

}  // namespace sau
