#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sau/eval.hpp"
#include "sau/model.hpp"
#include "sau/sau_plan.hpp"
#include "sau/unlearner.hpp"

namespace sau {

// Flat, typed experiment configuration. Defaults are the bundled desk-scale
// recipe; a JSON config file overrides individual keys. Unknown keys and
// precondition violations are rejected with the field name.
struct ExperimentConfig {
    // dataset
    int n_facts = 200;
    int vocab = 64;
    int key_len = 4;
    int val_len = 3;
    double forget_fraction = 0.1;
    std::uint64_t data_seed = 42;
    // model
    std::string arch = "char_lm";
    std::vector<int> widths = {128, 128};
    int context_len = 8;
    std::uint64_t model_seed = 42;
    // training
    double train_lr = 0.5;
    int train_epochs = 200;
    int train_batch = 16;
    std::uint64_t train_seed = 42;
    // pruning
    std::string pruner = "magnitude";
    double sparsity = 0.5;
    std::vector<double> sparsity_list = {0.0, 0.25, 0.5, 0.75};
    int calib_facts = 32;
    // SAU
    double topk_ratio = 0.3;
    double alpha = 0.1;
    int saliency_batch = 1;
    // unlearning
    double eta = 1e-2;
    double lambda = 1.0;
    int unlearn_epochs = 50;
    int batch_forget = 4;
    int batch_retain = 4;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<std::string> variants = {"baseline", "sau"};
    // execution
    int threads = 0;

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);

    ModelConfig model_config() const;
    TrainConfig train_config() const;
    SAUConfig sau_config() const;
    UnlearnConfig unlearn_config() const;
    SweepSpec sweep_spec() const;
};

}  // namespace sau
