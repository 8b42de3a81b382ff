#include "sau/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sau/errors.hpp"

namespace sau {

namespace {
using ordered_json = nlohmann::ordered_json;

template <typename T>
void read_key(const ordered_json& j, const char* key, T& out) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const ordered_json::exception&) {
        throw ConfigError(std::string(key) + ": wrong type");
    }
}
}  // namespace

void ExperimentConfig::validate() const {
    if (n_facts < 2) {
        throw ConfigError("n_facts: must be >= 2");
    }
    if (vocab < 1) {
        throw ConfigError("vocab: must be >= 1");
    }
    if (key_len < 1) {
        throw ConfigError("key_len: must be >= 1");
    }
    if (val_len < 1) {
        throw ConfigError("val_len: must be >= 1");
    }
    if (!(forget_fraction > 0.0 && forget_fraction < 1.0)) {
        throw ConfigError("forget_fraction: must be in (0, 1)");
    }
    (void)arch_from_name(arch);
    if (context_len < key_len + val_len) {
        throw ConfigError("context_len: must be >= key_len + val_len");
    }
    model_config().validate();
    if (!(train_lr >= 0.0)) {
        throw ConfigError("train_lr: must be >= 0");
    }
    if (train_epochs < 0) {
        throw ConfigError("train_epochs: must be >= 0");
    }
    if (train_batch < 1) {
        throw ConfigError("train_batch: must be >= 1");
    }
    if (pruner != "magnitude" && pruner != "activation") {
        throw ConfigError("pruner: must be 'magnitude' or 'activation'");
    }
    if (!(sparsity >= 0.0 && sparsity < 1.0)) {
        throw ConfigError("sparsity: must be in [0, 1)");
    }
    for (double s : sparsity_list) {
        if (!(s >= 0.0 && s < 1.0)) {
            throw ConfigError("sparsity_list: values must be in [0, 1)");
        }
    }
    if (calib_facts < 1) {
        throw ConfigError("calib_facts: must be >= 1");
    }
    sau_config().validate();
    if (saliency_batch < 1) {
        throw ConfigError("saliency_batch: must be >= 1");
    }
    unlearn_config().validate();
    if (seeds.empty()) {
        throw ConfigError("seeds: must not be empty");
    }
    if (variants.empty()) {
        throw ConfigError("variants: must not be empty");
    }
    for (const auto& v : variants) {
        (void)variant_from_name(v);
    }
    if (threads < 0) {
        throw ConfigError("threads: must be >= 0");
    }
}

std::string ExperimentConfig::to_json() const {
    ordered_json j;
    j["n_facts"] = n_facts;
    j["vocab"] = vocab;
    j["key_len"] = key_len;
    j["val_len"] = val_len;
    j["forget_fraction"] = forget_fraction;
    j["data_seed"] = data_seed;
    j["arch"] = arch;
    j["widths"] = widths;
    j["context_len"] = context_len;
    j["model_seed"] = model_seed;
    j["train_lr"] = train_lr;
    j["train_epochs"] = train_epochs;
    j["train_batch"] = train_batch;
    j["train_seed"] = train_seed;
    j["pruner"] = pruner;
    j["sparsity"] = sparsity;
    j["sparsity_list"] = sparsity_list;
    j["calib_facts"] = calib_facts;
    j["topk_ratio"] = topk_ratio;
    j["alpha"] = alpha;
    j["saliency_batch"] = saliency_batch;
    j["eta"] = eta;
    j["lambda"] = lambda;
    j["unlearn_epochs"] = unlearn_epochs;
    j["batch_forget"] = batch_forget;
    j["batch_retain"] = batch_retain;
    j["seeds"] = seeds;
    j["variants"] = variants;
    j["threads"] = threads;
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    static const std::set<std::string> known = {
        "n_facts",      "vocab",         "key_len",       "val_len",     "forget_fraction",
        "data_seed",    "arch",          "widths",        "context_len", "model_seed",
        "train_lr",     "train_epochs",  "train_batch",   "train_seed",  "pruner",
        "sparsity",     "sparsity_list", "calib_facts",   "topk_ratio",  "alpha",
        "saliency_batch", "eta",         "lambda",        "unlearn_epochs", "batch_forget",
        "batch_retain", "seeds",         "variants",      "threads"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw ConfigError(key + ": unknown config key");
        }
    }
    ExperimentConfig cfg;
    read_key(j, "n_facts", cfg.n_facts);
    read_key(j, "vocab", cfg.vocab);
    read_key(j, "key_len", cfg.key_len);
    read_key(j, "val_len", cfg.val_len);
    read_key(j, "forget_fraction", cfg.forget_fraction);
    read_key(j, "data_seed", cfg.data_seed);
    read_key(j, "arch", cfg.arch);
    read_key(j, "widths", cfg.widths);
    read_key(j, "context_len", cfg.context_len);
    read_key(j, "model_seed", cfg.model_seed);
    read_key(j, "train_lr", cfg.train_lr);
    read_key(j, "train_epochs", cfg.train_epochs);
    read_key(j, "train_batch", cfg.train_batch);
    read_key(j, "train_seed", cfg.train_seed);
    read_key(j, "pruner", cfg.pruner);
    read_key(j, "sparsity", cfg.sparsity);
    read_key(j, "sparsity_list", cfg.sparsity_list);
    read_key(j, "calib_facts", cfg.calib_facts);
    read_key(j, "topk_ratio", cfg.topk_ratio);
    read_key(j, "alpha", cfg.alpha);
    read_key(j, "saliency_batch", cfg.saliency_batch);
    read_key(j, "eta", cfg.eta);
    read_key(j, "lambda", cfg.lambda);
    read_key(j, "unlearn_epochs", cfg.unlearn_epochs);
    read_key(j, "batch_forget", cfg.batch_forget);
    read_key(j, "batch_retain", cfg.batch_retain);
    read_key(j, "seeds", cfg.seeds);
    read_key(j, "variants", cfg.variants);
    read_key(j, "threads", cfg.threads);
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

ModelConfig ExperimentConfig::model_config() const {
    ModelConfig mc;
    mc.arch = arch_from_name(arch);
    mc.widths = widths;
    mc.vocab = vocab;
    mc.context_len = context_len;
    mc.seed = model_seed;
    return mc;
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig tc;
    tc.lr = train_lr;
    tc.epochs = train_epochs;
    tc.batch_size = train_batch;
    tc.seed = train_seed;
    return tc;
}

SAUConfig ExperimentConfig::sau_config() const {
    SAUConfig sc;
    sc.topk_ratio = topk_ratio;
    sc.alpha = alpha;
    return sc;
}

UnlearnConfig ExperimentConfig::unlearn_config() const {
    UnlearnConfig uc;
    uc.eta = eta;
    uc.lambda = lambda;
    uc.epochs = unlearn_epochs;
    uc.batch_forget = batch_forget;
    uc.batch_retain = batch_retain;
    uc.seed = seeds.empty() ? 42 : seeds.front();
    return uc;
}

SweepSpec ExperimentConfig::sweep_spec() const {
    SweepSpec spec;
    spec.pruner = pruner;
    spec.sparsities = sparsity_list;
    spec.variants.clear();
    for (const auto& v : variants) {
        spec.variants.push_back(variant_from_name(v));
    }
    spec.seeds = seeds;
    spec.sau = sau_config();
    spec.unlearn = unlearn_config();
    spec.saliency_batch = saliency_batch;
    spec.calib_facts = calib_facts;
    spec.threads = threads;
    return spec;
}

}  // namespace sau
