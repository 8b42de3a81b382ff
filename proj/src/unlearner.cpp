#include "sau/unlearner.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "sau/errors.hpp"
#include "sau/rng.hpp"

namespace sau {

namespace {
using ordered_json = nlohmann::ordered_json;
}

std::string variant_name(Variant v) { return v == Variant::sau ? "sau" : "baseline"; }

Variant variant_from_name(const std::string& s) {
    if (s == "sau") {
        return Variant::sau;
    }
    if (s == "baseline") {
        return Variant::baseline;
    }
    throw ConfigError("variant: unknown variant '" + s + "'");
}

void UnlearnConfig::validate() const {
    if (!(eta > 0.0)) {
        throw ConfigError("eta: must be > 0");
    }
    if (!(lambda >= 0.0)) {
        throw ConfigError("lambda: must be >= 0");
    }
    if (epochs < 0) {
        throw ConfigError("epochs: must be >= 0");
    }
    if (batch_forget < 1 || batch_retain < 1) {
        throw ConfigError("batch_forget/batch_retain: must be >= 1");
    }
}

ParamSet GradTransform::apply(ParamSet grads) const {
    if (plan) {
        return transform_gradient(std::move(grads), *plan);
    }
    return mask_gradient(std::move(grads), *mask);
}

void graddiff_step(Model& model, const GradTransform& transform,
                   std::span<const Fact> forget_batch, std::span<const Fact> retain_batch,
                   double lambda, double eta) {
    Graph g;
    Var forget_loss = model.loss_graph(g, forget_batch);
    Var retain_loss = model.loss_graph(g, retain_batch);
    Var total = g.add(g.neg(forget_loss), g.scale(retain_loss, lambda));
    const double loss = g.scalar_value(total);
    if (!std::isfinite(loss)) {
        throw UnlearningError("non-finite total loss in graddiff step");
    }
    ParamSet grads = transform.apply(g.backward(total));
    axpy(model.params(), -eta, grads);
}

namespace {

// Infinite deterministic iterator over a fact split: a seeded permutation,
// reshuffled each time it wraps.
class CyclingBatcher {
public:
    CyclingBatcher(const FactDataset& ds, std::vector<int> ids, std::uint64_t seed)
        : ds_(ds), ids_(std::move(ids)), rng_(seed) {
        rng_.shuffle(ids_);
    }

    std::vector<Fact> next(int batch_size) {
        std::vector<Fact> batch;
        batch.reserve(static_cast<std::size_t>(batch_size));
        for (int i = 0; i < batch_size; ++i) {
            if (cursor_ == ids_.size()) {
                cursor_ = 0;
                rng_.shuffle(ids_);
            }
            batch.push_back(ds_.facts[static_cast<std::size_t>(ids_[cursor_++])]);
        }
        return batch;
    }

private:
    const FactDataset& ds_;
    std::vector<int> ids_;
    Rng rng_;
    std::size_t cursor_ = 0;
};

EpochMetrics measure(const Model& model, const FactDataset& ds,
                     const std::vector<Fact>& forget, const std::vector<Fact>& retain) {
    (void)ds;
    EpochMetrics m;
    m.forget_loss = model.loss_value(forget);
    m.retain_loss = model.loss_value(retain);
    m.forget_em = model.exact_match(forget).value;
    m.retain_em = model.exact_match(retain).value;
    return m;
}

void check_sparsity_preserved(const Model& model, const SparsityMask& mask, int epoch) {
    for (const auto& e : model.params().entries()) {
        if (!e.prunable) {
            continue;
        }
        const Tensor& m = mask.at(e.name);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            if (m.data[i] == 0.0 && e.tensor.data[i] != 0.0) {
                throw ContractError("pruned weight became nonzero in " + e.name + " at epoch " +
                                    std::to_string(epoch));
            }
        }
    }
}

}  // namespace

RunManifest run_unlearning(Model& model, const SparsityMask& mask, const SAUPlan* plan,
                           const FactDataset& dataset, const UnlearnConfig& config) {
    config.validate();
    if (!mask.covers(model.params())) {
        throw ContractError("run_unlearning: mask does not cover the model parameters");
    }
    if (plan && plan->mask_hash != mask.content_hash()) {
        throw HashMismatchError("run_unlearning: plan was built from a different mask");
    }
    if (config.variant == Variant::sau && !plan) {
        throw ContractError("run_unlearning: sau variant requires a plan");
    }
    check_sparsity_preserved(model, mask, 0);  // pre: theta == theta ⊙ M

    GradTransform transform;
    transform.mask = &mask;
    transform.plan = config.variant == Variant::sau ? plan : nullptr;

    const std::vector<Fact> forget = dataset.forget_facts();
    const std::vector<Fact> retain = dataset.retain_facts();
    if (forget.empty() || retain.empty()) {
        throw ContractError("run_unlearning: both splits must be nonempty");
    }

    RunManifest manifest;
    manifest.config = config;
    if (plan) {
        manifest.sau_config = plan->config;
    }
    manifest.sparsity = sparsity_of(mask);
    manifest.series.push_back(measure(model, dataset, forget, retain));

    CyclingBatcher forget_iter(dataset, dataset.forget_ids, Rng::derive(config.seed, "forget"));
    CyclingBatcher retain_iter(dataset, dataset.retain_ids, Rng::derive(config.seed, "retain"));
    const auto batches_per_epoch = static_cast<int>(
        (dataset.forget_ids.size() + static_cast<std::size_t>(config.batch_forget) - 1) /
        static_cast<std::size_t>(config.batch_forget));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (int b = 0; b < batches_per_epoch; ++b) {
            const std::vector<Fact> fb = forget_iter.next(config.batch_forget);
            const std::vector<Fact> rb = retain_iter.next(config.batch_retain);
            try {
                graddiff_step(model, transform, fb, rb, config.lambda, config.eta);
            } catch (const UnlearningError&) {
                throw UnlearningError("non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(b));
            }
        }
        check_sparsity_preserved(model, mask, epoch);
        manifest.series.push_back(measure(model, dataset, forget, retain));
    }
    return manifest;
}

std::string RunManifest::to_json() const {
    ordered_json j;
    j["config"] = {{"variant", variant_name(config.variant)},
                   {"eta", config.eta},
                   {"lambda", config.lambda},
                   {"epochs", config.epochs},
                   {"batch_forget", config.batch_forget},
                   {"batch_retain", config.batch_retain},
                   {"seed", config.seed}};
    j["sau"] = {{"topk_ratio", sau_config.topk_ratio}, {"alpha", sau_config.alpha}};
    j["sparsity"] = sparsity;
    j["series"] = ordered_json::array();
    for (const auto& m : series) {
        j["series"].push_back({{"forget_loss", m.forget_loss},
                               {"retain_loss", m.retain_loss},
                               {"forget_em", m.forget_em},
                               {"retain_em", m.retain_em}});
    }
    j["wall_ms"] = wall_ms;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    const auto j = ordered_json::parse(text);
    RunManifest m;
    const auto& c = j.at("config");
    m.config.variant = variant_from_name(c.at("variant").get<std::string>());
    m.config.eta = c.at("eta").get<double>();
    m.config.lambda = c.at("lambda").get<double>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.batch_forget = c.at("batch_forget").get<int>();
    m.config.batch_retain = c.at("batch_retain").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.sau_config.topk_ratio = j.at("sau").at("topk_ratio").get<double>();
    m.sau_config.alpha = j.at("sau").at("alpha").get<double>();
    m.sparsity = j.at("sparsity").get<double>();
    for (const auto& e : j.at("series")) {
        EpochMetrics em;
        em.forget_loss = e.at("forget_loss").get<double>();
        em.retain_loss = e.at("retain_loss").get<double>();
        em.forget_em = e.at("forget_em").get<double>();
        em.retain_em = e.at("retain_em").get<double>();
        m.series.push_back(em);
    }
    m.wall_ms = j.at("wall_ms").get<std::int64_t>();
    return m;
}

std::string RunManifest::metrics_csv() const {
    std::ostringstream out;
    out << "epoch,forget_loss,retain_loss,forget_em,retain_em\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& m = series[i];
        out << i << ',' << ordered_json(m.forget_loss).dump() << ','
            << ordered_json(m.retain_loss).dump() << ',' << ordered_json(m.forget_em).dump()
            << ',' << ordered_json(m.retain_em).dump() << '\n';
    }
    return out.str();
}

}  // namespace sau
