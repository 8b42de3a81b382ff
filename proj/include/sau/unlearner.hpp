#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sau/dataset.hpp"
#include "sau/model.hpp"
#include "sau/pruning.hpp"
#include "sau/sau_plan.hpp"

namespace sau {

enum class Variant { baseline, sau };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

struct UnlearnConfig {
    double eta = 1e-2;   // desk-scale default; the reference setting for
                         // 8B-parameter models is 1e-5
    double lambda = 1.0; // retain-loss weight
    int epochs = 50;
    int batch_forget = 4;
    int batch_retain = 4;
    std::uint64_t seed = 42;
    Variant variant = Variant::baseline;

    void validate() const;
};

struct EpochMetrics {
    double forget_loss = 0.0;
    double retain_loss = 0.0;
    double forget_em = 0.0;
    double retain_em = 0.0;
};

// Trajectory and configuration of one unlearning run. The metrics series has
// epochs + 1 entries (index 0 is the pre-unlearning state). wall_ms is kept
// at zero in persisted artifacts so identical runs produce identical bytes;
// measured timing goes to the log stream instead.
struct RunManifest {
    UnlearnConfig config;
    SAUConfig sau_config;   // meaningful for the sau variant
    double sparsity = 0.0;
    std::vector<EpochMetrics> series;
    EpochMetrics final() const { return series.back(); }
    std::int64_t wall_ms = 0;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
    // CSV: epoch,forget_loss,retain_loss,forget_em,retain_em
    std::string metrics_csv() const;
};

// Either the SAU transform or the plain mask restriction.
struct GradTransform {
    const SparsityMask* mask = nullptr;
    const SAUPlan* plan = nullptr;  // null for the baseline variant
    ParamSet apply(ParamSet grads) const;
};

// One SGD step on L_total = -L(forget) + lambda * L(retain), gradient
// transformed before the update. Pruned weights stay exactly zero.
void graddiff_step(Model& model, const GradTransform& transform,
                   std::span<const Fact> forget_batch, std::span<const Fact> retain_batch,
                   double lambda, double eta);

// Full Stage-3 loop: epochs of graddiff steps over the forget set (shuffled
// per epoch from the run seed), paired with an independently cycling retain
// iterator. The plan, when given, must have been built from `mask`
// (hash-checked). Metrics are recorded before the first epoch and after each
// epoch.
RunManifest run_unlearning(Model& model, const SparsityMask& mask, const SAUPlan* plan,
                           const FactDataset& dataset, const UnlearnConfig& config);

}  // namespace sau
