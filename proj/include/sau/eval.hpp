#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sau/dataset.hpp"
#include "sau/model.hpp"
#include "sau/pruning.hpp"
#include "sau/sau_plan.hpp"
#include "sau/unlearner.hpp"

namespace sau {

// Forgetting/utility scores on the two splits. Forget quality is
// 1 - exact_match(forget); utility is exact_match(retain); the aggregate is
// their harmonic mean (0 when either is 0).
struct ScoreCard {
    double forget_quality = 0.0;
    double utility = 0.0;
    double aggregate = 0.0;
    double forget_em = 0.0;
    double retain_em = 0.0;
};

double harmonic_mean(double a, double b);
ScoreCard score(const Model& model, const FactDataset& dataset);
ScoreCard score_from(double forget_em, double retain_em);

struct CellKey {
    std::string pruner = "magnitude";  // "magnitude" | "activation"
    double sparsity = 0.0;
    Variant variant = Variant::baseline;
    double topk = 0.3;
    double alpha = 0.1;
    std::uint64_t seed = 0;  // user-level seed; the run seed is derived

    std::string tag() const;  // canonical string, feeds seed derivation
};

struct SweepRow {
    CellKey key;
    ScoreCard scores;
    int epochs = 0;
    std::int64_t wall_ms = 0;  // kept 0 in persisted outputs for determinism
};

struct SweepCell {
    SweepRow row;
    RunManifest manifest;
};

struct SweepSpec {
    std::string pruner = "magnitude";
    std::vector<double> sparsities = {0.0, 0.25, 0.5, 0.75};
    std::vector<Variant> variants = {Variant::baseline, Variant::sau};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    SAUConfig sau;
    UnlearnConfig unlearn;
    int saliency_batch = 1;
    int calib_facts = 32;  // retain facts used to calibrate activation pruning
    int threads = 0;       // 0: hardware concurrency
};

struct SweepResult {
    std::vector<SweepCell> cells;       // canonical order
    std::vector<std::string> failures;  // cell tag + error, sweep continues

    double mean_aggregate(double sparsity, Variant variant) const;
    double stdev_aggregate(double sparsity, Variant variant) const;
};

// Prunes, plans and unlearns one cell from a shared base model. Pure
// function of (base params, dataset, key, configs); used for sweeps and for
// replaying a cell from its manifest.
SweepCell run_cell(const Model& base, const FactDataset& dataset, const CellKey& key,
                   const SAUConfig& sau, const UnlearnConfig& unlearn, int saliency_batch,
                   int calib_facts);

SweepResult sparsity_sweep(const Model& base, const FactDataset& dataset,
                           const SweepSpec& spec);

// Fig-2-style ablations: top-k sweep at fixed sparsity, and redistribution
// on/off (alpha vs 0) at the default top-k.
SweepResult ablation_topk(const Model& base, const FactDataset& dataset, const SweepSpec& spec,
                          double sparsity, const std::vector<double>& k_list);
SweepResult ablation_redistribution(const Model& base, const FactDataset& dataset,
                                    const SweepSpec& spec, double sparsity);

// Two-arm resurfacing experiment: unlearn the dense model, then prune it and
// measure how much forgotten knowledge returns; the control arm prunes the
// never-unlearned model. Observation only, no directional assertion.
struct ResurfacingReport {
    std::string pruner;
    double sparsity = 0.0;
    double unlearned_forget_em_before = 0.0;
    double unlearned_forget_em_after = 0.0;
    double unlearned_retain_em_before = 0.0;
    double unlearned_retain_em_after = 0.0;
    double delta_forget_em = 0.0;
    double delta_retain_em = 0.0;
    double control_forget_em_before = 0.0;
    double control_forget_em_after = 0.0;
    double control_retain_em_before = 0.0;
    double control_retain_em_after = 0.0;

    std::string to_json() const;
};

ResurfacingReport resurfacing_experiment(const Model& base, const FactDataset& dataset,
                                         const std::string& pruner, double sparsity,
                                         const UnlearnConfig& unlearn, int calib_facts);

// Long-format CSV: pruner,sparsity,variant,topk,alpha,seed,fq,utility,
// aggregate,forget_em,retain_em,epochs,wall_ms
std::string sweep_csv(const SweepResult& result);
// Deterministic 800x500 SVG: sparsity on x, mean aggregate on y, one
// polyline per variant.
std::string sweep_svg(const SweepResult& result);
std::string sweep_summary_json(const SweepSpec& spec, const SweepResult& result);

}  // namespace sau
