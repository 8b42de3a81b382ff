#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sau/param_set.hpp"
#include "sau/pruning.hpp"
#include "sau/saliency.hpp"

namespace sau {

struct SAUConfig {
    double topk_ratio = 0.3;  // k in (0, 1]
    double alpha = 0.1;       // redistribution strength, >= 0

    void validate() const;
};

// Precomputed gradient transform for one unlearning run: per prunable layer,
// the binary gradient mask G (top-k most salient surviving weights), the
// redistribution weights W, and the total saliency lost to pruning. Built
// once before unlearning and immutable afterwards.
struct SAUPlan {
    struct Layer {
        std::string name;
        Tensor gate;        // G: binary, zero wherever the sparsity mask is zero
        Tensor weights;     // W: >= 1 at survivors, exactly 1 at pruned positions
        double pruned_importance = 0.0;
        double threshold = 0.0;      // smallest selected saliency; +inf if none
        bool zero_survivors = false;
    };

    SAUConfig config;
    std::vector<Layer> layers;
    std::uint64_t mask_hash = 0;
    std::uint64_t saliency_hash = 0;

    const Layer& at(const std::string& name) const;
};

// G = M ⊙ [S >= tau_k]: among surviving weights, keep exactly
// round(k * n_surviving) with the highest saliency; threshold ties keep the
// lower flat index. threshold_out receives the smallest selected saliency
// (+inf when nothing is selected).
Tensor build_gradient_mask(const Tensor& saliency, const Tensor& mask, double topk_ratio,
                           double* threshold_out = nullptr);

// Total saliency at pruned positions.
double pruned_importance(const Tensor& saliency, const Tensor& mask);

// W_i = 1 + alpha * (S_i / sum of surviving S) * pruned_importance at
// survivors; 1 at pruned positions; all ones when the surviving saliency
// sums to zero.
Tensor build_redistribution(const Tensor& saliency, const Tensor& mask, double alpha);

SAUPlan build_plan(const SaliencyMap& saliency, const SparsityMask& mask, SAUConfig config);

// grad ⊙ G ⊙ W on prunable tensors; non-prunable tensors pass through.
ParamSet transform_gradient(ParamSet grads, const SAUPlan& plan);

// Baseline: grad ⊙ M on prunable tensors (the restricted gradient).
ParamSet mask_gradient(ParamSet grads, const SparsityMask& mask);

}  // namespace sau
