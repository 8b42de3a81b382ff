#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sau/dataset.hpp"
#include "sau/model.hpp"
#include "sau/param_set.hpp"

namespace sau {

// Mean squared forget-set gradient per parameter; the empirical diagonal
// Fisher information for cross-entropy at batch size 1. Covers every tensor
// of the model (bias saliency kept for diagnostics); only prunable tensors
// feed SAU plans.
struct SaliencyMap {
    ParamSet scores;  // same structure as the model params, values >= 0
    std::int64_t sample_count = 0;

    std::uint64_t content_hash() const { return scores.content_hash(); }
};

// Gradient of the mean loss over a batch given by sample indices.
using BatchGradFn = std::function<ParamSet(std::span<const int>)>;

// Accumulates (1/n) * (grad of per-batch mean loss)^2 over consecutive
// batches of the given size, n being the total sample count. With
// batch_size 1 this is exactly the empirical diagonal Fisher; larger batches
// trade that identity for speed.
SaliencyMap accumulate_squared_grads(const BatchGradFn& grad_fn, int n_samples, int batch_size);

// Saliency of the model over the given forget samples.
SaliencyMap compute_saliency(const Model& model, std::span<const Fact> forget_set,
                             int batch_size);

// Empirical diagonal Fisher: per-sample squared gradients of
// -log p(y|x; theta), averaged over the samples. Independent per-sample path
// (no batching); coincides with compute_saliency at batch_size 1.
SaliencyMap fisher_diag(const Model& model, std::span<const Fact> dataset);

}  // namespace sau
