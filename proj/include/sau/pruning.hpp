#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sau/param_set.hpp"

namespace sau {

// Binary mask over the prunable weight matrices of a ParamSet. Values are
// exactly 0.0 or 1.0; target_sparsity is the requested fraction of pruned
// weights. The mask is fixed once built and never re-learned.
struct SparsityMask {
    struct Layer {
        std::string name;
        Tensor mask;
    };
    std::vector<Layer> layers;  // iteration order matches the ParamSet
    double target_sparsity = 0.0;

    const Tensor& at(const std::string& name) const;
    bool covers(const ParamSet& params) const;

    // Canonical hash over names, shapes, mask bits and the target sparsity;
    // pairs plans with the mask they were built from.
    std::uint64_t content_hash() const;
};

// Per-layer: prunes the floor(s * n) smallest |w|; ties broken by pruning
// the lower flat index first.
SparsityMask magnitude_prune(const ParamSet& params, double sparsity);

// Per-layer: score(w) = |w| * rms of the input activation feeding it (rms
// per fan-in coordinate, i.e. per weight-matrix row), then prune lowest
// scores with the magnitude tie rule.
SparsityMask activation_prune(const ParamSet& params,
                              const std::map<std::string, std::vector<double>>& activation_rms,
                              double sparsity);

// theta ⊙ M on prunable tensors; non-prunable tensors untouched.
ParamSet apply_mask(const ParamSet& params, const SparsityMask& mask);

// Achieved sparsity: 1 - surviving fraction over all masked weights.
double sparsity_of(const SparsityMask& mask);

}  // namespace sau
