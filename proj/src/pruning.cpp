#include "sau/pruning.hpp"

#include <algorithm>
#include <cmath>

#include "sau/errors.hpp"
#include "sau/hash.hpp"

namespace sau {

namespace {

// Keep-all mask, then zero the n_prune lowest-scored positions; ties pruned
// in flat-index order.
Tensor mask_from_scores(const std::vector<double>& scores,
                        const std::vector<std::int64_t>& shape, double sparsity) {
    const auto n = static_cast<std::int64_t>(scores.size());
    const auto n_prune =
        static_cast<std::int64_t>(std::floor(sparsity * static_cast<double>(n)));
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        idx[static_cast<std::size_t>(i)] = i;
    }
    std::sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) {
            return sa < sb;
        }
        return a < b;
    });
    Tensor mask = Tensor::full(shape, 1.0);
    for (std::int64_t i = 0; i < n_prune; ++i) {
        mask.data[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 0.0;
    }
    return mask;
}

void check_sparsity_arg(double s) {
    if (!(s >= 0.0 && s < 1.0)) {
        throw ContractError("sparsity must be in [0, 1)");
    }
}

}  // namespace

const Tensor& SparsityMask::at(const std::string& name) const {
    for (const auto& l : layers) {
        if (l.name == name) {
            return l.mask;
        }
    }
    throw ContractError("mask has no layer named " + name);
}

bool SparsityMask::covers(const ParamSet& params) const {
    std::size_t n_prunable = 0;
    for (const auto& e : params.entries()) {
        if (!e.prunable) {
            continue;
        }
        ++n_prunable;
        bool found = false;
        for (const auto& l : layers) {
            if (l.name == e.name) {
                found = l.mask.shape == e.tensor.shape;
                break;
            }
        }
        if (!found) {
            return false;
        }
    }
    return n_prunable == layers.size();
}

std::uint64_t SparsityMask::content_hash() const {
    std::uint64_t h = hash_f64(target_sparsity);
    for (const auto& l : layers) {
        h = fnv1a64(l.name, h);
        for (std::int64_t d : l.mask.shape) {
            h = hash_u64(static_cast<std::uint64_t>(d), h);
        }
        for (double v : l.mask.data) {
            const unsigned char bit = v != 0.0 ? 1 : 0;
            h = fnv1a64(&bit, 1, h);
        }
    }
    return h;
}

SparsityMask magnitude_prune(const ParamSet& params, double sparsity) {
    check_sparsity_arg(sparsity);
    SparsityMask out;
    out.target_sparsity = sparsity;
    for (const auto& e : params.entries()) {
        if (!e.prunable) {
            continue;
        }
        std::vector<double> scores(e.tensor.data.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            scores[i] = std::abs(e.tensor.data[i]);
        }
        out.layers.push_back({e.name, mask_from_scores(scores, e.tensor.shape, sparsity)});
    }
    return out;
}

SparsityMask activation_prune(const ParamSet& params,
                              const std::map<std::string, std::vector<double>>& activation_rms,
                              double sparsity) {
    check_sparsity_arg(sparsity);
    if (activation_rms.empty()) {
        throw ContractError("activation_prune: empty calibration statistics");
    }
    SparsityMask out;
    out.target_sparsity = sparsity;
    for (const auto& e : params.entries()) {
        if (!e.prunable) {
            continue;
        }
        auto it = activation_rms.find(e.name);
        if (it == activation_rms.end()) {
            throw ContractError("activation_prune: no calibration stats for layer " + e.name);
        }
        const auto& rms = it->second;
        const std::int64_t rows = e.tensor.rows(), cols = e.tensor.cols();
        if (static_cast<std::int64_t>(rms.size()) != rows) {
            throw ContractError("activation_prune: rms length mismatch for layer " + e.name);
        }
        std::vector<double> scores(e.tensor.data.size());
        for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < cols; ++c) {
                scores[static_cast<std::size_t>(r * cols + c)] =
                    std::abs(e.tensor.at(r, c)) * rms[static_cast<std::size_t>(r)];
            }
        }
        out.layers.push_back({e.name, mask_from_scores(scores, e.tensor.shape, sparsity)});
    }
    return out;
}

ParamSet apply_mask(const ParamSet& params, const SparsityMask& mask) {
    if (!mask.covers(params)) {
        throw ContractError("apply_mask: mask does not cover the parameter set");
    }
    ParamSet out = params;
    for (auto& e : out.entries()) {
        if (!e.prunable) {
            continue;
        }
        const Tensor& m = mask.at(e.name);
        for (std::size_t i = 0; i < e.tensor.data.size(); ++i) {
            e.tensor.data[i] *= m.data[i];
        }
    }
    return out;
}

double sparsity_of(const SparsityMask& mask) {
    std::int64_t total = 0, surviving = 0;
    for (const auto& l : mask.layers) {
        total += l.mask.numel();
        for (double v : l.mask.data) {
            if (v != 0.0) {
                ++surviving;
            }
        }
    }
    if (total == 0) {
        return 0.0;
    }
    return 1.0 - static_cast<double>(surviving) / static_cast<double>(total);
}

}  // namespace sau
