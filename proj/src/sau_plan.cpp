#include "sau/sau_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sau/errors.hpp"

namespace sau {

void SAUConfig::validate() const {
    if (!(topk_ratio > 0.0 && topk_ratio <= 1.0)) {
        throw ConfigError("topk_ratio: must be in (0, 1]");
    }
    if (!(alpha >= 0.0)) {
        throw ConfigError("alpha: must be >= 0");
    }
}

const SAUPlan::Layer& SAUPlan::at(const std::string& name) const {
    for (const auto& l : layers) {
        if (l.name == name) {
            return l;
        }
    }
    throw ContractError("plan has no layer named " + name);
}

Tensor build_gradient_mask(const Tensor& saliency, const Tensor& mask, double topk_ratio,
                           double* threshold_out) {
    if (!saliency.same_shape(mask)) {
        throw ShapeError("build_gradient_mask: saliency/mask shape mismatch");
    }
    if (!(topk_ratio > 0.0 && topk_ratio <= 1.0)) {
        throw ContractError("build_gradient_mask: topk_ratio must be in (0, 1]");
    }
    std::vector<std::int64_t> survivors;
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        if (mask.at(i) != 0.0) {
            survivors.push_back(i);
        }
    }
    Tensor gate = Tensor::zeros(mask.shape);
    if (survivors.empty()) {
        if (threshold_out) {
            *threshold_out = std::numeric_limits<double>::infinity();
        }
        return gate;
    }
    const auto n_keep = static_cast<std::int64_t>(
        std::llround(topk_ratio * static_cast<double>(survivors.size())));
    // Highest saliency first; ties keep the lower flat index.
    std::sort(survivors.begin(), survivors.end(), [&](std::int64_t a, std::int64_t b) {
        const double sa = saliency.at(a), sb = saliency.at(b);
        if (sa != sb) {
            return sa > sb;
        }
        return a < b;
    });
    double threshold = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < n_keep; ++i) {
        gate.at(survivors[static_cast<std::size_t>(i)]) = 1.0;
        threshold = saliency.at(survivors[static_cast<std::size_t>(i)]);
    }
    if (threshold_out) {
        *threshold_out = threshold;
    }
    return gate;
}

double pruned_importance(const Tensor& saliency, const Tensor& mask) {
    if (!saliency.same_shape(mask)) {
        throw ShapeError("pruned_importance: saliency/mask shape mismatch");
    }
    double total = 0.0;
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        if (mask.at(i) == 0.0) {
            total += saliency.at(i);
        }
    }
    return total;
}

Tensor build_redistribution(const Tensor& saliency, const Tensor& mask, double alpha) {
    if (!saliency.same_shape(mask)) {
        throw ShapeError("build_redistribution: saliency/mask shape mismatch");
    }
    if (!(alpha >= 0.0)) {
        throw ContractError("build_redistribution: alpha must be >= 0");
    }
    double surviving_sum = 0.0;
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        if (mask.at(i) != 0.0) {
            surviving_sum += saliency.at(i);
        }
    }
    Tensor w = Tensor::full(mask.shape, 1.0);
    if (surviving_sum == 0.0) {
        return w;  // degenerate saliency: no amplification
    }
    const double lost = pruned_importance(saliency, mask);
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        if (mask.at(i) != 0.0) {
            w.at(i) = 1.0 + alpha * (saliency.at(i) / surviving_sum) * lost;
        }
    }
    return w;
}

SAUPlan build_plan(const SaliencyMap& saliency, const SparsityMask& mask, SAUConfig config) {
    config.validate();
    SAUPlan plan;
    plan.config = config;
    plan.mask_hash = mask.content_hash();
    plan.saliency_hash = saliency.content_hash();
    for (const auto& layer : mask.layers) {
        const Tensor& s = saliency.scores.at(layer.name);
        if (!s.same_shape(layer.mask)) {
            throw ShapeError("build_plan: saliency/mask shape mismatch for " + layer.name);
        }
        SAUPlan::Layer out;
        out.name = layer.name;
        out.gate = build_gradient_mask(s, layer.mask, config.topk_ratio, &out.threshold);
        out.pruned_importance = pruned_importance(s, layer.mask);
        out.weights = build_redistribution(s, layer.mask, config.alpha);
        bool any = false;
        for (double v : layer.mask.data) {
            if (v != 0.0) {
                any = true;
                break;
            }
        }
        out.zero_survivors = !any;
        plan.layers.push_back(std::move(out));
    }
    return plan;
}

ParamSet transform_gradient(ParamSet grads, const SAUPlan& plan) {
    for (auto& e : grads.entries()) {
        if (!e.prunable) {
            continue;
        }
        const SAUPlan::Layer& layer = plan.at(e.name);
        if (!layer.gate.same_shape(e.tensor)) {
            throw ShapeError("transform_gradient: plan shape mismatch for " + e.name);
        }
        for (std::size_t i = 0; i < e.tensor.data.size(); ++i) {
            e.tensor.data[i] *= layer.gate.data[i] * layer.weights.data[i];
        }
    }
    return grads;
}

ParamSet mask_gradient(ParamSet grads, const SparsityMask& mask) {
    for (auto& e : grads.entries()) {
        if (!e.prunable) {
            continue;
        }
        const Tensor& m = mask.at(e.name);
        if (!m.same_shape(e.tensor)) {
            throw ShapeError("mask_gradient: mask shape mismatch for " + e.name);
        }
        for (std::size_t i = 0; i < e.tensor.data.size(); ++i) {
            e.tensor.data[i] *= m.data[i];
        }
    }
    return grads;
}

}  // namespace sau
