#include "sau/saliency.hpp"

#include <algorithm>

#include "sau/errors.hpp"

namespace sau {

SaliencyMap accumulate_squared_grads(const BatchGradFn& grad_fn, int n_samples, int batch_size) {
    if (n_samples < 1) {
        throw ContractError("saliency: empty sample set");
    }
    if (batch_size < 1) {
        throw ContractError("saliency: batch_size must be >= 1");
    }
    SaliencyMap out;
    out.sample_count = n_samples;
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    bool first = true;
    std::vector<int> ids;
    for (int start = 0; start < n_samples; start += batch_size) {
        const int end = std::min(n_samples, start + batch_size);
        ids.clear();
        for (int i = start; i < end; ++i) {
            ids.push_back(i);
        }
        ParamSet grads = grad_fn(ids);
        if (first) {
            out.scores = grads.like_zeros();
            first = false;
        }
        for (std::size_t e = 0; e < grads.size(); ++e) {
            const Tensor& g = grads.entries()[e].tensor;
            Tensor& s = out.scores.entries()[e].tensor;
            for (std::size_t i = 0; i < g.data.size(); ++i) {
                s.data[i] += inv_n * g.data[i] * g.data[i];
            }
        }
    }
    return out;
}

SaliencyMap compute_saliency(const Model& model, std::span<const Fact> forget_set,
                             int batch_size) {
    if (forget_set.empty()) {
        throw ContractError("compute_saliency: empty forget set");
    }
    auto grad_fn = [&](std::span<const int> ids) {
        std::vector<Fact> batch;
        batch.reserve(ids.size());
        for (int i : ids) {
            batch.push_back(forget_set[static_cast<std::size_t>(i)]);
        }
        return model.loss_grad(batch);
    };
    return accumulate_squared_grads(grad_fn, static_cast<int>(forget_set.size()), batch_size);
}

SaliencyMap fisher_diag(const Model& model, std::span<const Fact> dataset) {
    if (dataset.empty()) {
        throw ContractError("fisher_diag: empty dataset");
    }
    SaliencyMap out;
    out.sample_count = static_cast<std::int64_t>(dataset.size());
    out.scores = model.params().like_zeros();
    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    for (const Fact& sample : dataset) {
        ParamSet grads = model.loss_grad(std::span<const Fact>(&sample, 1));
        for (std::size_t e = 0; e < grads.size(); ++e) {
            const Tensor& g = grads.entries()[e].tensor;
            Tensor& s = out.scores.entries()[e].tensor;
            for (std::size_t i = 0; i < g.data.size(); ++i) {
                s.data[i] += inv_n * g.data[i] * g.data[i];
            }
        }
    }
    return out;
}

}  // namespace sau
