#include "sau/param_set.hpp"

#include "sau/errors.hpp"
#include "sau/hash.hpp"

namespace sau {

void ParamSet::add(std::string name, Tensor tensor, bool prunable) {
    if (contains(name)) {
        throw ContractError("duplicate parameter name: " + name);
    }
    if (prunable && tensor.rank() != 2) {
        throw ContractError("prunable tensor must be rank-2: " + name);
    }
    entries_.push_back(Entry{std::move(name), std::move(tensor), prunable});
}

bool ParamSet::contains(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.name == name) {
            return true;
        }
    }
    return false;
}

std::size_t ParamSet::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name == name) {
            return i;
        }
    }
    throw ContractError("unknown parameter name: " + name);
}

Tensor& ParamSet::at(const std::string& name) { return entries_[index_of(name)].tensor; }

const Tensor& ParamSet::at(const std::string& name) const {
    return entries_[index_of(name)].tensor;
}

bool ParamSet::prunable(const std::string& name) const {
    return entries_[index_of(name)].prunable;
}

ParamSet ParamSet::like_zeros() const {
    ParamSet out;
    for (const auto& e : entries_) {
        out.add(e.name, Tensor::zeros(e.tensor.shape), e.prunable);
    }
    return out;
}

std::int64_t ParamSet::total_elements() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) {
        n += e.tensor.numel();
    }
    return n;
}

std::int64_t ParamSet::total_prunable_elements() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) {
        if (e.prunable) {
            n += e.tensor.numel();
        }
    }
    return n;
}

bool ParamSet::all_finite() const {
    for (const auto& e : entries_) {
        if (!e.tensor.all_finite()) {
            return false;
        }
    }
    return true;
}

bool ParamSet::bitwise_equal(const ParamSet& o) const {
    if (entries_.size() != o.entries_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name != o.entries_[i].name ||
            entries_[i].prunable != o.entries_[i].prunable ||
            !entries_[i].tensor.bitwise_equal(o.entries_[i].tensor)) {
            return false;
        }
    }
    return true;
}

std::uint64_t ParamSet::content_hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& e : entries_) {
        h = fnv1a64(e.name, h);
        const unsigned char flag = e.prunable ? 1 : 0;
        h = fnv1a64(&flag, 1, h);
        for (std::int64_t d : e.tensor.shape) {
            h = hash_u64(static_cast<std::uint64_t>(d), h);
        }
        h = hash_f64_span(e.tensor.data, h);
    }
    return h;
}

void axpy(ParamSet& y, double alpha, const ParamSet& x) {
    if (y.size() != x.size()) {
        throw ShapeError("axpy: parameter set size mismatch");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y.entries()[i].name != x.entries()[i].name) {
            throw ShapeError("axpy: parameter name mismatch at index " + std::to_string(i));
        }
        axpy(y.entries()[i].tensor, alpha, x.entries()[i].tensor);
    }
}

}  // namespace sau
