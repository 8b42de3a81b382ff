#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sau/tensor.hpp"

namespace sau {

// Ordered, named collection of parameter tensors. Iteration order is the
// insertion order and is part of every determinism contract (hashing, SGD
// update order, checkpoint layout).
//
// "prunable" marks the dense-layer weight matrices that sparsity masks and
// SAU plans cover; biases and embedding tables are not prunable. Prunable
// tensors are always rank-2.
class ParamSet {
public:
    struct Entry {
        std::string name;
        Tensor tensor;
        bool prunable = false;
    };

    void add(std::string name, Tensor tensor, bool prunable);

    bool contains(const std::string& name) const;
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool prunable(const std::string& name) const;

    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    // Same structure, all values zero.
    ParamSet like_zeros() const;

    std::int64_t total_elements() const;
    std::int64_t total_prunable_elements() const;
    bool all_finite() const;
    bool bitwise_equal(const ParamSet& o) const;

    // Canonical content hash over names, prunable flags, shapes and
    // little-endian f64 payloads, in iteration order.
    std::uint64_t content_hash() const;

private:
    std::vector<Entry> entries_;
    std::size_t index_of(const std::string& name) const;
};

// y += alpha * x over every entry; structures must match.
void axpy(ParamSet& y, double alpha, const ParamSet& x);

}  // namespace sau
