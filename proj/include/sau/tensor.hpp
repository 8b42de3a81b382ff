#pragma once

#include <cstdint>
#include <vector>

#include "sau/rng.hpp"

namespace sau {

// Dense row-major f64 tensor. Plain value type; gradient recording lives in
// Graph (graph.hpp), which tracks tensors marked requires_grad.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<double> data;
    bool requires_grad = false;

    Tensor() = default;
    Tensor(std::vector<std::int64_t> shp, std::vector<double> d, bool rg = false);

    static Tensor zeros(const std::vector<std::int64_t>& shape);
    static Tensor full(const std::vector<std::int64_t>& shape, double value);
    static Tensor randn(const std::vector<std::int64_t>& shape, std::uint64_t seed,
                        double stddev = 1.0);
    static Tensor randn(const std::vector<std::int64_t>& shape, Rng& rng, double stddev = 1.0);
    // 1-D tensor from values.
    static Tensor row(std::vector<double> values);

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    std::int64_t rank() const { return static_cast<std::int64_t>(shape.size()); }
    std::int64_t rows() const;
    std::int64_t cols() const;
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    double& at(std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    double at(std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }
    double& at(std::int64_t r, std::int64_t c) {
        return data[static_cast<std::size_t>(r * cols() + c)];
    }
    double at(std::int64_t r, std::int64_t c) const {
        return data[static_cast<std::size_t>(r * cols() + c)];
    }

    bool all_finite() const;
    bool bitwise_equal(const Tensor& o) const;
};

// Validates a shape (nonempty, all dims >= 1) and returns its element count.
std::int64_t checked_numel(const std::vector<std::int64_t>& shape);

// y += alpha * x, elementwise; shapes must match.
void axpy(Tensor& y, double alpha, const Tensor& x);
// a * b elementwise.
Tensor hadamard(const Tensor& a, const Tensor& b);

}  // namespace sau
