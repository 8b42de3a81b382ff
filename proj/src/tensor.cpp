#include "sau/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "sau/errors.hpp"

namespace sau {

std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
    if (shape.empty()) {
        throw ShapeError("invalid shape: empty");
    }
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 1) {
            throw ShapeError("invalid shape: dimension " + std::to_string(d));
        }
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::int64_t> shp, std::vector<double> d, bool rg)
    : shape(std::move(shp)), data(std::move(d)), requires_grad(rg) {
    const std::int64_t n = checked_numel(shape);
    if (n != static_cast<std::int64_t>(data.size())) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape element count " + std::to_string(n));
    }
}

Tensor Tensor::zeros(const std::vector<std::int64_t>& shape) {
    const std::int64_t n = checked_numel(shape);
    return Tensor(shape, std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(const std::vector<std::int64_t>& shape, double value) {
    const std::int64_t n = checked_numel(shape);
    return Tensor(shape, std::vector<double>(static_cast<std::size_t>(n), value));
}

Tensor Tensor::randn(const std::vector<std::int64_t>& shape, std::uint64_t seed, double stddev) {
    Rng rng(seed);
    return randn(shape, rng, stddev);
}

Tensor Tensor::randn(const std::vector<std::int64_t>& shape, Rng& rng, double stddev) {
    const std::int64_t n = checked_numel(shape);
    std::vector<double> d(static_cast<std::size_t>(n));
    for (auto& v : d) {
        v = rng.next_normal(stddev);
    }
    return Tensor(shape, std::move(d));
}

Tensor Tensor::row(std::vector<double> values) {
    const auto n = static_cast<std::int64_t>(values.size());
    return Tensor({n}, std::move(values));
}

std::int64_t Tensor::rows() const {
    if (rank() != 2) {
        throw ShapeError("rows(): tensor is not rank-2");
    }
    return shape[0];
}

std::int64_t Tensor::cols() const {
    if (rank() != 2) {
        throw ShapeError("cols(): tensor is not rank-2");
    }
    return shape[1];
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

bool Tensor::bitwise_equal(const Tensor& o) const {
    if (shape != o.shape) {
        return false;
    }
    return std::memcmp(data.data(), o.data.data(), data.size() * sizeof(double)) == 0;
}

void axpy(Tensor& y, double alpha, const Tensor& x) {
    if (!y.same_shape(x)) {
        throw ShapeError("axpy: shape mismatch");
    }
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        y.data[i] += alpha * x.data[i];
    }
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("hadamard: shape mismatch");
    }
    Tensor out = a;
    out.requires_grad = false;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] *= b.data[i];
    }
    return out;
}

}  // namespace sau
