#include "doctest.h"
#include "sau/errors.hpp"
#include "sau/tensor.hpp"

using namespace sau;

TEST_CASE("zeros fills the shape with zeros") {
    const Tensor t = Tensor::zeros({2, 2});
    CHECK(t.numel() == 4);
    for (double v : t.data) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(Tensor::zeros({}), ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({2, 0}), ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({-1}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(Tensor::randn({0}, 1), ShapeError);
}

TEST_CASE("axpy and hadamard") {
    Tensor y = Tensor::row({1.0, 2.0, 3.0});
    const Tensor x = Tensor::row({10.0, 20.0, 30.0});
    axpy(y, 0.5, x);
    CHECK(y.data == std::vector<double>{6.0, 12.0, 18.0});
    const Tensor h = hadamard(y, x);
    CHECK(h.data == std::vector<double>{60.0, 240.0, 540.0});
    const Tensor wrong = Tensor::row({1.0});
    CHECK_THROWS_AS(axpy(y, 1.0, wrong), ShapeError);
}

TEST_CASE("bitwise equality distinguishes -0.0 payloads") {
    Tensor a = Tensor::row({0.0});
    Tensor b = Tensor::row({-0.0});
    CHECK(!a.bitwise_equal(b));
    CHECK(a.bitwise_equal(Tensor::row({0.0})));
}
