#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "sau/rng.hpp"
#include "sau/tensor.hpp"

using namespace sau;

TEST_CASE("prng streams are deterministic per seed") {
    Rng a(7), b(7), c(8);
    bool all_equal = true, any_differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_differs = any_differs || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("uniform draws stay in (0, 1]") {
    Rng rng(123);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_u01();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("seed zero still produces a usable stream") {
    Rng rng(0);
    const auto a = rng.next_u64();
    const auto b = rng.next_u64();
    CHECK(a != 0);
    CHECK(a != b);
}

TEST_CASE("randn is bitwise reproducible for a fixed seed") {
    const Tensor a = Tensor::randn({4}, 7);
    const Tensor b = Tensor::randn({4}, 7);
    CHECK(a.bitwise_equal(b));
}

TEST_CASE("randn sample mean is near zero by the law of large numbers") {
    // Independent statistics: plain accumulation over the sample.
    const Tensor t = Tensor::randn({10000}, 1, 1.0);
    const double mean =
        std::accumulate(t.data.begin(), t.data.end(), 0.0) / static_cast<double>(t.numel());
    CHECK(std::abs(mean) < 0.05);
    double ss = 0.0;
    for (double v : t.data) {
        ss += (v - mean) * (v - mean);
    }
    const double var = ss / static_cast<double>(t.numel() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("normal stddev scales draws") {
    Rng a(5), b(5);
    for (int i = 0; i < 20; ++i) {
        CHECK(a.next_normal(3.0) == doctest::Approx(3.0 * b.next_normal()).epsilon(1e-12));
    }
}

TEST_CASE("shuffle is a seed-deterministic permutation") {
    std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> v2 = v1;
    const std::vector<int> original = v1;
    Rng a(11), b(11);
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == original);
}

TEST_CASE("derive gives distinct substreams per tag") {
    const auto a = Rng::derive(42, "forget");
    const auto b = Rng::derive(42, "retain");
    const auto c = Rng::derive(43, "forget");
    CHECK(a != b);
    CHECK(a != c);
    CHECK(a == Rng::derive(42, "forget"));
}
