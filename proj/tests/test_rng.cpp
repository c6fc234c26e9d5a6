#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "stepwise/rng.hpp"

using stepwise::Rng;

TEST_CASE("same seed reproduces the exact stream") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    for (int i = 0; i < 1000; ++i) CHECK(a.uniform01() == b.uniform01());
    for (int i = 0; i < 1000; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("different seeds decorrelate") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 1000; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform01 lands in [0,1) with a sane mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform01();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform(lo,hi) respects the box") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.uniform(-3.0, 5.5);
        REQUIRE(x >= -3.0);
        REQUIRE(x <= 5.5);
    }
}

TEST_CASE("normal() has roughly standard moments") {
    Rng rng(42);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("generator is portable: frozen values for a known seed") {
    // Pinned output of the documented algorithm (xoshiro256++ seeded via
    // splitmix64), cross-checked against an independent implementation of
    // the published reference code.  If these change, reproducibility across
    // platforms broke.
    Rng rng(1);
    CHECK(rng.next_u64() == 14971601782005023387ULL);
    CHECK(rng.next_u64() == 13781649495232077965ULL);
    CHECK(rng.next_u64() == 1847458086238483744ULL);

    Rng u(12345);
    CHECK(u.uniform01() == 0.5530478066930038);
    CHECK(u.uniform01() == 0.20495565689034478);
}
