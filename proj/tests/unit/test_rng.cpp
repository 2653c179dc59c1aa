#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dips/rng.hpp"

using namespace dips::rng;

TEST_CASE("philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("child keys are deterministic and distinct") {
    const auto root = root_key(42);
    CHECK(root.child(3) == root_key(42).child(3));
    CHECK(root.child({1, 2}) == root.child(1).child(2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(root.child(i).value);
    CHECK(seen.size() == 10000);
    CHECK(domain_key(1, Domain::search, 0) != domain_key(1, Domain::particles, 0));
    CHECK(domain_key(1, Domain::search, 0) != domain_key(1, Domain::search, 1));
}

TEST_CASE("uniforms stay inside (0, 1) and have the right moments") {
    const auto key = root_key(7);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = uniform(key, static_cast<std::uint64_t>(i));
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.005));
    CHECK(sum2 / n - mean * mean == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normal pairs have unit variance and no correlation") {
    const auto key = root_key(9);
    double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto z = normal_pair(key, static_cast<std::uint64_t>(i), 0);
        s0 += z[0];
        s1 += z[1];
        s00 += z[0] * z[0];
        s11 += z[1] * z[1];
        s01 += z[0] * z[1];
    }
    CHECK(std::abs(s0 / n) < 0.01);
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s00 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s11 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s01 / n) < 0.01);
}

TEST_CASE("draws are pure functions of key and counter") {
    const auto key = root_key(11).child(5);
    CHECK(uniform(key, 17, 2) == uniform(key, 17, 2));
    CHECK(uniform(key, 17, 2) != uniform(key, 18, 2));
    CHECK(uniform(key, 17, 2) != uniform(key, 17, 3));
}
