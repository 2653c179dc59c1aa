#pragma once

// Counter-based random streams.
//
// Every random draw in the library is a pure function of (key, counter).
// Keys are derived hierarchically from a single root seed by hashing
// identifiers (module, run, box, stage, particle), so results never depend
// on how work is scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace dips::rng {

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Identifies one independent stream family.
struct StreamKey {
    std::uint64_t value = 0;

    // Child key for a sub-component; distinct ids give unrelated streams.
    StreamKey child(std::uint64_t id) const noexcept {
        return StreamKey{splitmix64(value ^ splitmix64(id + 0x632BE59BD9B4E019ull))};
    }

    StreamKey child(std::initializer_list<std::uint64_t> path) const noexcept {
        StreamKey k = *this;
        for (auto id : path) k = k.child(id);
        return k;
    }

    friend bool operator==(StreamKey, StreamKey) = default;
};

// Domain tags for the first level of key derivation.
enum class Domain : std::uint64_t {
    search = 1,
    particles = 2,
    resample = 3,
    extrapolation = 4,
    crude = 5,
    spawn = 6,
    turbulence = 7,
};

inline StreamKey root_key(std::uint64_t seed) noexcept { return StreamKey{splitmix64(seed)}; }

inline StreamKey domain_key(std::uint64_t seed, Domain d, std::uint64_t run) noexcept {
    return root_key(seed).child({static_cast<std::uint64_t>(d), run});
}

// 128 random bits at (key, counter, lane).
inline std::array<std::uint64_t, 2> bits128(StreamKey key, std::uint64_t counter, std::uint32_t lane) noexcept {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), lane, 0u},
        {static_cast<std::uint32_t>(key.value), static_cast<std::uint32_t>(key.value >> 32)});
    return {(std::uint64_t{out[0]} << 32) | out[1], (std::uint64_t{out[2]} << 32) | out[3]};
}

// Uniform on the open interval (0, 1).
inline double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Two independent standard normals (Box-Muller) at (key, counter, lane).
inline std::array<double, 2> normal_pair(StreamKey key, std::uint64_t counter, std::uint32_t lane) noexcept {
    const auto b = bits128(key, counter, lane);
    const double r = std::sqrt(-2.0 * std::log(to_open_unit(b[0])));
    const double a = 2.0 * std::numbers::pi * to_open_unit(b[1]);
    return {r * std::cos(a), r * std::sin(a)};
}

inline double uniform(StreamKey key, std::uint64_t counter, std::uint32_t lane = 0) noexcept {
    return to_open_unit(bits128(key, counter, lane)[0]);
}

// Sequential convenience wrapper; the position is part of the value so a
// copied stream replays the same numbers.
class Stream {
public:
    Stream() = default;
    explicit Stream(StreamKey key) : key_(key) {}

    double uniform() noexcept { return rng::uniform(key_, counter_++); }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const auto p = normal_pair(key_, counter_++, 1);
        spare_ = p[1];
        has_spare_ = true;
        return p[0];
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        const auto b = bits128(key_, counter_++, 2)[0];
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(b) * n) >> 64);
    }

    StreamKey key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    StreamKey key_{};
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dips::rng
