// Brute-force hit probability of the drift SDE toy model.
// Usage: sde_crude_mc <samples> [seed]
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "dips/parallel.hpp"
#include "dips/rng.hpp"
#include "dips/toy_models.hpp"

int main(int argc, char** argv) {
    const std::uint64_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 100000000ull;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20240101ull;
    const auto key = dips::rng::domain_key(seed, dips::rng::Domain::crude, 0);
    constexpr std::uint64_t kChunk = 1u << 20;
    const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> hits(chunks, 0);
    dips::for_each_index(dips::Execution::parallel, chunks, [&](std::size_t c) {
        const std::uint64_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
        std::uint64_t h = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            const auto k = key.child(i);
            const auto ac = dips::rng::normal_pair(k, 0, 7);
            dips::toy::DriftSde model(ac[0], ac[1]);
            auto s = model.spawn(k.child(1));
            if (model.advance(s, 0.0)) ++h;
        }
        hits[c] = h;
    });
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    const double p = static_cast<double>(total) / static_cast<double>(n);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    std::cout << std::setprecision(10) << "samples " << n << " hits " << total << " p " << p << " se " << se
              << " ci99 [" << p - 2.5758293035489 * se << ", " << p + 2.5758293035489 * se << "]\n";
}
