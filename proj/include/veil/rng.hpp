#ifndef VEIL_RNG_HPP
#define VEIL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "veil/bytes.hpp"

namespace veil {

// Simulation RNG. Simulations must be bit-reproducible from a seed, so all
// randomness goes through this generator instead of <random> distributions
// (whose output is implementation-defined). Core generator: splitmix64,
// which is plenty for simulation/chaff purposes; keys are still drawn from
// it but only feed the (non-adversarial) lab setting.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent stream for a sub-entity (node id, link id, ...).
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
        std::uint64_t s = seed;
        for (std::uint64_t t : tags) s = mix(s ^ (t + 0x9e3779b97f4a7c15ULL));
        return Rng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t uniform_u64(std::uint64_t n) {
        if (n == 0) throw Error("uniform_u64: n must be positive");
        // rejection sampling on the top bits
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    /// Inclusive range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw Error("uniform_int: empty range");
        return lo + static_cast<std::int64_t>(uniform_u64(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_double() < p; }

    /// Exponential with the given mean (> 0).
    double exponential(double mean) {
        double u = uniform_double();
        return -mean * std::log1p(-u);
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        std::size_t i = 0;
        while (i < n) {
            std::uint64_t v = next_u64();
            for (int k = 0; k < 8 && i < n; ++k, ++i) {
                out[i] = static_cast<std::uint8_t>(v >> (8 * k));
            }
        }
        return out;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_u64(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace veil

#endif
