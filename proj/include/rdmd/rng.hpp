#ifndef RDMD_RNG_HPP
#define RDMD_RNG_HPP

// Reproducible random streams.
//
// Every random quantity in the library is drawn from a std::mt19937_64
// engine (its output sequence is fixed by the C++ standard). Engines are
// never seeded with a user seed directly; the seed is first expanded with
// derive_seed(seed, purpose, index):
//
//   h   = FNV-1a-64(purpose)
//   s0  = seed ^ h
//   out = splitmix64(splitmix64(s0) ^ index)
//
// so that independent consumers ("projector" rows, logistic initial
// conditions, linear-system draws, ...) get decorrelated streams from one
// user-facing seed.
//
// Uniform doubles take the top 53 bits of an engine output. Standard normals
// use the Marsaglia polar method, which only needs log and sqrt.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace rdmd {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                                 std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(purpose)) ^ index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::string_view purpose,
                          std::uint64_t index = 0) {
    return Engine(derive_seed(seed, purpose, index));
}

/// Uniform on [0, 1).
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Engine& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Fair sign, +1 or -1, from the top bit of one engine output.
inline double random_sign(Engine& eng) {
    return (eng() >> 63) ? 1.0 : -1.0;
}

/// Standard normal sampler (Marsaglia polar method). Keeps the second
/// variate of each accepted pair for the next call.
class NormalSampler {
public:
    explicit NormalSampler(Engine& eng) : eng_(&eng) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0, v = 0.0, s = 0.0;
        do {
            u = 2.0 * uniform01(*eng_) - 1.0;
            v = 2.0 * uniform01(*eng_) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

private:
    Engine* eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rdmd

#endif
