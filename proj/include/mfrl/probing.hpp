#pragma once

#include <cmath>
#include <cstdint>

namespace mfrl {

/// splitmix64 mixer; used so that noise samples are a pure function of
/// (seed, step) and runs replay bit-identically regardless of call order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class NoiseKind { uniform, multisine };

/// Exploration signal added to the applied correction control during the
/// excitation window. Identically zero from active_steps onward.
struct ProbingNoise {
    NoiseKind kind = NoiseKind::uniform;
    double amplitude = 0.1;
    long active_steps = 250;
    std::uint64_t seed = 1;

    double sample(long k) const {
        if (k < 0 || k >= active_steps || amplitude == 0.0) {
            return 0.0;
        }
        if (kind == NoiseKind::uniform) {
            const std::uint64_t h = splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(k));
            const double u01 = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
            return amplitude * (2.0 * u01 - 1.0);
        }
        // Three incommensurate tones with seeded phases; peak bounded by amplitude.
        const double two_pi = 6.283185307179586476925286766559;
        const double phase1 = two_pi * (static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53);
        const double phase2 = two_pi * (static_cast<double>(splitmix64(seed + 1) >> 11) * 0x1.0p-53);
        const double phase3 = two_pi * (static_cast<double>(splitmix64(seed + 2) >> 11) * 0x1.0p-53);
        const double t = static_cast<double>(k);
        return amplitude / 3.0 *
               (std::sin(0.331 * t + phase1) + std::sin(0.677 * t + phase2) +
                std::sin(1.231 * t + phase3));
    }
};

}  // namespace mfrl
