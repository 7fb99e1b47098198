#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "pbqc/angle.hpp"

namespace pbqc {

/// Seed derivation: stream_seed = splitmix64(global_seed XOR fnv1a64(label)).
/// Every module that needs randomness asks for its own labelled stream, so a
/// single global seed replays the whole run and each stream can be replayed
/// on its own.
constexpr std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label) {
    return splitmix64(global_seed ^ fnv1a64(label));
}

/// Thin wrapper over mt19937_64. Draws are taken from raw engine bits rather
/// than std distributions, whose output is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t global_seed, std::string_view label) : engine_(derive_seed(global_seed, label)) {}

    int bit() { return static_cast<int>(engine_() >> 63); }
    Angle8 angle8() { return Angle8(static_cast<int>(engine_() >> 61)); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, n) by rejection; n > 0.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace pbqc
