#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace aivsim {

/// Named, independently seeded random stream. Conversions to real numbers
/// are done here rather than through <random> distributions so the draws are
/// identical across standard library implementations.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0)
        : engine_(mix(seed, stream, index)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t mix(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
        for (unsigned char c : stream) {
            h = (h ^ c) * 0x100000001b3ULL;
        }
        return splitmix(splitmix(seed ^ h) + index);
    }

    std::mt19937_64 engine_;
};

}  // namespace aivsim
