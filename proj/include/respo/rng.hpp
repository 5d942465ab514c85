#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

namespace respo {

// Counter-based pseudo-random stream. Each stream is identified by a 64-bit
// key derived from (experiment, seed, stream index); draws are a pure function
// of (key, counter), so independently keyed streams can run in parallel in any
// order and still reproduce bit-for-bit.
class StreamRng {
public:
    StreamRng() = default;
    explicit StreamRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    static std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
        return mix(a ^ (0x9e3779b97f4a7c15ull + b + (a << 6) + (a >> 2)));
    }

    static std::uint64_t hash_name(std::string_view name) {
        // FNV-1a
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() { return mix(key_ + 0x632be59bd9b4e019ull * ++counter_); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller; always consumes exactly two draws so the
    // stream position stays a pure function of the call sequence.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Samples an index from an (unnormalized is tolerated within eps) weight
    // vector by CDF walk; consumes one draw.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: weights must have positive mass");
        double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Stream allocator for one (experiment, seed) pair. Domains keep training,
// evaluation, and initialization draws on disjoint keys.
class RngFactory {
public:
    RngFactory(std::uint64_t experiment_key, std::uint64_t seed)
        : base_(StreamRng::combine(experiment_key, StreamRng::mix(seed))) {}

    RngFactory(std::string_view experiment_name, std::uint64_t seed)
        : RngFactory(StreamRng::hash_name(experiment_name), seed) {}

    StreamRng episode(std::uint64_t index) const { return stream(kEpisode, index); }
    StreamRng eval_episode(std::uint64_t iteration, std::uint64_t index) const {
        return stream(kEval, StreamRng::combine(iteration, index));
    }
    StreamRng init(std::uint64_t tag) const { return stream(kInit, tag); }

private:
    enum Domain : std::uint64_t { kEpisode = 1, kEval = 2, kInit = 3 };

    StreamRng stream(Domain d, std::uint64_t index) const {
        return StreamRng(StreamRng::combine(StreamRng::combine(base_, static_cast<std::uint64_t>(d)), index));
    }

    std::uint64_t base_;
};

}  // namespace respo
