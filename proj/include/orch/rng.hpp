#pragma once

#include <cstdint>
#include <vector>

namespace orch {

// Deterministic random source used by every seeded operation in the project.
//
// Constants are fixed and documented so that two independent implementations
// produce identical byte streams from the same seed:
//   - seed expansion / stream derivation: splitmix64
//     (state += 0x9E3779B97F4A7C15; z ^= z>>30, *0xBF58476D1CE4E5B9; ...)
//   - generator: xoshiro256** (Blackman & Vigna), state seeded by four
//     consecutive splitmix64 outputs
//   - uniform_below(n): 128-bit multiply-shift of the next 64-bit word
//   - next_double(): top 53 bits / 2^53
//
// Stream derivation: derive(tag) reseeds a child generator from
// splitmix64(root_seed XOR (tag * 0xD1B54A32D192ED03)), so each pipeline
// concern (base records, disruptions, multilingual, ...) draws from an
// isolated stream and inserting draws in one concern never shifts another.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

class Rng {
public:
    explicit Rng(uint64_t seed) : root_seed_(seed) {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
    }

    // Child stream for an independent concern. Tags are small documented
    // constants (see stream_tag below).
    Rng derive(uint64_t tag) const {
        SplitMix64 sm(root_seed_ ^ (tag * 0xD1B54A32D192ED03ULL));
        return Rng(sm.next());
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, n). Multiply-shift: deterministic, no rejection loop.
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform_real(double a, double b) { return a + (b - a) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k positions of a shuffled index vector [0, n): a uniform sample
    // without replacement, order-stable for fixed seed.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(k < n ? k : n);
        return idx;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t root_seed_;
    uint64_t s_[4];
};

// Seed for a child stream, consistent with Rng::derive.
inline uint64_t derive_seed(uint64_t root, uint64_t tag) {
    return SplitMix64(root ^ (tag * 0xD1B54A32D192ED03ULL)).next();
}

// Stream tags, one per seeded concern. Values are arbitrary but frozen.
namespace stream_tag {
inline constexpr uint64_t base_records = 1;
inline constexpr uint64_t disruptions = 2;
inline constexpr uint64_t multilingual = 3;
inline constexpr uint64_t missing = 4;
inline constexpr uint64_t outliers = 5;
inline constexpr uint64_t padding = 6;
inline constexpr uint64_t split = 7;
inline constexpr uint64_t net_init = 8;
inline constexpr uint64_t exploration = 9;
inline constexpr uint64_t replay_sample = 10;
inline constexpr uint64_t episode_noise = 11;
inline constexpr uint64_t forest = 12;
inline constexpr uint64_t scenario = 13;
inline constexpr uint64_t eval = 14;
} // namespace stream_tag

} // namespace orch
