#pragma once
#include <cmath>
#include <cstdint>

// Counter-based splittable random streams. Every variate is a pure function
// of (master seed, stream id, counter), so streams can be sampled lazily, in
// any order, and from any thread, always with identical results. The block
// function is the splitmix64 finalizer over an avalanche-mixed stream key.

namespace cproc {

inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline uint64_t derive_stream_key(uint64_t seed, uint64_t stream_id) {
    return mix64(seed + kGolden * (stream_id + 1));
}

// Replica and cell seeds for estimators hang off the master seed the same way.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    return mix64(seed ^ mix64(index + 0x5851F42D4C957F2DULL));
}

class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream_id)
        : key_(derive_stream_key(seed, stream_id)) {}

    uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

    // Uniform in (0,1]; never 0, so -log() is always finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_exponential(double rate) {
        return -std::log(next_unit()) / rate;
    }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace cproc
