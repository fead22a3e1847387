#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace kfs {

// Deterministic random source used everywhere randomness is needed.
//
// Protocol: a 64-bit experiment seed is combined with a purpose tag via
// splitmix64(seed ^ tag) to seed an mt19937_64 stream. Gaussian variates
// come from the Marsaglia polar method and uniform integers from rejection
// sampling, both implemented here rather than through std distributions so
// that streams are reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}
    Rng(uint64_t seed, uint64_t tag) : engine_(splitmix64(seed ^ tag)) {}

    static uint64_t splitmix64(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) via rejection, n >= 1.
    uint64_t uniform_int(uint64_t n) {
        const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via the Marsaglia polar method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // In-place Fisher-Yates shuffle with explicit index draws.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Purpose tags for deriving independent streams from one experiment seed.
namespace seed_tag {
constexpr uint64_t kNoise = 0x6e6f697365ULL;       // synthetic noise
constexpr uint64_t kInit = 0x696e6974ULL;          // parameter init
constexpr uint64_t kShuffle = 0x7368756666ULL;     // batch shuffling
constexpr uint64_t kTrial = 0x747269616cULL;       // Monte Carlo trials
}  // namespace seed_tag

}  // namespace kfs
