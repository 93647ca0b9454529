#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hyperent {

// Deterministic random source. The standard distribution objects are
// implementation-defined, so all variates are derived here from raw
// mt19937_64 output to keep event streams reproducible across toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    // Independent stream for a work chunk, derived from (seed, chunk)
    // via splitmix64 so chunked generation stays deterministic.
    static Rng for_chunk(uint64_t seed, uint64_t chunk);

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    uint64_t integer(uint64_t n) {
        // Rejection to avoid modulo bias.
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * 3.141592653589793 * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * 3.141592653589793 * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    /// Poisson variate; exact (Knuth) for small means, normal
    /// approximation above 64 where the relative error is negligible
    /// for the count statistics used here.
    int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 64.0) {
            double l = std::exp(-mean);
            int64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > l);
            return k - 1;
        }
        double v = std::round(normal(mean, std::sqrt(mean)));
        return v < 0.0 ? 0 : static_cast<int64_t>(v);
    }

    uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// splitmix64 mix of (seed, index); used to derive per-chunk streams.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng Rng::for_chunk(uint64_t seed, uint64_t chunk) {
    return Rng(derive_seed(seed, chunk));
}

}  // namespace hyperent
