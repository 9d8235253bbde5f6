#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoipomdp {

/// splitmix64 output mixer. Used both as the per-run seed derivation
/// (run seed = splitmix64_at(master, run_index)) and to spin up the
/// per-purpose sub-streams inside an episode, so the whole experiment is
/// a pure function of the master seed.
inline std::uint64_t splitmix64_mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Element `index` of the splitmix64 stream seeded with `seed`.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
    return splitmix64_mix(seed + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Deterministic random source. The engine is std::mt19937_64 (bit-exact
/// across platforms by the standard); uniform and Gaussian variates are
/// produced by explicit, documented transforms rather than the
/// implementation-defined std distributions, so traces are reproducible
/// byte-for-byte given the same seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via the Box-Muller transform; the second variate of
    /// each pair is cached so consumption order stays deterministic.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Index drawn from the categorical distribution given by p[0..n-1].
    /// Probabilities are assumed to sum to ~1; any floating-point residue
    /// falls on the last index.
    int categorical(const double* p, int n) {
        const double u = uniform01();
        double cum = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            cum += p[i];
            if (u < cum) return i;
        }
        return n - 1;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace aoipomdp
