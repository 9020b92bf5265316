#pragma once

#include <cstdint>

namespace pack {

// Stafford variant 13 finalizer  -- the SplitMix64 output mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Counter-based splittable generator (SplitMix64).
//
// Reproducibility contract: every independent consumer of randomness (one
// Gibbs chain = one sample slot of one iteration) gets its own stream derived
// from (run_seed, iteration, chain_index). Results therefore never depend on
// how chains are scheduled onto worker threads, and a run is bit-identical
// for any worker count.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng stream(std::uint64_t run_seed, std::uint64_t iteration, std::uint64_t chain) {
        std::uint64_t s = mix64(run_seed + 0x9e3779b97f4a7c15ULL);
        s = mix64(s ^ (iteration + 0xbf58476d1ce4e5b9ULL));
        s = mix64(s ^ (chain + 0x94d049bb133111ebULL));
        return Rng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

}  // namespace pack
