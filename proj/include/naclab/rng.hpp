#pragma once

#include <cstdint>

namespace naclab {

/// Counter-based 64-bit generator (SplitMix64 state walk). Chosen over the
/// standard-library engines so that sampling is bit-identical across
/// platforms and so that streams can be split deterministically.
///
/// Stream splitting: `Rng::stream(seed, index)` derives the generator for
/// the index-th logical stream (outer NAC iteration, ensemble seed, ...) by
/// folding the index into the seed with a Weyl constant. Distinct indices
/// give statistically independent streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Samples an index from the discrete distribution given by `probs`
    /// (length `n`, sums to ~1) by inverse CDF. Deterministic given state.
    template <typename Vec>
    int sample_discrete(const Vec& probs, int n) {
        double u = next_double();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return n - 1; // guard against rounding in the final bucket
    }

private:
    std::uint64_t state_;
};

} // namespace naclab
