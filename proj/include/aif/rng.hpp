#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace aif {

// Counter-derived pseudo-random stream (xoshiro256** core, splitmix64 seeding).
//
// Streams are value types: a stream is fully determined by (seed, stream_id),
// so any worker can reconstruct the exact same sequence. Distinct stream ids
// under one seed give statistically independent sequences, which is what the
// filters rely on for scheduling-independent reproducibility.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe under log().
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal (Box-Muller, second deviate cached in the stream state).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Gamma(shape, scale), Marsaglia-Tsang squeeze method.
    double gamma(double shape, double scale);

    // Poisson counts; exact for any mean (gamma-splitting above small means).
    std::uint64_t poisson(double mean);

    std::uint64_t binomial(std::uint64_t n, double p);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// splitmix64 finalizer; bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x);

// Purposes for deriving child seeds from a master seed by counter.
enum class SeedTag : std::uint64_t {
    Replication = 1,
    Evaluation = 2,
    IterationFilter = 3,
    StartDraw = 4,
    Lipschitz = 5,
    DataSim = 6,
    Validate = 7,
};

// Deterministic child seed: independent of scheduling, collision-safe by tag+index.
std::uint64_t derive_seed(std::uint64_t base, SeedTag tag, std::uint64_t index);

// Stream-id layout used inside filters: purpose | time step | particle block.
namespace stream_id {

enum Kind : std::uint64_t {
    InitState = 0,
    InitParam = 1,
    Perturb = 2,
    Propagate = 3,
    Resample = 4,
    Measure = 5,
};

constexpr std::uint64_t make(Kind kind, std::uint64_t step, std::uint64_t block) {
    return (static_cast<std::uint64_t>(kind) << 56) | (step << 24) | block;
}

}  // namespace stream_id

}  // namespace aif
