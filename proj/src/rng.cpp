#include "aif/rng.hpp"

#include <stdexcept>

namespace aif {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, SeedTag tag, std::uint64_t index) {
    std::uint64_t h = mix64(base + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(tag));
    return mix64(h ^ (index + 0x9e3779b97f4a7c15ULL));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t w = mix64(seed);
    w ^= mix64(stream_id + 0xbf58476d1ce4e5b9ULL);
    bool all_zero = true;
    for (auto& s : state_) {
        w += 0x9e3779b97f4a7c15ULL;
        s = mix64(w);
        all_zero = all_zero && s == 0;
    }
    if (all_zero) state_[0] = 1;  // xoshiro forbids the all-zero state
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

double RngStream::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale >= 0.0))
        throw std::invalid_argument("gamma: shape must be > 0 and scale >= 0");
    if (shape < 1.0) {
        const double u = uniform_pos();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

std::uint64_t RngStream::binomial(std::uint64_t n, double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i)
        if (uniform() < p) ++k;
    return k;
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    std::uint64_t n = 0;
    // Gamma splitting: the time of the m-th unit-rate arrival is Gamma(m, 1).
    while (mean > 50.0) {
        const double m = std::floor(mean * 0.875);
        const double g = gamma(m, 1.0);
        if (g > mean) {
            // m-th arrival overshot the window; earlier m-1 arrivals are
            // iid uniform on [0, g], so the count inside is binomial.
            return n + binomial(static_cast<std::uint64_t>(m) - 1, mean / g);
        }
        n += static_cast<std::uint64_t>(m);
        mean -= g;
    }
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::uint64_t k = 0;
    do {
        ++k;
        prod *= uniform_pos();
    } while (prod > limit);
    return n + (k - 1);
}

}  // namespace aif
