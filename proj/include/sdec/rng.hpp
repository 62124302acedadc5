#ifndef SDEC_RNG_HPP
#define SDEC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sdec {

// Counter-based random numbers: every draw is a pure function of
// (seed, counter), so streams can be replayed, split across threads and
// refined (a path simulated at dt/2 reuses the same underlying draws as
// the dt path by summing adjacent increments).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (0x632be59bd9b4e019ULL * (stream + 1)));
}

// Uniform in (0, 1); never returns 0 so it is safe inside log().
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t bits = splitmix64(splitmix64(seed ^ 0x8e9c1f2ab35af1d5ULL) + counter);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal draw, Box-Muller on two counter-indexed uniforms.
inline double counter_normal(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = counter_uniform(seed, 2 * counter);
    const double u2 = counter_uniform(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Small stateful wrapper for code that wants sequential draws.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(mix_seed(seed, stream)) {}

    double uniform() { return counter_uniform(seed_, next_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return counter_normal(seed_, next_++); }
    // Integer in [0, n)
    std::uint64_t index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::uint64_t seed_;
    std::uint64_t next_ = 0;
};

} // namespace sdec

#endif
