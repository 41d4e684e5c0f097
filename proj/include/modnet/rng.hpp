#ifndef MODNET_RNG_HPP
#define MODNET_RNG_HPP

#include <cstdint>
#include <random>

namespace modnet {

// Seeded generator with hand-pinned uniform/normal transforms so a given seed
// produces the same stream on every standard library (std::*_distribution is
// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] inclusive, by rejection.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t span = hi - lo + 1;
        std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return lo + v % span;
    }

    int index(int count) { return static_cast<int>(uniform_int(0, std::uint64_t(count) - 1)); }

    // Standard normal draw, Marsaglia polar method. One value per call; the
    // spare is deliberately discarded to keep the stream a pure function of
    // call count.
    double gaussian() {
        for (;;) {
            double u = 2.0 * uniform() - 1.0;
            double v = 2.0 * uniform() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace modnet

#endif
