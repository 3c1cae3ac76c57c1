#ifndef EMBROBUST_RNG_HPP
#define EMBROBUST_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

/**
 * @file rng.hpp
 *
 * @brief Portable seeded random draws.
 *
 * The standard distributions are implementation-defined, so everything that must be
 * reproducible across standard libraries goes through these helpers instead.
 * Only the raw `std::mt19937_64` stream is relied upon.
 */

namespace embrobust {

/**
 * @brief Seeded generator with portable uniform, normal and integer draws.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::uint64_t next() { return engine(); }

    /**
     * @return Uniform draw in [0, 1) with 53 bits of precision.
     */
    double uniform() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }

    /**
     * @return Standard normal draw via the Box-Muller transform.
     */
    double normal() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u1 = 0;
        do {
            u1 = uniform();
        } while (u1 <= 0);
        double u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        spare = radius * std::sin(angle);
        has_spare = true;
        return radius * std::cos(angle);
    }

    /**
     * @return Uniform integer in [0, bound), unbiased by rejection.
     */
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) {
            return 0;
        }
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw = 0;
        do {
            draw = engine();
        } while (draw >= limit);
        return draw % bound;
    }

    /**
     * Fisher-Yates shuffle.
     */
    template<typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine;
    double spare = 0;
    bool has_spare = false;
};

/**
 * Derive a well-mixed child seed from a base seed and a stream index (splitmix64 finalizer).
 */
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}

#endif
