// Seeded RNG with hand-rolled transforms. std::mt19937_64 output is
// specified bit-exactly by the standard; the distribution adaptors are not,
// so we avoid them to keep runs reproducible across toolchains.
#pragma once

#include <cstdint>
#include <random>

#include "capsim/geometry.hpp"

namespace capsim {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform direction on the unit sphere.
    Vec3 unit_vector() {
        const double z = 1.0 - 2.0 * uniform();
        const double phi = 2.0 * kPi * uniform();
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {rho * std::cos(phi), rho * std::sin(phi), z};
    }

    /// Uniform sample from the closed ball of given radius.
    Vec3 ball(double radius) {
        const Vec3 dir = unit_vector();
        const double mag = radius * std::cbrt(uniform());
        return mag * dir;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace capsim
