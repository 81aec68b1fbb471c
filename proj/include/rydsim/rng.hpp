#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "rydsim/vec3.hpp"

namespace rydsim {

/// Counter-based stream splitting: stream k of master seed s is an
/// independent generator, so trajectory k's randomness does not depend on
/// scheduling or worker count. The generator is a splitmix64-seeded
/// xoshiro256**; sampling routines are hand-rolled so byte-level
/// reproducibility does not depend on the standard library.
class Rng {
  public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t master_seed, std::uint64_t stream) {
        std::uint64_t x = master_seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        for (auto& si : s_) si = splitmix64(x);
        // Warm up so nearby streams decorrelate.
        for (int i = 0; i < 8; ++i) next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (cached pair).
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * uniform();
        cache_ = r * std::sin(phi);
        have_cache_ = true;
        return r * std::cos(phi);
    }

    /// Uniform point inside the sphere of given radius.
    Vec3 in_sphere(double radius) {
        while (true) {
            Vec3 v{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            if (norm2(v) <= 1.0) return v * radius;
        }
    }

    /// Uniformly random rotation matrix applied to v (via random unit
    /// quaternion).
    Vec3 random_rotation_axis() {
        while (true) {
            Vec3 v{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            const double n2 = norm2(v);
            if (n2 > 1e-12 && n2 <= 1.0) return v * (1.0 / std::sqrt(n2));
        }
    }

  private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t s_[4];
    bool have_cache_ = false;
    double cache_ = 0.0;
};

}  // namespace rydsim
