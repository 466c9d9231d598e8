#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Reproducible random streams.  std::mt19937_64 is fully specified by the
// standard, so sequences are identical across platforms; the distributions
// are hand-rolled because std::normal_distribution & friends are not.

namespace krlab::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed for one (cell, trial) of an experiment
// grid.  Counter-based so any cell can be reproduced without running the rest.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t cell, std::uint64_t trial) {
    std::uint64_t s = root;
    std::uint64_t a = splitmix64(s);
    s ^= cell * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    s ^= trial + 0xd1b54a32d192ed03ULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b + 0x2545f4914f6cdd1dULL * c);
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on (0, 1]; never returns 0 so it is safe under log().
    double u01() {
        return static_cast<double>((eng_() >> 11) + 1) * (1.0 / 9007199254740992.0);
    }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one spare cached.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // Unbiased integer in [0, k) by rejection; k >= 1.
    std::uint64_t below(std::uint64_t k) {
        if (k <= 1) return 0;
        std::uint64_t mask = k - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t v;
        do {
            v = eng_() & mask;
        } while (v >= k);
        return v;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace krlab::rng
