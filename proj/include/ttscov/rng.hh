#pragma once

#include <cstdint>

namespace ttscov {

/// splitmix64: a tiny fully-specified generator, identical on every platform.
/// Standard-library distributions are implementation-defined, which would
/// break cross-platform reproducibility of generated instances.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n) by rejection; n must be positive.
    uint64_t below(uint64_t n) {
        const uint64_t limit = ~0ULL - ~0ULL % n;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

  private:
    uint64_t state_;
};

}  // namespace ttscov
