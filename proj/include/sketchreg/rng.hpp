#pragma once

#include <cstdint>
#include <vector>

namespace sketchreg {

// 64-bit finalizer (splitmix64). Bijective, so distinct inputs never collide.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Key for stream `index` spawned from `master`. Counter construction: the
// master key is mixed with the index through two finalizer rounds, so
// neighboring indices yield unrelated keys.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master ^ 0x6A09E667F3BCC909ULL) + (index + 1) * 0xD1B54A32D192ED03ULL);
}

// Deterministic generator seeded from a single 64-bit key.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : state_(mix64(key ^ 0x2545F4914F6CDD1DULL)) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // in (0, 1]; safe as a log argument
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    // in [0, bound)
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    // +1 or -1 with equal probability
    int sign() { return (next() & 1) ? 1 : -1; }

    // standard normal, Box-Muller with a cached spare
    double normal();

    void fill_normal(double* out, std::size_t count, double scale = 1.0);

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Named stream within a master-seeded experiment. substream(j) gives a child
// stream whose draws are independent of every sibling's.
struct SeedStream {
    std::uint64_t master = 0;
    std::uint64_t index = 0;

    std::uint64_t key() const { return derive_seed(master, index); }
    SeedStream substream(std::uint64_t j) const { return SeedStream{key(), j}; }
    Rng rng() const { return Rng(key()); }
};

// First k entries of a uniform random permutation of [0, n); partial
// Fisher-Yates on a caller-provided pool that is restored afterwards.
void sample_without_replacement(Rng& rng, std::uint32_t n, std::uint32_t k,
                                std::vector<std::uint32_t>& pool, std::uint32_t* out);

}  // namespace sketchreg
