#include "sketchreg/rng.hpp"

#include <cmath>

namespace sketchreg {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void Rng::fill_normal(double* out, std::size_t count, double scale) {
    for (std::size_t i = 0; i < count; ++i) out[i] = scale * normal();
}

void sample_without_replacement(Rng& rng, std::uint32_t n, std::uint32_t k,
                                std::vector<std::uint32_t>& pool, std::uint32_t* out) {
    if (pool.size() != n) {
        pool.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
    }
    // k swap positions are recorded so the pool can be put back; this keeps
    // repeated draws O(k) instead of O(n).
    static thread_local std::vector<std::uint32_t> pivots;
    pivots.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const std::uint32_t j = i + static_cast<std::uint32_t>(rng.below(n - i));
        pivots[i] = j;
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
    for (std::uint32_t i = k; i-- > 0;) std::swap(pool[i], pool[pivots[i]]);
}

}  // namespace sketchreg
