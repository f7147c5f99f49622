#pragma once

#include <cstdint>
#include <optional>

#include "sketchreg/regress.hpp"
#include "sketchreg/sketch.hpp"

namespace sketchreg {

/// Count-Sketch adversarial construction: A = [I_d; 0], b carries 1/sqrt(d)
/// on the first d coordinates and 1/sqrt(alpha) on the next alpha.
struct CsAdversarialParams {
    std::size_t d = 0;
    std::size_t alpha = 0;  // 1 <= alpha < d
    std::size_t n = 0;      // >= d + alpha
};

RegressionInstance gen_cs_adversarial(const CsAdversarialParams& p);

/// Support configuration under which the sketched solution's witness
/// coordinate moves by exactly 1/(s sqrt(alpha)).
struct EventReport {
    std::optional<std::size_t> witness_column;
    bool event1 = false;
    bool event2 = false;
    std::optional<std::size_t> intersect_row;
    std::optional<int> intersect_sign;  // sign(S[r,j] * S[r,k'])
};

/// Scans columns j in [d] in ascending order for the first satisfying both
/// events: (I) support disjoint from every other first-d column, and
/// (II) exactly one column in {d..d+alpha-1} meets it in exactly one row,
/// all others disjoint.
EventReport detect_events(const SketchOperator& s, const CsAdversarialParams& p);

/// Leverage-score adversarial construction: (1/sqrt(d)) I_d stacked on L
/// copies of (1/sqrt(alpha d)) I_d, which makes every column unit norm
/// (1/d + L/(alpha d) = 1, so L = alpha (d-1)).
struct LevAdversarialParams {
    std::size_t d = 0;
    std::size_t alpha = 0;
    std::size_t beta = 0;  // 1 <= beta < d
    std::size_t pad_to = 0;  // optional: pad with zero rows up to this n

    std::size_t scaled_blocks() const { return alpha * (d - 1); }  // L
    std::size_t natural_n() const { return d * (scaled_blocks() + 1); }
    bool operative_regime() const { return alpha * beta >= d; }
};

RegressionInstance gen_lev_adversarial(const LevAdversarialParams& p);

/// Hard distribution D1: A is d Haar-random orthonormal columns, b a unit
/// vector orthogonal to all of them; x* = 0.
RegressionInstance gen_lower_bound_d1(std::size_t n, std::size_t d, std::uint64_t seed);

/// Hard distribution D2: A = [I_d; 0], b a random unit vector;
/// x* = b restricted to the first d coordinates.
RegressionInstance gen_lower_bound_d2(std::size_t n, std::size_t d, std::uint64_t seed);

/// Benign baseline: i.i.d. normal A, planted x0, b = A x0 + noise * g.
RegressionInstance gen_random_wellcond(std::size_t n, std::size_t d, double noise,
                                       std::uint64_t seed);

/// Appends zero rows so the row count becomes the next power of two (or
/// `target` when given). Padding lives in the data, not in the sketches.
RegressionInstance pad_to_power_of_two(RegressionInstance inst, std::size_t target = 0);

}  // namespace sketchreg
