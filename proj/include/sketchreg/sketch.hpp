#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sketchreg/dense.hpp"
#include "sketchreg/matrix.hpp"

namespace sketchreg {

enum class SketchFamily { Gaussian, Srht, CountSketch, LeverageScore, Composed };

std::string family_name(SketchFamily f);

/// Immutable description of one sketch S in R^{m x n} together with its
/// realized randomness. All random draws happen at construction, so
/// apply_sketch is deterministic, reentrant and lock-free. Identical
/// (family, m, n, params, seed) descriptors realize identical operators.
class SketchOperator {
  public:
    SketchFamily family() const { return family_; }
    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }
    std::size_t sparsity() const { return s_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::shared_ptr<const SketchOperator>>& children() const {
        return children_;
    }

    std::string to_json() const;

  private:
    SketchFamily family_ = SketchFamily::Gaussian;
    std::size_t m_ = 0, n_ = 0, s_ = 0;
    std::uint64_t seed_ = 0;

    std::vector<double> gauss_entries_;     // Gaussian: m*n row-major
    std::vector<std::int8_t> srht_signs_;   // SRHT: n Rademacher signs
    std::vector<std::uint32_t> srht_rows_;  // SRHT: m sampled rows of H
    std::vector<std::uint32_t> cs_rows_;    // CountSketch: n*s row indices
    std::vector<std::int8_t> cs_signs_;     // CountSketch: n*s signs
    std::vector<std::uint32_t> lev_rows_;   // LeverageScore: m sampled rows
    std::vector<double> lev_weights_;       // LeverageScore: 1/sqrt(m p_i)
    std::vector<std::shared_ptr<const SketchOperator>> children_;

    friend SketchOperator make_gaussian(std::size_t, std::size_t, std::uint64_t);
    friend SketchOperator make_srht(std::size_t, std::size_t, std::uint64_t);
    friend SketchOperator make_countsketch(std::size_t, std::size_t, std::size_t,
                                           std::uint64_t);
    friend SketchOperator make_leverage_sampler(const std::vector<double>&, std::size_t,
                                                std::uint64_t);
    friend SketchOperator compose(const SketchOperator&, const SketchOperator&);
    friend Matrix apply_sketch(const SketchOperator&, const Matrix&);
    friend Matrix materialize_sketch(const SketchOperator&, std::size_t);
    friend class CountSketchSupports;
};

/// Dense sketch with i.i.d. N(0, 1/m) entries.
SketchOperator make_gaussian(std::size_t m, std::size_t n, std::uint64_t seed);

/// Subsampled randomized Hadamard transform, sqrt(n/m) P (H_n/sqrt(n)) D.
/// Columns have unit norm; n must be a power of two. The row sample P is
/// drawn without replacement.
SketchOperator make_srht(std::size_t m, std::size_t n, std::uint64_t seed);

/// Count-Sketch: each column independently gets s distinct rows, each set to
/// +-1/sqrt(s) with equal probability.
SketchOperator make_countsketch(std::size_t m, std::size_t n, std::size_t s,
                                std::uint64_t seed);

/// Leverage scores l_i = ||U_(i)||^2 of the rows of A, via thin_svd.
std::vector<double> leverage_scores(const Matrix& a);

/// Row sampler with m i.i.d. draws proportional to the leverage scores of A,
/// each kept row rescaled by 1/sqrt(m p_i). Rows drawn repeatedly appear
/// repeatedly; zero-score rows are never drawn.
SketchOperator make_leverage_sampler(const Matrix& a, std::size_t m, std::uint64_t seed);
/// Same sampler from precomputed scores, so one factorization can serve many
/// independently seeded samplers.
SketchOperator make_leverage_sampler(const std::vector<double>& scores, std::size_t m,
                                     std::uint64_t seed);

/// Product operator applying `inner` first, then `outer`.
SketchOperator compose(const SketchOperator& outer, const SketchOperator& inner);

/// S * M without materializing S. SRHT runs in O(k n log n), Count-Sketch in
/// O(s n k).
Matrix apply_sketch(const SketchOperator& s, const Matrix& m);
Vector apply_sketch(const SketchOperator& s, const Vector& v);

constexpr std::size_t kMaterializeCap = std::size_t(1) << 14;

/// Explicit m x n matrix of S; throws TooLarge when n exceeds the cap.
Matrix materialize_sketch(const SketchOperator& s, std::size_t cap = kMaterializeCap);

/// Read-only view of a Count-Sketch's supports, used by the event detector.
class CountSketchSupports {
  public:
    explicit CountSketchSupports(const SketchOperator& s);
    std::size_t sparsity() const { return s_; }
    // row indices / signs (+-1) of column j
    const std::uint32_t* rows(std::size_t j) const { return rows_ + j * s_; }
    const std::int8_t* signs(std::size_t j) const { return signs_ + j * s_; }

  private:
    std::size_t s_;
    const std::uint32_t* rows_;
    const std::int8_t* signs_;
};

}  // namespace sketchreg
