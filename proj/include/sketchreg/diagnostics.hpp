#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sketchreg/matrix.hpp"
#include "sketchreg/sketch.hpp"

namespace sketchreg {

/// Distortion of S over a subspace: probe-based bounds plus, when the basis
/// is small enough to factor, the exact extremal singular values of S*basis.
struct DistortionReport {
    double max_overshoot = 0.0;    // max over probes of ||Sx||/||x|| - 1
    double max_undershoot = 0.0;   // 1 - min over probes
    double exact_overshoot = 0.0;  // sigma_max(S basis) - 1
    double exact_undershoot = 0.0; // 1 - sigma_min(S basis)
    std::size_t probes = 0;
    double certified_eps = 0.0;    // from the exact singular values
    std::string to_json() const;
};

/// Probes: `probes` random unit directions, the k basis directions, and all
/// normalized pairwise sums. Requires basis^T basis = I to 1e-8.
DistortionReport embedding_distortion(const SketchOperator& s, const Matrix& basis,
                                      std::size_t probes, std::uint64_t seed);

/// ||A^T S^T S B - A^T B||_F / (||A||_F ||B||_F); 0 when either factor is 0.
double amp_error(const SketchOperator& s, const Matrix& a, const Matrix& b);

/// Largest off-diagonal column inner product of S against c sqrt(log n / m).
struct AipsReport {
    double max_offdiag = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string to_json() const;
};
AipsReport aips_check(const SketchOperator& s, double c = 4.0);

/// Truncation errors of the power-series form of (SA)^+ S.
/// t_norm = ||I - U^T S^T S U||_2 and truncation_errors[k] is the spectral
/// norm of (SA)^+ S minus the series truncated at T^k.
struct NeumannReport {
    double t_norm = 0.0;
    double pinv_s_norm = 0.0;  // ||(SA)^+ S||_2, the scale of the target
    std::vector<double> truncation_errors;
    std::string to_json() const;
};
NeumannReport neumann_validate(const SketchOperator& s, const Matrix& a, std::size_t k_max);

/// Monte-Carlo check of E||A g||^2 = sigma^2 ||A||_F^2.
struct GaussianNormReport {
    double empirical_mean = 0.0;
    double predicted = 0.0;
    double rel_err = 0.0;
    std::string to_json() const;
};
GaussianNormReport gaussian_norm_identity(const Matrix& a, double sigma, std::size_t trials,
                                          std::uint64_t seed);

}  // namespace sketchreg
