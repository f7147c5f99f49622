#pragma once

#include <cstddef>

#include "sketchreg/matrix.hpp"

namespace sketchreg {

/// Thin SVD A = U diag(sigma) V^T with U n x r, sigma nonincreasing >= 0,
/// V d x r for r = min(n, d). `rank` counts singular values above
/// max(n, d) * sigma_max * 1e-12.
struct ThinFactorization {
    Matrix u;
    std::vector<double> sigma;
    Matrix v;
    std::size_t rank = 0;
};

/// Unnormalized fast Walsh-Hadamard transform, H_1 = [1],
/// H_n = [H_{n/2} H_{n/2}; H_{n/2} -H_{n/2}]. Length must be a power of two.
void fwht_inplace(double* x, std::size_t n);
Vector fwht(const Vector& x);

bool is_power_of_two(std::size_t n);

ThinFactorization thin_svd(const Matrix& a);

/// Moore-Penrose pseudoinverse through thin_svd; singular values at or below
/// the rank threshold are not inverted.
Matrix pinv(const Matrix& a);

/// Largest singular value.
double operator_norm(const Matrix& a);

/// Minimum-norm least-squares solution x = A^+ b. Requires rows >= cols.
Vector exact_lsq(const Matrix& a, const Vector& b);

/// Least-squares solve that also reports the numerical rank and extreme
/// singular values of A. Same solution as exact_lsq; used where the caller
/// needs the rank flag without a second factorization.
struct LsqResult {
    Vector x;
    std::size_t rank = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;  // smallest of the min(n,d) singular values
};
LsqResult lsq_solve(const Matrix& a, const Vector& b);

}  // namespace sketchreg
