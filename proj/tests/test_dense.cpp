#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sketchreg/dense.hpp"
#include "sketchreg/matrix.hpp"

using namespace sketchreg;

TEST_SUITE_BEGIN("dense");

TEST_CASE("fwht matches the Hadamard recursion on small fixtures") {
    Vector e1(std::vector<double>{1, 0, 0, 0});
    Vector y = fwht(e1);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(1.0));

    Vector ones(std::vector<double>{1, 1, 1, 1});
    Vector z = fwht(ones);
    CHECK(z[0] == doctest::Approx(4.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(z[i] == doctest::Approx(0.0));
}

TEST_CASE("fwht rejects non power of two lengths") {
    Vector x(std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(fwht(x), NonPowerOfTwo);
}

TEST_CASE("fwht involution: fwht(fwht(x)) = n x") {
    for (std::size_t n : {std::size_t(1), std::size_t(2), std::size_t(4), std::size_t(64),
                          std::size_t(1) << 10, std::size_t(1) << 14}) {
        Vector x = oracle::random_vector(n, 1000 + n);
        Vector y = fwht(fwht(x));
        double max_rel = 0.0;
        const double scale = norminf(x) * static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            max_rel = std::max(max_rel, std::fabs(y[i] - static_cast<double>(n) * x[i]));
        CHECK(max_rel <= 1e-9 * std::max(1.0, scale));
    }
}

TEST_CASE("fwht agrees with the popcount definition of H_n") {
    const std::size_t n = 32;
    Vector x = oracle::random_vector(n, 7);
    Vector y = fwht(x);
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const int par = __builtin_popcountll(r & j) & 1;
            acc += (par ? -1.0 : 1.0) * x[j];
        }
        CHECK(y[r] == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("thin_svd on fixtures") {
    SUBCASE("identity") {
        ThinFactorization f = thin_svd(Matrix::identity(3));
        CHECK(f.rank == 3);
        for (double s : f.sigma) CHECK(s == doctest::Approx(1.0));
    }
    SUBCASE("zero matrix") {
        ThinFactorization f = thin_svd(Matrix(2, 2));
        CHECK(f.rank == 0);
        for (double s : f.sigma) CHECK(s == doctest::Approx(0.0));
    }
    SUBCASE("known diagonal singular values") {
        Matrix a(3, 2, {3, 0, 0, 4, 0, 0});
        ThinFactorization f = thin_svd(a);
        REQUIRE(f.sigma.size() == 2);
        CHECK(f.sigma[0] == doctest::Approx(4.0));
        CHECK(f.sigma[1] == doctest::Approx(3.0));
        CHECK(f.rank == 2);
    }
}

static void check_factorization(const Matrix& a) {
    ThinFactorization f = thin_svd(a);
    const std::size_t r = f.sigma.size();
    REQUIRE(f.u.rows() == a.rows());
    REQUIRE(f.u.cols() == r);
    REQUIRE(f.v.rows() == a.cols());

    // reconstruction
    Matrix us(f.u.rows(), r);
    for (std::size_t i = 0; i < f.u.rows(); ++i)
        for (std::size_t k = 0; k < r; ++k) us(i, k) = f.u(i, k) * f.sigma[k];
    Matrix rec = oracle::matmul_naive(us, transpose(f.v));
    double err = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double d = rec(i, j) - a(i, j);
            err += d * d;
        }
    CHECK(std::sqrt(err) <= 1e-9 * std::max(1.0, frobenius_norm(a)));

    // orthonormal U columns
    Matrix utu = oracle::matmul_naive(transpose(f.u), f.u);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            CHECK(std::fabs(utu(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-10);

    // ordering
    for (std::size_t i = 0; i + 1 < r; ++i) {
        CHECK(f.sigma[i] >= f.sigma[i + 1]);
        CHECK(f.sigma[i + 1] >= 0.0);
    }
}

TEST_CASE("thin_svd: reconstruction and orthogonality over random shapes") {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{5, 3},
                              {3, 5},
                              {4, 4},
                              {1, 1},
                              {16, 2},
                              {40, 7},
                              {7, 40},
                              {128, 16}}) {
        check_factorization(oracle::random_matrix(rows, cols, 31 * rows + cols));
    }
}

TEST_CASE("thin_svd singular values match the Jacobi eigenvalue oracle") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        Matrix a = oracle::random_matrix(9, 4, seed);
        ThinFactorization f = thin_svd(a);
        Matrix gram = oracle::matmul_naive(transpose(a), a);
        auto ev = oracle::jacobi_eigenvalues(gram);
        REQUIRE(ev.size() == f.sigma.size());
        for (std::size_t i = 0; i < ev.size(); ++i)
            CHECK(f.sigma[i] == doctest::Approx(std::sqrt(std::max(0.0, ev[i]))).epsilon(1e-9));
    }
}

TEST_CASE("thin_svd detects rank deficiency") {
    // two identical columns
    Matrix a(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        a(i, 0) = static_cast<double>(i + 1);
        a(i, 1) = static_cast<double>(i + 1);
        a(i, 2) = (i == 0) ? 1.0 : 0.0;
    }
    CHECK(thin_svd(a).rank == 2);
}

TEST_CASE("pinv fixtures and Moore-Penrose identities") {
    SUBCASE("identity") {
        Matrix p = pinv(Matrix::identity(3));
        CHECK(oracle::max_abs_diff(p, Matrix::identity(3)) <= 1e-12);
    }
    SUBCASE("scalar") {
        Matrix a(1, 1, {2.0});
        CHECK(pinv(a)(0, 0) == doctest::Approx(0.5));
    }
    SUBCASE("full-rank 6x3 satisfies all four identities") {
        Matrix a = oracle::random_matrix(6, 3, 99);
        Matrix p = pinv(a);
        Matrix apa = oracle::matmul_naive(oracle::matmul_naive(a, p), a);
        Matrix pap = oracle::matmul_naive(oracle::matmul_naive(p, a), p);
        CHECK(oracle::rel_frob_diff(a, apa) <= 1e-9);
        CHECK(oracle::rel_frob_diff(p, pap) <= 1e-9);
        Matrix ap = oracle::matmul_naive(a, p);
        Matrix pa = oracle::matmul_naive(p, a);
        CHECK(oracle::rel_frob_diff(ap, transpose(ap)) <= 1e-9);
        CHECK(oracle::rel_frob_diff(pa, transpose(pa)) <= 1e-9);
    }
    SUBCASE("rank-deficient matrix still satisfies the identities") {
        Matrix a(5, 3);
        for (std::size_t i = 0; i < 5; ++i) {
            a(i, 0) = static_cast<double>(i);
            a(i, 1) = 2.0 * static_cast<double>(i);
            a(i, 2) = std::sin(static_cast<double>(i));
        }
        Matrix p = pinv(a);
        Matrix apa = oracle::matmul_naive(oracle::matmul_naive(a, p), a);
        CHECK(oracle::rel_frob_diff(a, apa) <= 1e-9);
    }
}

TEST_CASE("exact_lsq fixtures") {
    SUBCASE("identity system") {
        Vector x = exact_lsq(Matrix::identity(2), Vector(std::vector<double>{3, 4}));
        CHECK(x[0] == doctest::Approx(3.0));
        CHECK(x[1] == doctest::Approx(4.0));
    }
    SUBCASE("mean of targets") {
        Matrix a(2, 1, {1, 1});
        Vector x = exact_lsq(a, Vector(std::vector<double>{0, 2}));
        CHECK(x[0] == doctest::Approx(1.0));
    }
    SUBCASE("requires rows >= cols") {
        Matrix a(1, 2, {1, 2});
        CHECK_THROWS_AS(exact_lsq(a, Vector(std::vector<double>{1})), InvalidDimensions);
    }
}

TEST_CASE("exact_lsq residual is orthogonal to the column space") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const std::size_t n = 50, d = 6;
        Matrix a = oracle::random_matrix(n, d, seed);
        Vector b = oracle::random_vector(n, seed + 100);
        Vector x = exact_lsq(a, b);
        Vector res = matvec(a, x) - b;
        Vector atr = matvec(transpose(a), res);
        CHECK(norm2(atr) <= 1e-8 * frobenius_norm(a) * norm2(b));
    }
}

TEST_CASE("lsq_solve agrees with pinv applied to b, including rank-deficient") {
    Matrix a(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        a(i, 0) = static_cast<double>(i + 1);
        a(i, 1) = 3.0 * static_cast<double>(i + 1);  // dependent column
        a(i, 2) = std::cos(static_cast<double>(i));
    }
    Vector b = oracle::random_vector(6, 42);
    LsqResult r = lsq_solve(a, b);
    CHECK(r.rank == 2);
    Vector via_pinv = matvec(pinv(a), b);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(r.x[i] == doctest::Approx(via_pinv[i]).epsilon(1e-9));
}

TEST_CASE("operator_norm") {
    CHECK(operator_norm(Matrix::identity(4)) == doctest::Approx(1.0));
    Matrix d2(2, 2, {1, 0, 0, 5});
    CHECK(operator_norm(d2) == doctest::Approx(5.0));

    // 5x3 sample against the eigendecomposition of A^T A
    Matrix a = oracle::random_matrix(5, 3, 77);
    auto ev = oracle::jacobi_eigenvalues(oracle::matmul_naive(transpose(a), a));
    CHECK(operator_norm(a) == doctest::Approx(std::sqrt(ev[0])).epsilon(1e-9));
}

TEST_CASE("plain-text matrix round trip preserves bits") {
    Matrix a = oracle::random_matrix(5, 4, 123);
    a(0, 0) = 1.0 / 3.0;
    a(1, 2) = -0.0;
    Matrix back = matrix_from_text(matrix_to_text(a));
    REQUIRE(back.rows() == a.rows());
    REQUIRE(back.cols() == a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) CHECK(back(i, j) == a(i, j));
}

TEST_CASE("matrix construction validates shape and finiteness") {
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0}), InvalidDimensions);
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), InvalidParams);
}

TEST_SUITE_END();
