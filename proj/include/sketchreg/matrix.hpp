#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sketchreg/errors.hpp"

namespace sketchreg {

/// Dense row-major matrix of doubles. Entries are validated finite when a
/// matrix is built from external data; internal routines keep the invariant
/// by construction.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense vector; interchange treats it as a matrix with one column.
class Vector {
  public:
    Vector() = default;
    explicit Vector(std::size_t n) : data_(n, 0.0) {}
    explicit Vector(std::vector<double> entries);

    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

  private:
    std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);

Vector operator-(const Vector& a, const Vector& b);

double norm2(const Vector& v);
double norminf(const Vector& v);
double dot(const Vector& a, const Vector& b);
double frobenius_norm(const Matrix& a);

Matrix matrix_from_column(const Vector& v);
Vector column_as_vector(const Matrix& a, std::size_t j = 0);

// Plain-text interchange: first line "rows cols", then one line per row with
// space-separated decimals at 17 significant digits.
void write_matrix(const std::string& path, const Matrix& a);
Matrix read_matrix(const std::string& path);
void write_vector(const std::string& path, const Vector& v);
Vector read_vector(const std::string& path);

std::string matrix_to_text(const Matrix& a);
Matrix matrix_from_text(const std::string& text);

}  // namespace sketchreg
