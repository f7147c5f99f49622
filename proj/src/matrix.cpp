#include "sketchreg/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sketchreg {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
        throw InvalidDimensions("matrix entries length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
    if (!all_finite()) throw InvalidParams("matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Vector::Vector(std::vector<double> entries) : data_(std::move(entries)) {
    for (double x : data_)
        if (!std::isfinite(x)) throw InvalidParams("vector entries must be finite");
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("matmul: " + std::to_string(a.cols()) +
                                " inner vs " + std::to_string(b.rows()));
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row_ptr(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            const double* bl = b.row_ptr(l);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += ail * bl[j];
        }
    }
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw DimensionMismatch("matvec: shape mismatch");
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += ai[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Vector operator-(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector difference: length mismatch");
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

double norm2(const Vector& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * v[i];
    return std::sqrt(acc);
}

double norminf(const Vector& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::fabs(v[i]));
    return m;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double frobenius_norm(const Matrix& a) {
    double acc = 0.0;
    for (double x : a.data()) acc += x * x;
    return std::sqrt(acc);
}

Matrix matrix_from_column(const Vector& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Vector column_as_vector(const Matrix& a, std::size_t j) {
    if (j >= a.cols()) throw DimensionMismatch("column index out of range");
    Vector v(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) v[i] = a(i, j);
    return v;
}

std::string matrix_to_text(const Matrix& a) {
    std::string out;
    out.reserve(a.rows() * a.cols() * 26 + 32);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu %zu\n", a.rows(), a.cols());
    out += buf;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
            if (j) out += ' ';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

Matrix matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw IoError("matrix text: bad header");
    std::vector<double> entries(rows * cols);
    for (std::size_t k = 0; k < entries.size(); ++k)
        if (!(in >> entries[k])) throw IoError("matrix text: truncated entries");
    return Matrix(rows, cols, std::move(entries));
}

void write_matrix(const std::string& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << matrix_to_text(a);
}

Matrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return matrix_from_text(ss.str());
}

void write_vector(const std::string& path, const Vector& v) {
    write_matrix(path, matrix_from_column(v));
}

Vector read_vector(const std::string& path) {
    Matrix m = read_matrix(path);
    if (m.cols() != 1) throw IoError(path + ": expected a single-column matrix");
    return column_as_vector(m, 0);
}

}  // namespace sketchreg
