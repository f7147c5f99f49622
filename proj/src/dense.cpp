#include "sketchreg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sketchreg {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

// Iterative butterflies for blocks that fit in cache.
void fwht_small(double* x, std::size_t n) {
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double s = x[j];
                const double t = x[j + h];
                x[j] = s + t;
                x[j + h] = s - t;
            }
        }
    }
}

constexpr std::size_t kFwhtBlock = 4096;

void fwht_recursive(double* x, std::size_t n) {
    if (n <= kFwhtBlock) {
        fwht_small(x, n);
        return;
    }
    const std::size_t h = n / 2;
    fwht_recursive(x, h);
    fwht_recursive(x + h, h);
    for (std::size_t i = 0; i < h; ++i) {
        const double s = x[i];
        const double t = x[i + h];
        x[i] = s + t;
        x[i + h] = s - t;
    }
}

}  // namespace

void fwht_inplace(double* x, std::size_t n) {
    if (!is_power_of_two(n)) throw NonPowerOfTwo("fwht: length must be a power of two");
    fwht_recursive(x, n);
}

Vector fwht(const Vector& x) {
    Vector y = x;
    fwht_inplace(y.data().data(), y.size());
    return y;
}

namespace {

double pythag(double a, double b) {
    const double absa = std::fabs(a);
    const double absb = std::fabs(b);
    if (absa > absb) {
        const double r = absb / absa;
        return absa * std::sqrt(1.0 + r * r);
    }
    if (absb == 0.0) return 0.0;
    const double r = absa / absb;
    return absb * std::sqrt(1.0 + r * r);
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::fabs(a) : -std::fabs(a); }

// Golub-Reinsch SVD of an m x n matrix with m >= n, row-major. On return `a`
// holds U (m x n), `w` the singular values and `v` is n x n (not transposed).
// Values are nonnegative but unsorted.
void svd_golub_reinsch(std::size_t m, std::size_t n, std::vector<double>& a,
                       std::vector<double>& w, std::vector<double>& v) {
    const std::size_t N = n;
    auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * N + j]; };
    auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * N + j]; };

    w.assign(n, 0.0);
    v.assign(n * n, 0.0);
    if (n == 0 || m == 0) return;

    std::vector<double> rv1(n, 0.0);
    double g = 0.0, scale = 0.0, anorm = 0.0;
    std::size_t l = 0;

    // Householder reduction to bidiagonal form.
    for (std::size_t i = 0; i < n; ++i) {
        l = i + 1;
        rv1[i] = scale * g;
        g = scale = 0.0;
        double s = 0.0;
        if (i < m) {
            for (std::size_t k = i; k < m; ++k) scale += std::fabs(A(k, i));
            if (scale != 0.0) {
                for (std::size_t k = i; k < m; ++k) {
                    A(k, i) /= scale;
                    s += A(k, i) * A(k, i);
                }
                double f = A(i, i);
                g = -sign_of(std::sqrt(s), f);
                const double h = f * g - s;
                A(i, i) = f - g;
                for (std::size_t j = l; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = i; k < m; ++k) acc += A(k, i) * A(k, j);
                    f = acc / h;
                    for (std::size_t k = i; k < m; ++k) A(k, j) += f * A(k, i);
                }
                for (std::size_t k = i; k < m; ++k) A(k, i) *= scale;
            }
        }
        w[i] = scale * g;
        g = scale = 0.0;
        s = 0.0;
        if (i < m && i + 1 != n) {
            for (std::size_t k = l; k < n; ++k) scale += std::fabs(A(i, k));
            if (scale != 0.0) {
                for (std::size_t k = l; k < n; ++k) {
                    A(i, k) /= scale;
                    s += A(i, k) * A(i, k);
                }
                double f = A(i, l);
                g = -sign_of(std::sqrt(s), f);
                const double h = f * g - s;
                A(i, l) = f - g;
                for (std::size_t k = l; k < n; ++k) rv1[k] = A(i, k) / h;
                for (std::size_t j = l; j < m; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = l; k < n; ++k) acc += A(j, k) * A(i, k);
                    for (std::size_t k = l; k < n; ++k) A(j, k) += acc * rv1[k];
                }
                for (std::size_t k = l; k < n; ++k) A(i, k) *= scale;
            }
        }
        anorm = std::max(anorm, std::fabs(w[i]) + std::fabs(rv1[i]));
    }

    // Accumulate right-hand transformations.
    for (std::size_t ii = n; ii-- > 0;) {
        const std::size_t i = ii;
        if (i + 1 < n) {
            if (g != 0.0) {
                for (std::size_t j = l; j < n; ++j) V(j, i) = (A(i, j) / A(i, l)) / g;
                for (std::size_t j = l; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = l; k < n; ++k) acc += A(i, k) * V(k, j);
                    for (std::size_t k = l; k < n; ++k) V(k, j) += acc * V(k, i);
                }
            }
            for (std::size_t j = l; j < n; ++j) V(i, j) = V(j, i) = 0.0;
        }
        V(i, i) = 1.0;
        g = rv1[i];
        l = i;
    }

    // Accumulate left-hand transformations.
    for (std::size_t ii = std::min(m, n); ii-- > 0;) {
        const std::size_t i = ii;
        l = i + 1;
        g = w[i];
        for (std::size_t j = l; j < n; ++j) A(i, j) = 0.0;
        if (g != 0.0) {
            g = 1.0 / g;
            for (std::size_t j = l; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = l; k < m; ++k) acc += A(k, i) * A(k, j);
                const double f = (acc / A(i, i)) * g;
                for (std::size_t k = i; k < m; ++k) A(k, j) += f * A(k, i);
            }
            for (std::size_t j = i; j < m; ++j) A(j, i) *= g;
        } else {
            for (std::size_t j = i; j < m; ++j) A(j, i) = 0.0;
        }
        A(i, i) += 1.0;
    }

    // Diagonalize the bidiagonal form.
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t kk = n; kk-- > 0;) {
        const std::size_t k = kk;
        for (int its = 0; its < 60; ++its) {
            bool flag = true;
            std::size_t nm = 0;
            std::size_t ll = k + 1;
            while (ll-- > 0) {
                nm = (ll == 0) ? 0 : ll - 1;
                if (std::fabs(rv1[ll]) <= eps * anorm) {
                    flag = false;
                    break;
                }
                if (std::fabs(w[nm]) <= eps * anorm) break;
            }
            const std::size_t lsplit = ll;
            if (flag) {
                // Cancel rv1[lsplit] against the zero diagonal above it.
                double c = 0.0, s = 1.0;
                for (std::size_t i = lsplit; i <= k; ++i) {
                    double f = s * rv1[i];
                    rv1[i] = c * rv1[i];
                    if (std::fabs(f) <= eps * anorm) break;
                    double gg = w[i];
                    double h = pythag(f, gg);
                    w[i] = h;
                    h = 1.0 / h;
                    c = gg * h;
                    s = -f * h;
                    for (std::size_t j = 0; j < m; ++j) {
                        const double y = A(j, nm);
                        const double z = A(j, i);
                        A(j, nm) = y * c + z * s;
                        A(j, i) = z * c - y * s;
                    }
                }
            }
            double z = w[k];
            if (lsplit == k) {
                if (z < 0.0) {
                    w[k] = -z;
                    for (std::size_t j = 0; j < n; ++j) V(j, k) = -V(j, k);
                }
                break;
            }
            if (its == 59)
                throw ConvergenceFailure("svd: no convergence after 60 iterations");
            double x = w[lsplit];
            nm = k - 1;
            double y = w[nm];
            g = rv1[nm];
            double h = rv1[k];
            double f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = pythag(f, 1.0);
            f = ((x - z) * (x + z) + h * (y / (f + sign_of(g, f)) - h)) / x;
            double c = 1.0, s = 1.0;
            for (std::size_t j = lsplit; j <= nm; ++j) {
                const std::size_t i = j + 1;
                g = rv1[i];
                y = w[i];
                h = s * g;
                g = c * g;
                z = pythag(f, h);
                rv1[j] = z;
                c = f / z;
                s = h / z;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                for (std::size_t jj = 0; jj < n; ++jj) {
                    x = V(jj, j);
                    z = V(jj, i);
                    V(jj, j) = x * c + z * s;
                    V(jj, i) = z * c - x * s;
                }
                z = pythag(f, h);
                w[j] = z;
                if (z != 0.0) {
                    z = 1.0 / z;
                    c = f * z;
                    s = h * z;
                }
                f = c * g + s * y;
                x = c * y - s * g;
                for (std::size_t jj = 0; jj < m; ++jj) {
                    y = A(jj, j);
                    z = A(jj, i);
                    A(jj, j) = y * c + z * s;
                    A(jj, i) = z * c - y * s;
                }
            }
            rv1[lsplit] = 0.0;
            rv1[k] = f;
            w[k] = x;
        }
    }
}

// Sorts singular values descending, permuting the columns of U and V.
void sort_svd(std::size_t m, std::size_t n, std::vector<double>& u, std::vector<double>& w,
              std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    std::vector<double> wn(n), un(m * n), vn(n * n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        wn[c] = w[src];
        for (std::size_t i = 0; i < m; ++i) un[i * n + c] = u[i * n + src];
        for (std::size_t i = 0; i < n; ++i) vn[i * n + c] = v[i * n + src];
    }
    w.swap(wn);
    u.swap(un);
    v.swap(vn);
}

// Householder QR of a tall matrix, column-major storage. Reflectors are kept
// below the diagonal with scalars in tau.
struct QrFactors {
    std::size_t m = 0, n = 0;
    std::vector<double> a;  // column-major m x n
    std::vector<double> tau;

    double& at(std::size_t i, std::size_t j) { return a[j * m + i]; }
    double at(std::size_t i, std::size_t j) const { return a[j * m + i]; }
};

QrFactors householder_qr(const Matrix& src) {
    QrFactors qr;
    qr.m = src.rows();
    qr.n = src.cols();
    qr.a.resize(qr.m * qr.n);
    qr.tau.assign(qr.n, 0.0);
    for (std::size_t j = 0; j < qr.n; ++j)
        for (std::size_t i = 0; i < qr.m; ++i) qr.a[j * qr.m + i] = src(i, j);

    const std::size_t m = qr.m, n = qr.n;
    for (std::size_t k = 0; k < n && k < m; ++k) {
        double* col = qr.a.data() + k * m;
        double normx = 0.0;
        for (std::size_t i = k; i < m; ++i) normx += col[i] * col[i];
        normx = std::sqrt(normx);
        if (normx == 0.0) {
            qr.tau[k] = 0.0;
            continue;
        }
        const double alpha = col[k] >= 0.0 ? -normx : normx;
        const double v0 = col[k] - alpha;
        col[k] = alpha;
        // v = (1, col[k+1..]/v0); tau = -v0/alpha
        for (std::size_t i = k + 1; i < m; ++i) col[i] /= v0;
        qr.tau[k] = -v0 / alpha;
        for (std::size_t j = k + 1; j < n; ++j) {
            double* cj = qr.a.data() + j * m;
            double s = cj[k];
            for (std::size_t i = k + 1; i < m; ++i) s += col[i] * cj[i];
            s *= qr.tau[k];
            cj[k] -= s;
            for (std::size_t i = k + 1; i < m; ++i) cj[i] -= s * col[i];
        }
    }
    return qr;
}

void qr_apply_qt(const QrFactors& qr, std::vector<double>& x) {
    const std::size_t m = qr.m, n = qr.n;
    for (std::size_t k = 0; k < n && k < m; ++k) {
        if (qr.tau[k] == 0.0) continue;
        const double* col = qr.a.data() + k * m;
        double s = x[k];
        for (std::size_t i = k + 1; i < m; ++i) s += col[i] * x[i];
        s *= qr.tau[k];
        x[k] -= s;
        for (std::size_t i = k + 1; i < m; ++i) x[i] -= s * col[i];
    }
}

// Computes Q * [top; 0] where top is n x c row-major; result is m x c.
// Works in a column-major scratch so each reflector streams contiguously.
Matrix qr_apply_q_thin(const QrFactors& qr, const Matrix& top) {
    const std::size_t m = qr.m, n = qr.n, c = top.cols();
    std::vector<double> work(m * c, 0.0);
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t i = 0; i < n; ++i) work[j * m + i] = top(i, j);
    const std::size_t kmax = std::min(n, m);
    for (std::size_t kk = kmax; kk-- > 0;) {
        if (qr.tau[kk] == 0.0) continue;
        const double* col = qr.a.data() + kk * m;
        for (std::size_t j = 0; j < c; ++j) {
            double* wj = work.data() + j * m;
            double s = wj[kk];
            for (std::size_t i = kk + 1; i < m; ++i) s += col[i] * wj[i];
            s *= qr.tau[kk];
            wj[kk] -= s;
            for (std::size_t i = kk + 1; i < m; ++i) wj[i] -= s * col[i];
        }
    }
    Matrix out(m, c);
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t i = 0; i < m; ++i) out(i, j) = work[j * m + i];
    return out;
}

Matrix qr_upper_r(const QrFactors& qr) {
    const std::size_t n = qr.n;
    Matrix r(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j && i < qr.m; ++i) r(i, j) = qr.at(i, j);
    return r;
}

std::size_t numerical_rank(std::size_t rows, std::size_t cols, const std::vector<double>& sigma) {
    if (sigma.empty()) return 0;
    const double thresh =
        static_cast<double>(std::max(rows, cols)) * sigma.front() * 1e-12;
    std::size_t r = 0;
    for (double s : sigma)
        if (s > thresh) ++r;
    return r;
}

// Ratio above which the tall factorization is routed through QR first.
constexpr double kQrRatio = 1.25;

}  // namespace

ThinFactorization thin_svd(const Matrix& a) {
    const std::size_t n = a.rows(), d = a.cols();
    if (n == 0 || d == 0) throw InvalidDimensions("thin_svd: empty matrix");
    if (n < d) {
        ThinFactorization t = thin_svd(transpose(a));
        std::swap(t.u, t.v);
        return t;
    }

    ThinFactorization out;
    std::vector<double> u, w, v;
    if (static_cast<double>(n) > kQrRatio * static_cast<double>(d)) {
        QrFactors qr = householder_qr(a);
        Matrix r = qr_upper_r(qr);
        u = r.data();
        svd_golub_reinsch(d, d, u, w, v);
        sort_svd(d, d, u, w, v);
        Matrix ur(d, d, std::move(u));
        out.u = qr_apply_q_thin(qr, ur);
    } else {
        u = a.data();
        svd_golub_reinsch(n, d, u, w, v);
        sort_svd(n, d, u, w, v);
        out.u = Matrix(n, d, std::move(u));
    }
    out.sigma = std::move(w);
    out.v = Matrix(d, d, std::move(v));
    out.rank = numerical_rank(n, d, out.sigma);
    return out;
}

Matrix pinv(const Matrix& a) {
    ThinFactorization f = thin_svd(a);
    const std::size_t n = a.rows(), d = a.cols();
    const std::size_t r = std::min(n, d);
    // A^+ = V diag(1/sigma_i) U^T over singular values above the threshold.
    Matrix out(d, n);
    std::vector<double> inv(r, 0.0);
    for (std::size_t k = 0; k < f.rank; ++k) inv[k] = 1.0 / f.sigma[k];
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < f.rank; ++k) {
            const double vik = f.v(i, k) * inv[k];
            if (vik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * f.u(j, k);
        }
    return out;
}

double operator_norm(const Matrix& a) {
    ThinFactorization f = thin_svd(a);
    return f.sigma.empty() ? 0.0 : f.sigma.front();
}

LsqResult lsq_solve(const Matrix& a, const Vector& b) {
    const std::size_t n = a.rows(), d = a.cols();
    if (b.size() != n) throw DimensionMismatch("lsq_solve: rhs length mismatch");
    if (n < d) {
        // underdetermined: minimum-norm solution through the thin SVD
        ThinFactorization f = thin_svd(a);
        LsqResult res;
        res.rank = f.rank;
        res.sigma_max = f.sigma.empty() ? 0.0 : f.sigma.front();
        res.sigma_min = f.sigma.empty() ? 0.0 : f.sigma.back();
        std::vector<double> utb(f.rank, 0.0);
        for (std::size_t k = 0; k < f.rank; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += f.u(i, k) * b[i];
            utb[k] = acc / f.sigma[k];
        }
        Vector x(d);
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < f.rank; ++k) acc += f.v(i, k) * utb[k];
            x[i] = acc;
        }
        res.x = std::move(x);
        return res;
    }

    std::vector<double> u, w, v;
    std::vector<double> c;  // first d entries of (Q^T b), or b itself
    std::size_t um = 0;     // rows of the U block used for U^T c

    if (static_cast<double>(n) > kQrRatio * static_cast<double>(d) && n > d) {
        QrFactors qr = householder_qr(a);
        std::vector<double> qtb = b.data();
        qr_apply_qt(qr, qtb);
        c.assign(qtb.begin(), qtb.begin() + static_cast<std::ptrdiff_t>(d));
        Matrix r = qr_upper_r(qr);
        u = r.data();
        svd_golub_reinsch(d, d, u, w, v);
        sort_svd(d, d, u, w, v);
        um = d;
    } else {
        u = a.data();
        svd_golub_reinsch(n, d, u, w, v);
        sort_svd(n, d, u, w, v);
        c = b.data();
        um = n;
    }

    LsqResult res;
    res.rank = numerical_rank(n, d, w);
    res.sigma_max = w.empty() ? 0.0 : w.front();
    res.sigma_min = w.empty() ? 0.0 : w.back();

    // x = V diag(1/sigma) U^T c, inverting only values above the threshold
    std::vector<double> utc(d, 0.0);
    for (std::size_t k = 0; k < res.rank; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < um; ++i) acc += u[i * d + k] * c[i];
        utc[k] = acc / w[k];
    }
    Vector x(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < res.rank; ++k) acc += v[i * d + k] * utc[k];
        x[i] = acc;
    }
    res.x = std::move(x);
    return res;
}

Vector exact_lsq(const Matrix& a, const Vector& b) {
    if (a.rows() < a.cols()) throw InvalidDimensions("exact_lsq: requires rows >= cols");
    return lsq_solve(a, b).x;
}

}  // namespace sketchreg
