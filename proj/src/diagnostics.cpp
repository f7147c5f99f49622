#include "sketchreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sketchreg/dense.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

namespace {

// Pairwise sum for order-independent accumulation.
double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace

DistortionReport embedding_distortion(const SketchOperator& s, const Matrix& basis,
                                      std::size_t probes, std::uint64_t seed) {
    const std::size_t n = basis.rows(), k = basis.cols();
    if (s.n() != n) throw DimensionMismatch("embedding_distortion: S.n != basis rows");
    if (probes < 1) throw InvalidParams("embedding_distortion: probes >= 1");

    Matrix gram = matmul(transpose(basis), basis);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (std::fabs(gram(i, j) - (i == j ? 1.0 : 0.0)) > 1e-8)
                throw NotOrthonormal("embedding_distortion: basis is not orthonormal");

    Matrix sbasis = apply_sketch(s, basis);

    DistortionReport rep;
    double max_ratio = -1.0, min_ratio = std::numeric_limits<double>::infinity();
    auto probe = [&](const std::vector<double>& y) {
        double ny = 0.0;
        for (double v : y) ny += v * v;
        if (ny == 0.0) return;
        // ||basis y|| = ||y||, so the ratio needs only S*basis.
        double num = 0.0;
        for (std::size_t r = 0; r < sbasis.rows(); ++r) {
            const double* row = sbasis.row_ptr(r);
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += row[j] * y[j];
            num += acc * acc;
        }
        const double ratio = std::sqrt(num / ny);
        max_ratio = std::max(max_ratio, ratio);
        min_ratio = std::min(min_ratio, ratio);
        ++rep.probes;
    };

    Rng rng = SeedStream{seed, 0}.rng();
    std::vector<double> y(k);
    for (std::size_t t = 0; t < probes; ++t) {
        rng.fill_normal(y.data(), k);
        probe(y);
    }
    for (std::size_t i = 0; i < k; ++i) {
        std::fill(y.begin(), y.end(), 0.0);
        y[i] = 1.0;
        probe(y);
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            std::fill(y.begin(), y.end(), 0.0);
            y[i] = 1.0;
            y[j] = 1.0;
            probe(y);
        }

    rep.max_overshoot = max_ratio - 1.0;
    rep.max_undershoot = 1.0 - min_ratio;

    ThinFactorization f = thin_svd(sbasis);
    const double smax = f.sigma.empty() ? 0.0 : f.sigma.front();
    // the map y -> S basis y has k singular values; missing ones are zero
    const double smin = (f.sigma.size() >= k) ? f.sigma[k - 1] : 0.0;
    rep.exact_overshoot = smax - 1.0;
    rep.exact_undershoot = 1.0 - smin;
    rep.certified_eps = std::max(std::max(rep.exact_overshoot, rep.exact_undershoot), 0.0);
    return rep;
}

double amp_error(const SketchOperator& s, const Matrix& a, const Matrix& b) {
    if (a.rows() != s.n() || b.rows() != s.n())
        throw DimensionMismatch("amp_error: A and B must have n rows");
    const double na = frobenius_norm(a), nb = frobenius_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    Matrix sa = apply_sketch(s, a);
    Matrix sb = apply_sketch(s, b);
    Matrix lhs = matmul(transpose(sa), sb);
    Matrix exact = matmul(transpose(a), b);
    double acc = 0.0;
    for (std::size_t i = 0; i < lhs.rows(); ++i)
        for (std::size_t j = 0; j < lhs.cols(); ++j) {
            const double dlt = lhs(i, j) - exact(i, j);
            acc += dlt * dlt;
        }
    return std::sqrt(acc) / (na * nb);
}

AipsReport aips_check(const SketchOperator& s, double c) {
    Matrix mat = materialize_sketch(s);  // throws TooLarge past the cap
    const std::size_t m = mat.rows(), n = mat.cols();
    AipsReport rep;
    rep.bound = c * std::sqrt(std::log(static_cast<double>(n))) /
                std::sqrt(static_cast<double>(m));
    // brute-force pairwise scan through the Gram matrix
    std::vector<double> gram(n * n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const double* row = mat.row_ptr(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = row[i];
            if (ri == 0.0) continue;
            double* gi = gram.data() + i * n;
            for (std::size_t j = i + 1; j < n; ++j) gi[j] += ri * row[j];
        }
    }
    double maxod = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            maxod = std::max(maxod, std::fabs(gram[i * n + j]));
    rep.max_offdiag = maxod;
    rep.pass = maxod <= rep.bound;
    return rep;
}

NeumannReport neumann_validate(const SketchOperator& s, const Matrix& a, std::size_t k_max) {
    const std::size_t n = a.rows(), d = a.cols();
    if (s.n() != n) throw DimensionMismatch("neumann_validate: S.n != rows(A)");

    ThinFactorization f = thin_svd(a);
    if (f.rank < d) throw RankDeficient("neumann_validate: A is rank deficient");

    Matrix su = apply_sketch(s, f.u);
    Matrix g = matmul(transpose(su), su);
    Matrix t(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) t(i, j) = (i == j ? 1.0 : 0.0) - g(i, j);

    NeumannReport rep;
    rep.t_norm = operator_norm(t);
    if (rep.t_norm > 0.5)
        throw TNormTooLarge("neumann_validate: ||T|| = " + std::to_string(rep.t_norm) +
                            " > 1/2; increase m");

    Matrix smat = materialize_sketch(s);
    Matrix sa = apply_sketch(s, a);
    ThinFactorization fsa = thin_svd(sa);
    if (fsa.rank < d) throw RankDeficient("neumann_validate: SA is rank deficient");

    // exact (SA)^+ S
    Matrix sa_pinv = pinv(sa);
    Matrix target = matmul(sa_pinv, smat);  // d x n
    rep.pinv_s_norm = operator_norm(target);

    // W = U^T S^T S, d x n
    Matrix w = matmul(transpose(su), smat);
    // V Sigma^{-1}, d x d
    Matrix vsi(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) vsi(i, k) = f.v(i, k) / f.sigma[k];

    Matrix partial(d, d);           // sum of T^j, j <= k
    Matrix tpow = Matrix::identity(d);  // T^k
    rep.truncation_errors.reserve(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) {
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) partial(i, j) += tpow(i, j);
        Matrix approx = matmul(matmul(vsi, partial), w);
        Matrix diff(d, n);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < n; ++j) diff(i, j) = target(i, j) - approx(i, j);
        rep.truncation_errors.push_back(operator_norm(diff));
        tpow = matmul(tpow, t);
    }
    return rep;
}

GaussianNormReport gaussian_norm_identity(const Matrix& a, double sigma, std::size_t trials,
                                          std::uint64_t seed) {
    if (trials < 1) throw InvalidParams("gaussian_norm_identity: trials >= 1");
    const std::size_t n = a.rows(), d = a.cols();
    GaussianNormReport rep;
    const double fro = frobenius_norm(a);
    rep.predicted = sigma * sigma * fro * fro;

    std::vector<double> samples(trials);
    std::vector<double> g(d), ag(n);
    for (std::size_t tIdx = 0; tIdx < trials; ++tIdx) {
        Rng rng = SeedStream{seed, tIdx}.rng();
        rng.fill_normal(g.data(), d, sigma);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = a.row_ptr(i);
            double v = 0.0;
            for (std::size_t j = 0; j < d; ++j) v += row[j] * g[j];
            acc += v * v;
        }
        samples[tIdx] = acc;
    }
    rep.empirical_mean = pairwise_sum(samples.data(), trials) / static_cast<double>(trials);
    rep.rel_err = rep.predicted == 0.0
                      ? std::fabs(rep.empirical_mean)
                      : std::fabs(rep.empirical_mean - rep.predicted) / rep.predicted;
    return rep;
}

std::string DistortionReport::to_json() const {
    char buf[360];
    std::snprintf(buf, sizeof(buf),
                  "{\"diag\":\"distortion\",\"max_overshoot\":%.17g,\"max_undershoot\":%.17g,"
                  "\"exact_overshoot\":%.17g,\"exact_undershoot\":%.17g,\"probes\":%zu,"
                  "\"certified_eps\":%.17g}",
                  max_overshoot, max_undershoot, exact_overshoot, exact_undershoot, probes,
                  certified_eps);
    return buf;
}

std::string AipsReport::to_json() const {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "{\"diag\":\"aips\",\"max_offdiag\":%.17g,\"bound\":%.17g,\"pass\":%s}",
                  max_offdiag, bound, pass ? "true" : "false");
    return buf;
}

std::string NeumannReport::to_json() const {
    std::string out = "{\"diag\":\"neumann\",\"t_norm\":";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", t_norm);
    out += buf;
    std::snprintf(buf, sizeof(buf), ",\"pinv_s_norm\":%.17g", pinv_s_norm);
    out += buf;
    out += ",\"truncation_errors\":[";
    for (std::size_t i = 0; i < truncation_errors.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.17g", i ? "," : "", truncation_errors[i]);
        out += buf;
    }
    out += "]}";
    return out;
}

std::string GaussianNormReport::to_json() const {
    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "{\"diag\":\"gaussian_norm\",\"empirical_mean\":%.17g,\"predicted\":%.17g,"
                  "\"rel_err\":%.17g}",
                  empirical_mean, predicted, rel_err);
    return buf;
}

}  // namespace sketchreg
