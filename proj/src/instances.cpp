#include "sketchreg/instances.hpp"

#include <cmath>
#include <cstdio>

#include "sketchreg/dense.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

namespace {

std::string params_json_csadv(const CsAdversarialParams& p) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "{\"d\":%zu,\"alpha\":%zu,\"n\":%zu}", p.d, p.alpha, p.n);
    return buf;
}

}  // namespace

RegressionInstance gen_cs_adversarial(const CsAdversarialParams& p) {
    if (p.alpha < 1 || p.alpha >= p.d)
        throw InvalidParams("cs_adversarial: need 1 <= alpha < d");
    if (p.n < p.d + p.alpha) throw InvalidParams("cs_adversarial: need n >= d + alpha");

    RegressionInstance inst;
    inst.a = Matrix(p.n, p.d);
    for (std::size_t i = 0; i < p.d; ++i) inst.a(i, i) = 1.0;
    inst.b = Vector(p.n);
    const double bd = 1.0 / std::sqrt(static_cast<double>(p.d));
    const double ba = 1.0 / std::sqrt(static_cast<double>(p.alpha));
    for (std::size_t i = 0; i < p.d; ++i) inst.b[i] = bd;
    for (std::size_t i = 0; i < p.alpha; ++i) inst.b[p.d + i] = ba;
    Vector xs(p.d);
    for (std::size_t i = 0; i < p.d; ++i) xs[i] = bd;
    inst.x_star = std::move(xs);
    inst.residual_norm = 1.0;
    inst.pinv_norm = 1.0;
    inst.label = "cs-adversarial";
    inst.params_json = params_json_csadv(p);
    return inst;
}

EventReport detect_events(const SketchOperator& s, const CsAdversarialParams& p) {
    if (s.family() != SketchFamily::CountSketch)
        throw InvalidParams("detect_events: operator is not a Count-Sketch");
    if (s.n() < p.d + p.alpha)
        throw InvalidParams("detect_events: S.n < d + alpha");

    CountSketchSupports sup(s);
    const std::size_t nnz = sup.sparsity();
    const std::size_t d = p.d, alpha = p.alpha;

    // occupancy of each sketch row by the first d columns
    std::vector<std::uint16_t> count_d(s.m(), 0);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t t = 0; t < nnz; ++t) ++count_d[sup.rows(j)[t]];

    // for each sketch row, which alpha-block column hits it (several become -2)
    constexpr std::int64_t kNone = -1, kMany = -2;
    std::vector<std::int64_t> alpha_col(s.m(), kNone);
    std::vector<std::int8_t> alpha_sign(s.m(), 0);
    for (std::size_t j = d; j < d + alpha; ++j)
        for (std::size_t t = 0; t < nnz; ++t) {
            const std::uint32_t r = sup.rows(j)[t];
            if (alpha_col[r] == kNone) {
                alpha_col[r] = static_cast<std::int64_t>(j);
                alpha_sign[r] = sup.signs(j)[t];
            } else {
                alpha_col[r] = kMany;
            }
        }

    EventReport rep;
    for (std::size_t j = 0; j < d; ++j) {
        bool event1 = true;
        for (std::size_t t = 0; t < nnz && event1; ++t)
            if (count_d[sup.rows(j)[t]] != 1) event1 = false;
        if (!event1) continue;

        // event II: exactly one alpha column intersecting, in exactly one row
        std::size_t hits = 0;
        std::int64_t hit_col = kNone;
        std::size_t hit_row = 0;
        int hit_sign = 0;
        bool clean = true;
        for (std::size_t t = 0; t < nnz && clean; ++t) {
            const std::uint32_t r = sup.rows(j)[t];
            if (alpha_col[r] == kNone) continue;
            if (alpha_col[r] == kMany) {
                clean = false;
                break;
            }
            if (hits > 0 && alpha_col[r] == hit_col) {
                clean = false;  // same alpha column twice: |intersection| > 1
                break;
            }
            ++hits;
            if (hits > 1) {
                clean = false;  // two distinct alpha columns intersect S_j
                break;
            }
            hit_col = alpha_col[r];
            hit_row = r;
            hit_sign = static_cast<int>(sup.signs(j)[t]) * static_cast<int>(alpha_sign[r]);
        }
        if (!clean || hits != 1) continue;

        rep.witness_column = j;
        rep.event1 = true;
        rep.event2 = true;
        rep.intersect_row = hit_row;
        rep.intersect_sign = hit_sign;
        return rep;
    }
    return rep;
}

RegressionInstance gen_lev_adversarial(const LevAdversarialParams& p) {
    if (p.d < 2) throw InvalidParams("lev_adversarial: need d >= 2");
    if (p.alpha < 1) throw InvalidParams("lev_adversarial: need alpha >= 1");
    if (p.beta < 1 || p.beta >= p.d) throw InvalidParams("lev_adversarial: need 1 <= beta < d");

    const std::size_t d = p.d;
    const std::size_t L = p.scaled_blocks();
    const std::size_t natural = p.natural_n();
    std::size_t n = natural;
    if (p.pad_to != 0) {
        if (p.pad_to < natural) throw InvalidParams("lev_adversarial: pad_to < d(L+1)");
        n = p.pad_to;
    }

    RegressionInstance inst;
    inst.a = Matrix(n, d);
    const double top = 1.0 / std::sqrt(static_cast<double>(d));
    const double tail = 1.0 / std::sqrt(static_cast<double>(p.alpha * d));
    for (std::size_t j = 0; j < d; ++j) inst.a(j, j) = top;
    for (std::size_t blk = 0; blk < L; ++blk)
        for (std::size_t j = 0; j < d; ++j) inst.a(d + blk * d + j, j) = tail;

    inst.b = Vector(n);
    const double bb = 1.0 / std::sqrt(static_cast<double>(p.beta));
    for (std::size_t j = 0; j < d; ++j) inst.b[j] = top;
    for (std::size_t j = 0; j < p.beta; ++j) inst.b[d + j] = bb;

    // Columns are orthonormal, so x* = A^T b in closed form.
    Vector xs(d);
    const double base = 1.0 / static_cast<double>(d);
    const double special =
        base + 1.0 / std::sqrt(static_cast<double>(p.alpha * p.beta * d));
    for (std::size_t j = 0; j < d; ++j) xs[j] = (j < p.beta) ? special : base;
    double xs_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) xs_sq += xs[j] * xs[j];
    inst.x_star = std::move(xs);
    inst.residual_norm = std::sqrt(std::max(0.0, 2.0 - xs_sq));
    inst.pinv_norm = 1.0;
    inst.label = "lev-adversarial";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "{\"d\":%zu,\"alpha\":%zu,\"beta\":%zu,\"L\":%zu,\"n\":%zu,"
                  "\"operative_regime\":%s}",
                  d, p.alpha, p.beta, L, n, p.operative_regime() ? "true" : "false");
    inst.params_json = buf;
    return inst;
}

RegressionInstance gen_lower_bound_d1(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < d + 1) throw InvalidParams("lower_bound_d1: need n >= d + 1");
    // Haar block via Gram-Schmidt on an i.i.d. Gaussian n x (d+1) panel with
    // the R-diagonal forced positive.
    Rng rng = SeedStream{seed, 0}.rng();
    const std::size_t k = d + 1;
    Matrix q(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> col(n);
        rng.fill_normal(col.data(), n);
        for (std::size_t prev = 0; prev < j; ++prev) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += q(i, prev) * col[i];
            for (std::size_t i = 0; i < n; ++i) col[i] -= proj * q(i, prev);
        }
        // second orthogonalization pass keeps the basis orthonormal to 1e-14
        for (std::size_t prev = 0; prev < j; ++prev) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += q(i, prev) * col[i];
            for (std::size_t i = 0; i < n; ++i) col[i] -= proj * q(i, prev);
        }
        double nrm = 0.0;
        for (double x : col) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw ConvergenceFailure("lower_bound_d1: degenerate Gaussian panel");
        for (std::size_t i = 0; i < n; ++i) q(i, j) = col[i] / nrm;
    }

    RegressionInstance inst;
    inst.a = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) inst.a(i, j) = q(i, j);
    inst.b = column_as_vector(q, d);
    inst.x_star = Vector(d);
    inst.residual_norm = 1.0;
    inst.pinv_norm = 1.0;
    inst.label = "lower-bound-d1";
    inst.seed = seed;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "{\"n\":%zu,\"d\":%zu}", n, d);
    inst.params_json = buf;
    return inst;
}

RegressionInstance gen_lower_bound_d2(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < d) throw InvalidParams("lower_bound_d2: need n >= d");
    Rng rng = SeedStream{seed, 0}.rng();
    RegressionInstance inst;
    inst.a = Matrix(n, d);
    for (std::size_t j = 0; j < d; ++j) inst.a(j, j) = 1.0;
    Vector b(n);
    rng.fill_normal(b.data().data(), n);
    const double nrm = norm2(b);
    for (std::size_t i = 0; i < n; ++i) b[i] /= nrm;
    inst.b = b;
    Vector xs(d);
    for (std::size_t j = 0; j < d; ++j) xs[j] = b[j];
    double tail_sq = 0.0;
    for (std::size_t i = d; i < n; ++i) tail_sq += b[i] * b[i];
    inst.x_star = std::move(xs);
    inst.residual_norm = std::sqrt(tail_sq);
    inst.pinv_norm = 1.0;
    inst.label = "lower-bound-d2";
    inst.seed = seed;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "{\"n\":%zu,\"d\":%zu}", n, d);
    inst.params_json = buf;
    return inst;
}

RegressionInstance gen_random_wellcond(std::size_t n, std::size_t d, double noise,
                                       std::uint64_t seed) {
    if (n < d || d < 1) throw InvalidParams("random_wellcond: need n >= d >= 1");
    if (noise < 0.0) throw InvalidParams("random_wellcond: noise must be >= 0");
    Rng rng = SeedStream{seed, 0}.rng();
    RegressionInstance inst;
    inst.a = Matrix(n, d);
    rng.fill_normal(inst.a.data().data(), n * d);
    Vector x0(d);
    rng.fill_normal(x0.data().data(), d);
    inst.b = matvec(inst.a, x0);
    if (noise > 0.0) {
        for (std::size_t i = 0; i < n; ++i) inst.b[i] += noise * rng.normal();
    }

    ThinFactorization f = thin_svd(inst.a);
    std::vector<double> utb(f.rank, 0.0);
    for (std::size_t k = 0; k < f.rank; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += f.u(i, k) * inst.b[i];
        utb[k] = acc / f.sigma[k];
    }
    Vector xs(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < f.rank; ++k) acc += f.v(i, k) * utb[k];
        xs[i] = acc;
    }
    inst.residual_norm = norm2(matvec(inst.a, xs) - inst.b);
    inst.x_star = std::move(xs);
    inst.pinv_norm = f.rank > 0 ? 1.0 / f.sigma[f.rank - 1] : 0.0;
    inst.label = "random-wellcond";
    inst.seed = seed;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "{\"n\":%zu,\"d\":%zu,\"noise\":%.17g}", n, d, noise);
    inst.params_json = buf;
    return inst;
}

RegressionInstance pad_to_power_of_two(RegressionInstance inst, std::size_t target) {
    const std::size_t n = inst.a.rows();
    std::size_t p = target;
    if (p == 0) {
        p = 1;
        while (p < n) p <<= 1;
    }
    if (p < n) throw InvalidParams("pad_to_power_of_two: target smaller than n");
    if (!is_power_of_two(p)) throw NonPowerOfTwo("pad_to_power_of_two: target not a power of two");
    if (p == n) return inst;

    Matrix a(p, inst.a.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < inst.a.cols(); ++j) a(i, j) = inst.a(i, j);
    Vector b(p);
    for (std::size_t i = 0; i < n; ++i) b[i] = inst.b[i];
    inst.a = std::move(a);
    inst.b = std::move(b);
    return inst;
}

}  // namespace sketchreg
