#include "sketchreg/regress.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "sketchreg/dense.hpp"

namespace sketchreg {

namespace {
// Relative cutoff under which a residual counts as zero (consistent system).
constexpr double kZeroResidualRel = 1e-10;
}  // namespace

void RegressionInstance::validate() const {
    const std::size_t n = a.rows(), d = a.cols();
    if (n < d || d < 1) throw InvalidParams("instance: need n >= d >= 1");
    if (b.size() != n) throw DimensionMismatch("instance: b length != n");
    if (x_star) {
        if (x_star->size() != d) throw DimensionMismatch("instance: x_star length != d");
        Vector res = matvec(a, *x_star) - b;
        Vector atr = matvec(transpose(a), res);
        if (norm2(atr) > 1e-8 * frobenius_norm(a) * norm2(b))
            throw InternalInvariant("instance '" + label +
                                    "': x_star violates residual orthogonality");
    }
}

std::string RegressionInstance::sidecar_json() const {
    char buf[256];
    std::string out = "{\"label\":\"" + label + "\"";
    std::snprintf(buf, sizeof(buf), ",\"n\":%zu,\"d\":%zu", a.rows(), a.cols());
    out += buf;
    out += ",\"params\":" + (params_json.empty() ? std::string("{}") : params_json);
    std::snprintf(buf, sizeof(buf), ",\"seed\":%llu", static_cast<unsigned long long>(seed));
    out += buf;
    if (residual_norm) {
        std::snprintf(buf, sizeof(buf), ",\"residual_norm\":%.17g", *residual_norm);
        out += buf;
    }
    if (pinv_norm) {
        std::snprintf(buf, sizeof(buf), ",\"pinv_norm\":%.17g", *pinv_norm);
        out += buf;
    }
    out += '}';
    return out;
}

SolveReport sketch_and_solve(const RegressionInstance& inst, const SketchOperator& s) {
    const std::size_t n = inst.a.rows(), d = inst.a.cols();
    if (s.n() != n)
        throw DimensionMismatch("sketch_and_solve: S.n=" + std::to_string(s.n()) +
                                " != instance n=" + std::to_string(n));

    Matrix sa = apply_sketch(s, inst.a);
    Vector sb = apply_sketch(s, inst.b);
    LsqResult solved = lsq_solve(sa, sb);

    Vector x_star;
    double residual = 0.0, pinv_nrm = 0.0;
    if (inst.x_star) {
        x_star = *inst.x_star;
        residual = inst.residual_norm ? *inst.residual_norm
                                      : norm2(matvec(inst.a, x_star) - inst.b);
        if (inst.pinv_norm) {
            pinv_nrm = *inst.pinv_norm;
        } else {
            ThinFactorization f = thin_svd(inst.a);
            pinv_nrm = f.rank > 0 ? 1.0 / f.sigma[f.rank - 1] : 0.0;
        }
    } else {
        ThinFactorization f = thin_svd(inst.a);
        // x* = V diag(1/sigma) U^T b over the numerical rank
        std::vector<double> utb(f.rank, 0.0);
        for (std::size_t k = 0; k < f.rank; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += f.u(i, k) * inst.b[i];
            utb[k] = acc / f.sigma[k];
        }
        x_star = Vector(d);
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < f.rank; ++k) acc += f.v(i, k) * utb[k];
            x_star[i] = acc;
        }
        residual = norm2(matvec(inst.a, x_star) - inst.b);
        pinv_nrm = f.rank > 0 ? 1.0 / f.sigma[f.rank - 1] : 0.0;
    }

    SolveReport rep;
    rep.x_prime = solved.x;
    rep.sketched_rank_ok = (solved.rank == d);

    Vector diff = rep.x_prime - x_star;
    rep.l2_err = norm2(diff);
    rep.linf_err = norminf(diff);

    const double bnorm = norm2(inst.b);
    const double zero_tol = kZeroResidualRel * std::max(1.0, bnorm);
    const double cost_prime = norm2(matvec(inst.a, rep.x_prime) - inst.b);
    if (residual <= zero_tol) {
        rep.cost_ratio = (cost_prime <= zero_tol)
                             ? 1.0
                             : std::numeric_limits<double>::infinity();
    } else {
        rep.cost_ratio = cost_prime / residual;
    }

    const double scale = residual * pinv_nrm;
    const double err_tol = 1e-9 * std::max(1.0, norm2(x_star));
    if (residual <= zero_tol || scale == 0.0) {
        if (rep.l2_err <= err_tol) {
            rep.normalized_l2 = 0.0;
            rep.normalized_linf = 0.0;
        } else {
            rep.normalized_l2 = std::numeric_limits<double>::infinity();
            rep.normalized_linf = std::numeric_limits<double>::infinity();
            rep.degenerate = true;
        }
    } else {
        rep.normalized_l2 = rep.l2_err / scale;
        rep.normalized_linf = rep.linf_err * std::sqrt(static_cast<double>(d)) / scale;
    }
    return rep;
}

GuaranteeCheck guarantee_check(const SolveReport& report, double eps, double slack_c) {
    if (eps <= 0.0 || slack_c <= 0.0)
        throw InvalidParams("guarantee_check: eps and C must be positive");
    GuaranteeCheck g;
    g.l2_pass = report.normalized_l2 <= slack_c * eps;
    g.linf_pass = report.normalized_linf <= slack_c * eps;
    return g;
}

double directional_error(const Vector& x_prime, const Vector& x_star, const Vector& a) {
    const double na = norm2(a);
    if (na == 0.0) throw ZeroDirection("directional_error: zero direction");
    return std::fabs(dot(a, x_prime - x_star)) / na;
}

const char* kReportCsvHeader =
    "trial,l2_err,linf_err,cost_ratio,normalized_l2,normalized_linf,rank_ok";

std::string report_csv_row(std::size_t trial, const SolveReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%d", trial, r.l2_err,
                  r.linf_err, r.cost_ratio, r.normalized_l2, r.normalized_linf,
                  r.sketched_rank_ok ? 1 : 0);
    return buf;
}

namespace {
// JSON has no Infinity literal; clamp to DBL_MAX so rows stay parseable.
double json_safe(double x) {
    if (std::isinf(x)) return std::copysign(1.7976931348623157e308, x);
    return x;
}
}  // namespace

std::string report_json_row(std::size_t trial, const SolveReport& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "{\"trial\":%zu,\"l2_err\":%.17g,\"linf_err\":%.17g,\"cost_ratio\":%.17g,"
                  "\"normalized_l2\":%.17g,\"normalized_linf\":%.17g,\"rank_ok\":%s}",
                  trial, json_safe(r.l2_err), json_safe(r.linf_err), json_safe(r.cost_ratio),
                  json_safe(r.normalized_l2), json_safe(r.normalized_linf),
                  r.sketched_rank_ok ? "true" : "false");
    return buf;
}

}  // namespace sketchreg
