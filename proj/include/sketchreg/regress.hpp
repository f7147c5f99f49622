#pragma once

#include <optional>
#include <string>

#include "sketchreg/matrix.hpp"
#include "sketchreg/sketch.hpp"

namespace sketchreg {

/// A regression problem min ||Ax - b||_2 together with (optionally) its known
/// optimum and the scale factors ||Ax*-b||_2 and ||A^+||_2 that normalize the
/// error bounds.
struct RegressionInstance {
    Matrix a;
    Vector b;
    std::optional<Vector> x_star;
    std::optional<double> residual_norm;
    std::optional<double> pinv_norm;
    std::string label;

    void validate() const;
    std::string params_json;  // generator parameters, for the sidecar
    std::uint64_t seed = 0;
    std::string sidecar_json() const;
};

struct SolveReport {
    Vector x_prime;
    double l2_err = 0.0;
    double linf_err = 0.0;
    double cost_ratio = 1.0;
    double normalized_l2 = 0.0;
    double normalized_linf = 0.0;
    bool sketched_rank_ok = true;
    // set when the bound scale ||Ax*-b|| ||A^+|| vanishes but the error does not
    bool degenerate = false;
};

/// Solves min ||S A x - S b||_2 as x' = (SA)^+ (Sb) and measures the
/// deviation from the instance optimum. x_star, residual_norm and pinv_norm
/// are computed when the instance does not carry them.
SolveReport sketch_and_solve(const RegressionInstance& inst, const SketchOperator& s);

struct GuaranteeCheck {
    bool l2_pass = false;
    bool linf_pass = false;
};

/// normalized_l2 <= C eps and normalized_linf <= C eps.
GuaranteeCheck guarantee_check(const SolveReport& report, double eps, double slack_c);

/// |<a, x' - x*>| / ||a||_2.
double directional_error(const Vector& x_prime, const Vector& x_star, const Vector& a);

/// CSV header matching SolveReport serialization.
extern const char* kReportCsvHeader;
std::string report_csv_row(std::size_t trial, const SolveReport& r);
std::string report_json_row(std::size_t trial, const SolveReport& r);

}  // namespace sketchreg
