#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sketchreg/instances.hpp"
#include "sketchreg/regress.hpp"

namespace sketchreg {

enum class Experiment {
    LinfPositive,
    CsCounterexample,
    LevCounterexample,
    LowerBoundL2,
    DiagnosticsSuite,
};

enum class OutputFormat { Csv, Json };

Experiment experiment_from_name(const std::string& name);
std::string experiment_name(Experiment e);

struct ExperimentConfig {
    Experiment experiment = Experiment::LinfPositive;
    std::size_t n = 0, d = 0, m = 0, s = 0, alpha = 0, beta = 0;
    double eps = 0.25;
    double slack_c = 10.0;
    double noise = 1.0;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    std::string sketch = "gaussian";  // gaussian|srht|countsketch|leverage|composed:<spec>
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
    std::size_t threads = 1;
    bool mixture = false;   // lower-bound-l2: flip between D1 and D2 per trial
    double aips_c = 4.0;    // diagnostics suite

    void validate() const;
    std::string to_json() const;
};

ExperimentConfig config_from_json(const std::string& text);

struct Quantiles {
    double min = 0.0, p25 = 0.0, median = 0.0, p75 = 0.0, p95 = 0.0, max = 0.0;
};

// Lower-nearest-rank quantile of a sorted copy of xs.
Quantiles quantiles_of(std::vector<double> xs);

struct TrialSummary {
    Quantiles l2_err, linf_err, normalized_linf, cost_ratio;
    double exceedance_rate = 0.0;  // fraction failing the linf guarantee check
    double event_rate = -1.0;      // cs-counterexample only; -1 when not applicable
    std::size_t trials_run = 0;
    std::string to_json() const;
};

TrialSummary summarize(const std::vector<SolveReport>& rows);

struct TrialRecord {
    std::size_t trial = 0;
    SolveReport report;
    bool linf_pass = true;
    bool l2_pass = true;
    std::optional<EventReport> event;
    double witness_err = 0.0;  // |x'_j - x*_j| at the witness column, when any
};

struct ExperimentResult {
    TrialSummary summary;
    std::vector<TrialRecord> records;
    bool truncated = false;  // interrupted; records hold the completed prefix
    std::string csv_text;   // rendered when format == Csv
    std::string json_text;  // rendered when format == Json
};

/// Cooperative interruption: pending trials are skipped, completed ones are
/// flushed with a truncation marker. Safe to call from a signal handler.
void request_interrupt();
bool interrupt_requested();
void clear_interrupt();

/// Runs every trial of the configured experiment. Deterministic in
/// (config, master_seed) regardless of thread count; per-trial streams are
/// stream(master_seed, trial) with substream 0 for the instance and 1 for
/// the sketch. Throws InternalInvariant if any row violates the SolveReport
/// invariants.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Renders rows + summary; timestamps only ever appear in the comment header.
std::string render_csv(const ExperimentConfig& cfg, const ExperimentResult& res,
                       const std::string& timestamp);
std::string render_json_lines(const ExperimentConfig& cfg, const ExperimentResult& res);

/// Lines of a CSV payload that are not comments; reruns must match on these.
std::string csv_body(const std::string& csv_text);

/// Runs the diagnostics suite for `cfg` (n, d, m, trials, aips_c) and returns
/// one JSON record per line.
std::string run_diagnostics_suite(const ExperimentConfig& cfg);

/// Builds the sketch named by `spec` ("gaussian", "srht", "countsketch",
/// "leverage", or "composed:fam@m,fam@m,..." outermost first) for an
/// instance with n rows. Leverage samplers reuse `scores` when given.
SketchOperator build_sketch(const std::string& spec, std::size_t m, std::size_t n,
                            std::size_t s, std::uint64_t seed,
                            const std::vector<double>* scores,
                            const Matrix* reference);

}  // namespace sketchreg
