#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sketchreg/harness.hpp"
#include "sketchreg/rng.hpp"

using namespace sketchreg;

TEST_SUITE_BEGIN("harness");

TEST_CASE("summarize conventions") {
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(summarize({}), EmptyInput);
    }
    SUBCASE("single row: every quantile equals that row") {
        SolveReport r;
        r.l2_err = 2.0;
        r.linf_err = 1.5;
        r.normalized_linf = 0.7;
        r.cost_ratio = 1.1;
        TrialSummary s = summarize({r});
        CHECK(s.l2_err.min == 2.0);
        CHECK(s.l2_err.median == 2.0);
        CHECK(s.l2_err.max == 2.0);
        CHECK(s.trials_run == 1);
    }
    SUBCASE("two rows: median takes the lower nearest rank") {
        SolveReport a, b;
        a.linf_err = 1.0;
        b.linf_err = 3.0;
        a.cost_ratio = b.cost_ratio = 1.0;
        TrialSummary s = summarize({a, b});
        CHECK(s.linf_err.median == 1.0);
        CHECK(s.linf_err.p75 == 3.0);
        CHECK(s.linf_err.max == 3.0);
    }
    SUBCASE("permutation invariance") {
        Rng rng(12);
        std::vector<SolveReport> rows(17);
        for (auto& r : rows) {
            r.linf_err = rng.uniform();
            r.l2_err = r.linf_err * 1.5;
            r.normalized_linf = rng.uniform();
            r.cost_ratio = 1.0 + rng.uniform();
        }
        TrialSummary before = summarize(rows);
        std::reverse(rows.begin(), rows.end());
        std::swap(rows[3], rows[11]);
        TrialSummary after = summarize(rows);
        CHECK(before.to_json() == after.to_json());
    }
}

TEST_CASE("quantiles_of uses lower nearest rank") {
    Quantiles q = quantiles_of({4.0, 1.0, 3.0, 2.0});
    CHECK(q.min == 1.0);
    CHECK(q.p25 == 1.0);   // ceil(0.25*4) = 1 -> first
    CHECK(q.median == 2.0);
    CHECK(q.p75 == 3.0);
    CHECK(q.p95 == 4.0);
    CHECK(q.max == 4.0);
}

TEST_CASE("config validation produces field-level errors") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::LinfPositive;
    cfg.trials = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), "trials: must be >= 1", ConfigInvalid);
    cfg.trials = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);  // missing n/d/m
    cfg.n = 64;
    cfg.d = 4;
    cfg.m = 16;
    cfg.validate();
    cfg.s = 2;  // s without countsketch
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
    cfg.sketch = "countsketch";
    cfg.validate();

    ExperimentConfig lev;
    lev.experiment = Experiment::LevCounterexample;
    lev.d = 8;
    lev.m = 16;
    lev.alpha = 4;
    lev.beta = 2;
    lev.sketch = "gaussian";
    CHECK_THROWS_AS(lev.validate(), ConfigInvalid);
    lev.sketch = "leverage";
    lev.validate();
}

TEST_CASE("config json round trip") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::CsCounterexample;
    cfg.d = 16;
    cfg.m = 64;
    cfg.s = 2;
    cfg.alpha = 4;
    cfg.n = 64;
    cfg.eps = 1.0;
    cfg.slack_c = 1.0;
    cfg.trials = 3;
    cfg.master_seed = 99;
    cfg.sketch = "countsketch";
    ExperimentConfig back = config_from_json(cfg.to_json());
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.d == cfg.d);
    CHECK(back.m == cfg.m);
    CHECK(back.s == cfg.s);
    CHECK(back.master_seed == cfg.master_seed);
    CHECK(back.to_json() == cfg.to_json());

    CHECK_THROWS_AS(config_from_json("{oops"), ConfigInvalid);
    CHECK_THROWS_AS(config_from_json("{\"experiment\":\"nope\"}"), ConfigInvalid);
}

namespace {

ExperimentConfig small_linf_config() {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::LinfPositive;
    cfg.n = 64;
    cfg.d = 4;
    cfg.m = 32;
    cfg.eps = 0.5;
    cfg.slack_c = 10.0;
    cfg.trials = 8;
    cfg.master_seed = 4242;
    cfg.sketch = "gaussian";
    return cfg;
}

}  // namespace

TEST_CASE("run_experiment reruns are byte identical") {
    ExperimentConfig cfg = small_linf_config();
    ExperimentResult r1 = run_experiment(cfg);
    ExperimentResult r2 = run_experiment(cfg);
    const std::string c1 = render_csv(cfg, r1, "2026-01-01T00:00:00Z");
    const std::string c2 = render_csv(cfg, r2, "2026-01-02T09:09:09Z");  // different stamp
    CHECK(csv_body(c1) == csv_body(c2));
    CHECK(c1 != c2);  // the comment header may differ
    CHECK(r1.summary.to_json() == r2.summary.to_json());
    CHECK(render_json_lines(cfg, r1) == render_json_lines(cfg, r2));
}

TEST_CASE("parallel and serial execution agree exactly") {
    ExperimentConfig cfg = small_linf_config();
    cfg.threads = 1;
    ExperimentResult serial = run_experiment(cfg);
    cfg.threads = 4;
    ExperimentResult parallel = run_experiment(cfg);
    CHECK(render_json_lines(cfg, serial) == render_json_lines(cfg, parallel));
}

TEST_CASE("srht experiment pads non power of two instances") {
    ExperimentConfig cfg = small_linf_config();
    cfg.n = 48;  // not a power of two
    cfg.sketch = "srht";
    cfg.m = 32;
    ExperimentResult res = run_experiment(cfg);
    CHECK(res.summary.trials_run == cfg.trials);
}

TEST_CASE("orthonormal srht trial has zero exceedance") {
    ExperimentConfig cfg = small_linf_config();
    cfg.sketch = "srht";
    cfg.m = 64;
    cfg.trials = 1;
    ExperimentResult res = run_experiment(cfg);
    CHECK(res.summary.exceedance_rate == 0.0);
    CHECK(res.summary.l2_err.max <= 1e-9);
}

TEST_CASE("cs-counterexample experiment reports event rate and witnesses") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::CsCounterexample;
    cfg.d = 16;
    cfg.alpha = 4;
    cfg.m = 128;
    cfg.n = 128;
    cfg.s = 2;
    cfg.eps = 1.0;
    cfg.slack_c = 1.0;
    cfg.trials = 40;
    cfg.master_seed = 7;
    cfg.sketch = "countsketch";
    ExperimentResult res = run_experiment(cfg);
    CHECK(res.summary.event_rate >= 0.0);
    CHECK(res.summary.event_rate <= 1.0);
    bool any_witness = false;
    for (const TrialRecord& r : res.records)
        if (r.event && r.event->witness_column) {
            any_witness = true;
            CHECK(std::fabs(r.witness_err - 1.0 / 4.0) <= 1e-9);  // 1/(s sqrt(alpha))
        }
    CHECK(any_witness);
}

TEST_CASE("lower-bound-l2 mixture mode draws from both distributions") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::LowerBoundL2;
    cfg.n = 64;
    cfg.d = 4;
    cfg.m = 16;
    cfg.trials = 16;
    cfg.master_seed = 2;
    cfg.sketch = "gaussian";
    cfg.mixture = true;
    ExperimentResult res = run_experiment(cfg);
    CHECK(res.summary.trials_run == 16);
    // D2 instances are consistent on the top block; their reports differ from D1's x*=0
    std::size_t zero_xstar = 0;
    for (const TrialRecord& r : res.records)
        if (norm2(r.report.x_prime) < 0.9) ++zero_xstar;
    CHECK(zero_xstar > 0);
    CHECK(zero_xstar < 16);
}

TEST_CASE("build_sketch composed spec") {
    SketchOperator op = build_sketch("composed:gaussian@8,srht@32", 0, 64, 0, 5, nullptr,
                                     nullptr);
    CHECK(op.family() == SketchFamily::Composed);
    CHECK(op.m() == 8);
    CHECK(op.n() == 64);
    REQUIRE(op.children().size() == 2);
    CHECK(op.children()[0]->family() == SketchFamily::Gaussian);
    CHECK(op.children()[1]->family() == SketchFamily::Srht);

    CHECK_THROWS_AS(build_sketch("composed:gaussian@8", 0, 64, 0, 5, nullptr, nullptr),
                    ConfigInvalid);
    CHECK_THROWS_AS(build_sketch("composed:leverage@8,srht@32", 0, 64, 0, 5, nullptr, nullptr),
                    ConfigInvalid);
    CHECK_THROWS_AS(build_sketch("what", 4, 8, 0, 5, nullptr, nullptr), ConfigInvalid);
}

TEST_CASE("diagnostics suite emits one JSON record per line") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::DiagnosticsSuite;
    cfg.n = 256;
    cfg.d = 4;
    cfg.m = 128;
    cfg.trials = 500;
    cfg.master_seed = 11;
    const std::string out = run_diagnostics_suite(cfg);
    std::size_t lines = 0;
    for (char c : out)
        if (c == '\n') ++lines;
    CHECK(lines == 5);
    CHECK(out.find("\"diag\":\"distortion\"") != std::string::npos);
    CHECK(out.find("\"diag\":\"amp\"") != std::string::npos);
    CHECK(out.find("\"diag\":\"aips\"") != std::string::npos);
    CHECK(out.find("\"diag\":\"neumann\"") != std::string::npos);
    CHECK(out.find("\"diag\":\"gaussian_norm\"") != std::string::npos);
}

TEST_SUITE_END();
