#include "sketchreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sketchreg/dense.hpp"
#include "sketchreg/diagnostics.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

Experiment experiment_from_name(const std::string& name) {
    if (name == "linf-positive") return Experiment::LinfPositive;
    if (name == "cs-counterexample") return Experiment::CsCounterexample;
    if (name == "lev-counterexample") return Experiment::LevCounterexample;
    if (name == "lower-bound-l2") return Experiment::LowerBoundL2;
    if (name == "diagnostics-suite" || name == "diag") return Experiment::DiagnosticsSuite;
    throw ConfigInvalid("unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::LinfPositive: return "linf-positive";
        case Experiment::CsCounterexample: return "cs-counterexample";
        case Experiment::LevCounterexample: return "lev-counterexample";
        case Experiment::LowerBoundL2: return "lower-bound-l2";
        case Experiment::DiagnosticsSuite: return "diagnostics-suite";
    }
    return "?";
}

namespace {

bool sketch_uses_countsketch(const std::string& spec) {
    return spec.find("countsketch") != std::string::npos;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (trials < 1) throw ConfigInvalid("trials: must be >= 1");
    if (eps <= 0.0) throw ConfigInvalid("eps: must be > 0");
    if (slack_c <= 0.0) throw ConfigInvalid("slack-C: must be > 0");
    if (threads < 1) throw ConfigInvalid("threads: must be >= 1");
    switch (experiment) {
        case Experiment::LinfPositive:
            if (n == 0 || d == 0 || m == 0)
                throw ConfigInvalid("linf-positive: n, d and m are required");
            if (noise < 0.0) throw ConfigInvalid("noise: must be >= 0");
            if (alpha || beta)
                throw ConfigInvalid("linf-positive: alpha/beta do not apply");
            if (s != 0 && !sketch_uses_countsketch(sketch))
                throw ConfigInvalid("s: only applies to countsketch sketches");
            break;
        case Experiment::CsCounterexample:
            if (d == 0 || m == 0 || s == 0 || alpha == 0)
                throw ConfigInvalid("cs-counterexample: d, m, s and alpha are required");
            if (sketch != "countsketch")
                throw ConfigInvalid("cs-counterexample: sketch must be countsketch");
            if (beta) throw ConfigInvalid("cs-counterexample: beta does not apply");
            if (s > m) throw ConfigInvalid("cs-counterexample: need s <= m");
            if (n && n < std::max(m, d + alpha))
                throw ConfigInvalid("cs-counterexample: need n >= max(m, d + alpha)");
            break;
        case Experiment::LevCounterexample:
            if (d == 0 || m == 0 || alpha == 0 || beta == 0)
                throw ConfigInvalid("lev-counterexample: d, m, alpha and beta are required");
            if (sketch != "leverage" && sketch != "srht")
                throw ConfigInvalid("lev-counterexample: sketch must be leverage or srht");
            if (s) throw ConfigInvalid("lev-counterexample: s does not apply");
            break;
        case Experiment::LowerBoundL2:
            if (n == 0 || d == 0 || m == 0)
                throw ConfigInvalid("lower-bound-l2: n, d and m are required");
            if (alpha || beta)
                throw ConfigInvalid("lower-bound-l2: alpha/beta do not apply");
            if (s != 0 && !sketch_uses_countsketch(sketch))
                throw ConfigInvalid("s: only applies to countsketch sketches");
            break;
        case Experiment::DiagnosticsSuite:
            if (n == 0 || d == 0 || m == 0)
                throw ConfigInvalid("diagnostics-suite: n, d and m are required");
            break;
    }
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment_name(experiment);
    j["n"] = n;
    j["d"] = d;
    j["m"] = m;
    if (s) j["s"] = s;
    if (alpha) j["alpha"] = alpha;
    if (beta) j["beta"] = beta;
    j["eps"] = eps;
    j["slack_C"] = slack_c;
    if (experiment == Experiment::LinfPositive) j["noise"] = noise;
    j["trials"] = trials;
    j["master_seed"] = master_seed;
    j["sketch"] = sketch;
    j["format"] = format == OutputFormat::Csv ? "csv" : "json";
    if (mixture) j["mixture"] = true;
    if (experiment == Experiment::DiagnosticsSuite) j["aips_c"] = aips_c;
    return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("config JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.experiment = experiment_from_name(j.at("experiment").get<std::string>());
        cfg.n = j.value("n", 0u);
        cfg.d = j.value("d", 0u);
        cfg.m = j.value("m", 0u);
        cfg.s = j.value("s", 0u);
        cfg.alpha = j.value("alpha", 0u);
        cfg.beta = j.value("beta", 0u);
        cfg.eps = j.value("eps", 0.25);
        cfg.slack_c = j.value("slack_C", 10.0);
        cfg.noise = j.value("noise", 1.0);
        cfg.trials = j.value("trials", 1u);
        cfg.master_seed = j.value("master_seed", 0ull);
        cfg.sketch = j.value("sketch", std::string("gaussian"));
        cfg.mixture = j.value("mixture", false);
        cfg.aips_c = j.value("aips_c", 4.0);
        const std::string fmt = j.value("format", std::string("csv"));
        if (fmt == "csv")
            cfg.format = OutputFormat::Csv;
        else if (fmt == "json")
            cfg.format = OutputFormat::Json;
        else
            throw ConfigInvalid("format: must be csv or json");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("config field: ") + e.what());
    }
    return cfg;
}

Quantiles quantiles_of(std::vector<double> xs) {
    if (xs.empty()) throw EmptyInput("quantiles_of: no values");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    auto rank = [&](double q) {
        // lower nearest rank: smallest index r with (r+1)/n >= q
        const std::size_t r = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(n)));
        return xs[r == 0 ? 0 : r - 1];
    };
    Quantiles out;
    out.min = xs.front();
    out.p25 = rank(0.25);
    out.median = rank(0.50);
    out.p75 = rank(0.75);
    out.p95 = rank(0.95);
    out.max = xs.back();
    return out;
}

TrialSummary summarize(const std::vector<SolveReport>& rows) {
    if (rows.empty()) throw EmptyInput("summarize: no rows");
    std::vector<double> l2, linf, nlinf, cost;
    l2.reserve(rows.size());
    for (const SolveReport& r : rows) {
        l2.push_back(r.l2_err);
        linf.push_back(r.linf_err);
        nlinf.push_back(r.normalized_linf);
        cost.push_back(r.cost_ratio);
    }
    TrialSummary s;
    s.l2_err = quantiles_of(std::move(l2));
    s.linf_err = quantiles_of(std::move(linf));
    s.normalized_linf = quantiles_of(std::move(nlinf));
    s.cost_ratio = quantiles_of(std::move(cost));
    s.trials_run = rows.size();
    return s;
}

namespace {

std::string quantiles_json(const Quantiles& q) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"min\":%.17g,\"p25\":%.17g,\"median\":%.17g,\"p75\":%.17g,"
                  "\"p95\":%.17g,\"max\":%.17g}",
                  q.min, q.p25, q.median, q.p75, q.p95, q.max);
    return buf;
}

}  // namespace

std::string TrialSummary::to_json() const {
    std::string out = "{\"type\":\"summary\",\"trials_run\":" + std::to_string(trials_run);
    char buf[64];
    std::snprintf(buf, sizeof(buf), ",\"exceedance_rate\":%.17g", exceedance_rate);
    out += buf;
    if (event_rate >= 0.0) {
        std::snprintf(buf, sizeof(buf), ",\"event_rate\":%.17g", event_rate);
        out += buf;
    }
    out += ",\"l2_err\":" + quantiles_json(l2_err);
    out += ",\"linf_err\":" + quantiles_json(linf_err);
    out += ",\"normalized_linf\":" + quantiles_json(normalized_linf);
    out += ",\"cost_ratio\":" + quantiles_json(cost_ratio);
    out += '}';
    return out;
}

SketchOperator build_sketch(const std::string& spec, std::size_t m, std::size_t n,
                            std::size_t s, std::uint64_t seed,
                            const std::vector<double>* scores, const Matrix* reference) {
    if (spec == "gaussian") return make_gaussian(m, n, seed);
    if (spec == "srht") return make_srht(m, n, seed);
    if (spec == "countsketch") {
        if (s == 0) throw ConfigInvalid("countsketch: s is required");
        return make_countsketch(m, n, s, seed);
    }
    if (spec == "leverage") {
        if (scores) return make_leverage_sampler(*scores, m, seed);
        if (reference) return make_leverage_sampler(*reference, m, seed);
        throw ConfigInvalid("leverage: no reference matrix available");
    }
    if (spec.rfind("composed:", 0) == 0) {
        // outermost first: composed:gaussian@64,srht@1024
        std::vector<std::pair<std::string, std::size_t>> parts;
        std::stringstream ss(spec.substr(9));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto at = item.find('@');
            if (at == std::string::npos)
                throw ConfigInvalid("composed: each child must be family@m");
            parts.emplace_back(item.substr(0, at),
                               static_cast<std::size_t>(std::stoull(item.substr(at + 1))));
        }
        if (parts.size() < 2) throw ConfigInvalid("composed: need at least two children");
        for (auto& [fam, mm] : parts)
            if (fam == "leverage" || fam.rfind("composed", 0) == 0)
                throw ConfigInvalid("composed: children must be data-oblivious leaf sketches");
        // innermost child reads the instance's n rows
        std::size_t child_n = n;
        std::uint64_t idx = parts.size();
        SketchOperator op = build_sketch(parts.back().first, parts.back().second, child_n, s,
                                         SeedStream{seed, --idx}.key(), nullptr, nullptr);
        for (std::size_t i = parts.size() - 1; i-- > 0;) {
            SketchOperator outer = build_sketch(parts[i].first, parts[i].second, op.m(), s,
                                                SeedStream{seed, --idx}.key(), nullptr, nullptr);
            op = compose(outer, op);
        }
        return op;
    }
    throw ConfigInvalid("unknown sketch '" + spec + "'");
}

namespace {
std::atomic<bool> g_interrupt{false};
}  // namespace

void request_interrupt() { g_interrupt.store(true, std::memory_order_relaxed); }
bool interrupt_requested() { return g_interrupt.load(std::memory_order_relaxed); }
void clear_interrupt() { g_interrupt.store(false, std::memory_order_relaxed); }

namespace {

void check_report_invariants(const SolveReport& r, std::size_t d) {
    const double slack = 1e-9;
    if (r.linf_err > r.l2_err * (1.0 + slack) + 1e-300)
        throw InternalInvariant("SolveReport: linf_err > l2_err");
    if (r.l2_err > std::sqrt(static_cast<double>(d)) * r.linf_err * (1.0 + slack) + 1e-300)
        throw InternalInvariant("SolveReport: l2_err > sqrt(d) linf_err");
    if (!(r.cost_ratio >= 1.0 - 1e-9))
        throw InternalInvariant("SolveReport: cost_ratio < 1 - 1e-9");
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mutex;
    const std::size_t nthreads = std::min(threads, count);
    for (std::size_t t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.experiment == Experiment::DiagnosticsSuite) {
        ExperimentResult res;
        res.json_text = run_diagnostics_suite(cfg);
        res.csv_text = res.json_text;
        return res;
    }

    // Shared fixed instance for the counterexample experiments.
    std::optional<RegressionInstance> shared;
    std::vector<double> lev_scores;
    CsAdversarialParams cs_params;
    if (cfg.experiment == Experiment::CsCounterexample) {
        cs_params.d = cfg.d;
        cs_params.alpha = cfg.alpha;
        // m <= n is a sketch invariant; extra rows of A and b are exact zeros
        cs_params.n = cfg.n ? cfg.n : std::max(cfg.d + cfg.alpha, cfg.m);
        shared = gen_cs_adversarial(cs_params);
    } else if (cfg.experiment == Experiment::LevCounterexample) {
        LevAdversarialParams lp;
        lp.d = cfg.d;
        lp.alpha = cfg.alpha;
        lp.beta = cfg.beta;
        RegressionInstance inst = gen_lev_adversarial(lp);
        if (cfg.sketch == "srht") inst = pad_to_power_of_two(std::move(inst));
        if (cfg.sketch == "leverage") lev_scores = leverage_scores(inst.a);
        shared = std::move(inst);
    }
    if (shared) shared->validate();

    std::vector<TrialRecord> records(cfg.trials);
    std::vector<char> done(cfg.trials, 0);
    const std::vector<double>* scores_ptr = lev_scores.empty() ? nullptr : &lev_scores;

    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
        if (interrupt_requested()) return;
        SeedStream trial_stream{cfg.master_seed, t};
        const std::uint64_t inst_seed = trial_stream.substream(0).key();
        const std::uint64_t sketch_seed = trial_stream.substream(1).key();

        const RegressionInstance* inst = nullptr;
        RegressionInstance local;
        if (shared) {
            inst = &*shared;
        } else if (cfg.experiment == Experiment::LinfPositive) {
            local = gen_random_wellcond(cfg.n, cfg.d, cfg.noise, inst_seed);
            if (cfg.sketch == "srht" && !is_power_of_two(local.a.rows()))
                local = pad_to_power_of_two(std::move(local));
            inst = &local;
        } else {  // LowerBoundL2
            bool use_d2 = false;
            if (cfg.mixture) {
                Rng coin = trial_stream.substream(2).rng();
                use_d2 = coin.uniform() < 0.5;
            }
            local = use_d2 ? gen_lower_bound_d2(cfg.n, cfg.d, inst_seed)
                           : gen_lower_bound_d1(cfg.n, cfg.d, inst_seed);
            if (cfg.sketch == "srht" && !is_power_of_two(local.a.rows()))
                local = pad_to_power_of_two(std::move(local));
            inst = &local;
        }

        SketchOperator sk = build_sketch(cfg.sketch, cfg.m, inst->a.rows(), cfg.s,
                                         sketch_seed, scores_ptr, &inst->a);

        TrialRecord rec;
        rec.trial = t;
        rec.report = sketch_and_solve(*inst, sk);
        check_report_invariants(rec.report, inst->a.cols());
        GuaranteeCheck gc = guarantee_check(rec.report, cfg.eps, cfg.slack_c);
        rec.linf_pass = gc.linf_pass;
        rec.l2_pass = gc.l2_pass;

        if (cfg.experiment == Experiment::CsCounterexample) {
            EventReport ev = detect_events(sk, cs_params);
            if (ev.witness_column) {
                const std::size_t j = *ev.witness_column;
                rec.witness_err =
                    std::fabs(rec.report.x_prime[j] - (*inst->x_star)[j]);
            }
            rec.event = std::move(ev);
        }
        records[t] = std::move(rec);
        done[t] = 1;
    });

    ExperimentResult res;
    if (interrupt_requested()) {
        std::size_t completed = 0;
        while (completed < cfg.trials && done[completed]) ++completed;
        if (completed == 0) throw Error("interrupted before any trial completed");
        records.resize(completed);
        res.truncated = true;
    }
    std::vector<SolveReport> rows;
    rows.reserve(records.size());
    std::size_t failures = 0, events = 0;
    for (const TrialRecord& r : records) {
        rows.push_back(r.report);
        if (!r.linf_pass) ++failures;
        if (r.event && r.event->witness_column) ++events;
    }
    res.summary = summarize(rows);
    res.summary.exceedance_rate =
        static_cast<double>(failures) / static_cast<double>(records.size());
    if (cfg.experiment == Experiment::CsCounterexample)
        res.summary.event_rate =
            static_cast<double>(events) / static_cast<double>(records.size());
    res.records = std::move(records);
    return res;
}

std::string render_csv(const ExperimentConfig& cfg, const ExperimentResult& res,
                       const std::string& timestamp) {
    std::string out = "# sketchreg " + experiment_name(cfg.experiment) +
                      " config=" + cfg.to_json();
    if (!timestamp.empty()) out += " generated=" + timestamp;
    out += '\n';
    out += kReportCsvHeader;
    out += '\n';
    for (const TrialRecord& r : res.records) {
        out += report_csv_row(r.trial, r.report);
        out += '\n';
    }
    if (res.truncated)
        out += "# truncated after " + std::to_string(res.records.size()) + " trials\n";
    out += "# summary " + res.summary.to_json() + '\n';
    return out;
}

std::string render_json_lines(const ExperimentConfig& cfg, const ExperimentResult& res) {
    std::string out;
    for (const TrialRecord& r : res.records) {
        out += report_json_row(r.trial, r.report);
        out += '\n';
    }
    std::string summary = res.summary.to_json();
    summary.pop_back();  // merge config into the summary object
    if (res.truncated) summary += ",\"truncated\":true";
    out += summary + ",\"config\":" + cfg.to_json() + "}\n";
    return out;
}

std::string csv_body(const std::string& csv_text) {
    std::string body;
    std::stringstream ss(csv_text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line[0] == '#') continue;
        body += line;
        body += '\n';
    }
    return body;
}

std::string run_diagnostics_suite(const ExperimentConfig& cfg) {
    std::string out;
    const std::uint64_t seed = cfg.master_seed;
    const std::size_t n = cfg.n, d = cfg.d, m = cfg.m;

    // subspace distortion of an SRHT on a random orthonormal basis
    {
        RegressionInstance inst = gen_lower_bound_d1(n, d, SeedStream{seed, 1}.key());
        Matrix basis = inst.a;
        SketchOperator s = make_srht(m, n, SeedStream{seed, 2}.key());
        out += embedding_distortion(s, basis, 64, SeedStream{seed, 3}.key()).to_json();
        out += '\n';
    }
    // approximate matrix product error
    {
        SketchOperator s = make_srht(m, n, SeedStream{seed, 4}.key());
        Rng rng = SeedStream{seed, 5}.rng();
        Matrix a(n, d), b(n, d);
        rng.fill_normal(a.data().data(), n * d);
        rng.fill_normal(b.data().data(), n * d);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "{\"diag\":\"amp\",\"error\":%.17g}\n",
                      amp_error(s, a, b));
        out += buf;
    }
    // AIPS
    {
        SketchOperator s = make_srht(m, n, SeedStream{seed, 6}.key());
        out += aips_check(s, cfg.aips_c).to_json();
        out += '\n';
    }
    // Neumann series truncation
    {
        Rng rng = SeedStream{seed, 7}.rng();
        Matrix a(n, d);
        rng.fill_normal(a.data().data(), n * d);
        SketchOperator s = make_srht(std::min(n, std::max(m, 64 * d)), n,
                                     SeedStream{seed, 8}.key());
        out += neumann_validate(s, a, 12).to_json();
        out += '\n';
    }
    // Gaussian norm identity
    {
        Rng rng = SeedStream{seed, 9}.rng();
        Matrix a(8, 4);
        rng.fill_normal(a.data().data(), 32);
        out += gaussian_norm_identity(a, 1.0, cfg.trials, SeedStream{seed, 10}.key())
                   .to_json();
        out += '\n';
    }
    return out;
}

}  // namespace sketchreg
