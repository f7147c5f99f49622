// sketchreg: reproducible sketch-and-solve regression experiments.

#include <csignal>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sketchreg/dense.hpp"
#include "sketchreg/harness.hpp"
#include "sketchreg/instances.hpp"

using namespace sketchreg;

namespace {

void on_sigint(int) { request_interrupt(); }

std::string now_iso8601() {
    char buf[32];
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Options {
    ExperimentConfig cfg;
    std::string format = "csv";
};

void add_experiment_options(CLI::App* sub, Options& opt, bool wants_n, bool wants_alpha,
                            bool wants_beta, bool wants_s, bool wants_noise) {
    if (wants_n) sub->add_option("--n", opt.cfg.n, "input rows");
    sub->add_option("--d", opt.cfg.d, "columns of A");
    sub->add_option("--m", opt.cfg.m, "sketch rows");
    if (wants_s) sub->add_option("--s", opt.cfg.s, "countsketch column sparsity");
    if (wants_alpha) sub->add_option("--alpha", opt.cfg.alpha, "instance parameter alpha");
    if (wants_beta) sub->add_option("--beta", opt.cfg.beta, "instance parameter beta");
    sub->add_option("--eps", opt.cfg.eps, "guarantee epsilon");
    sub->add_option("--slack-C", opt.cfg.slack_c, "slack constant for the <= checks");
    if (wants_noise) sub->add_option("--noise", opt.cfg.noise, "instance noise level");
    sub->add_option("--trials", opt.cfg.trials, "Monte-Carlo repetitions");
    sub->add_option("--seed", opt.cfg.master_seed, "master seed");
    sub->add_option("--sketch", opt.cfg.sketch,
                    "gaussian|srht|countsketch|leverage|composed:<fam@m,...>");
    sub->add_option("--out", opt.cfg.out_path, "output file (stdout when omitted)");
    sub->add_option("--format", opt.format, "csv|json");
    sub->add_option("--threads", opt.cfg.threads, "worker threads");
}

int run_configured(Options& opt) {
    if (opt.format == "csv")
        opt.cfg.format = OutputFormat::Csv;
    else if (opt.format == "json")
        opt.cfg.format = OutputFormat::Json;
    else
        throw ConfigInvalid("format: must be csv or json");

    ExperimentResult res = run_experiment(opt.cfg);
    std::string payload;
    if (opt.cfg.experiment == Experiment::DiagnosticsSuite)
        payload = res.json_text;
    else if (opt.cfg.format == OutputFormat::Csv)
        payload = render_csv(opt.cfg, res, now_iso8601());
    else
        payload = render_json_lines(opt.cfg, res);

    if (opt.cfg.out_path.empty()) {
        std::cout << payload;
    } else {
        std::ofstream out(opt.cfg.out_path);
        if (!out) throw IoError("cannot open " + opt.cfg.out_path);
        out << payload;
        if (opt.cfg.experiment != Experiment::DiagnosticsSuite)
            std::cout << res.summary.to_json() << "\n";
    }
    return res.truncated ? 1 : 0;
}

const std::pair<const char*, const char*> kBuiltinPresets[] = {
    {"linf-positive-gaussian",
     R"({"experiment":"linf-positive","n":2048,"d":32,"m":512,"eps":0.25,"slack_C":10,
         "noise":1,"trials":200,"master_seed":20260808,"sketch":"gaussian","format":"csv"})"},
    {"linf-positive-srht",
     R"({"experiment":"linf-positive","n":2048,"d":32,"m":512,"eps":0.25,"slack_C":10,
         "noise":1,"trials":200,"master_seed":20260808,"sketch":"srht","format":"csv"})"},
    {"cs-counterexample",
     R"({"experiment":"cs-counterexample","n":4096,"d":256,"m":4096,"s":4,"alpha":4,
         "eps":1,"slack_C":1,"trials":200,"master_seed":20260808,"sketch":"countsketch",
         "format":"csv"})"},
    {"lev-counterexample",
     R"({"experiment":"lev-counterexample","d":64,"alpha":64,"beta":8,"m":256,"eps":0.5,
         "slack_C":10,"trials":200,"master_seed":20260808,"sketch":"leverage","format":"csv"})"},
    {"lev-counterexample-srht",
     R"({"experiment":"lev-counterexample","d":64,"alpha":64,"beta":8,"m":256,"eps":0.5,
         "slack_C":10,"trials":200,"master_seed":20260808,"sketch":"srht","format":"csv"})"},
    {"lower-bound-l2",
     R"({"experiment":"lower-bound-l2","n":2048,"d":16,"m":256,"eps":0.25,"slack_C":10,
         "trials":100,"master_seed":20260808,"sketch":"gaussian","format":"csv"})"},
    {"diagnostics",
     R"({"experiment":"diagnostics-suite","n":1024,"d":8,"m":256,"trials":100000,
         "master_seed":20260808,"aips_c":4})"},
};

std::string load_preset_text(const std::string& name) {
    // a path wins; then presets/<name>.json next to the cwd; then builtins
    for (const std::string candidate : {name, "presets/" + name + ".json"}) {
        std::ifstream in(candidate);
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }
    }
    for (const auto& [key, text] : kBuiltinPresets)
        if (name == key) return text;
    throw ConfigInvalid("preset: no file or builtin named '" + name + "'");
}

int cmd_gen(const std::string& family, std::size_t n, std::size_t d, std::size_t alpha,
            std::size_t beta, double noise, std::uint64_t seed, bool pad,
            const std::string& out) {
    RegressionInstance inst;
    if (family == "cs-adversarial") {
        inst = gen_cs_adversarial(CsAdversarialParams{d, alpha, n ? n : d + alpha});
    } else if (family == "lev-adversarial") {
        LevAdversarialParams p{d, alpha, beta, 0};
        inst = gen_lev_adversarial(p);
    } else if (family == "lower-bound-d1") {
        inst = gen_lower_bound_d1(n, d, seed);
    } else if (family == "lower-bound-d2") {
        inst = gen_lower_bound_d2(n, d, seed);
    } else if (family == "wellcond") {
        inst = gen_random_wellcond(n, d, noise, seed);
    } else {
        throw ConfigInvalid("gen: unknown family '" + family + "'");
    }
    if (pad) inst = pad_to_power_of_two(std::move(inst));
    inst.validate();
    write_matrix(out + ".A.txt", inst.a);
    write_vector(out + ".b.txt", inst.b);
    if (inst.x_star) write_vector(out + ".xstar.txt", *inst.x_star);
    std::ofstream side(out + ".json");
    if (!side) throw IoError("cannot open " + out + ".json");
    side << inst.sidecar_json() << "\n";
    std::cout << "wrote " << out << ".{A.txt,b.txt,xstar.txt,json}\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);

    CLI::App app{"sketch-and-solve regression experiments"};
    app.require_subcommand(1);

    Options opt;

    auto* linf = app.add_subcommand("linf-positive", "linf guarantee on benign instances");
    add_experiment_options(linf, opt, true, false, false, true, true);
    auto* cs = app.add_subcommand("cs-counterexample", "Count-Sketch linf failure");
    add_experiment_options(cs, opt, true, true, false, true, false);
    auto* lev = app.add_subcommand("lev-counterexample", "leverage sampling linf failure");
    add_experiment_options(lev, opt, false, true, true, false, false);
    auto* lbl2 = app.add_subcommand("lower-bound-l2", "l2 lower-bound scaling");
    add_experiment_options(lbl2, opt, true, false, false, false, false);
    lbl2->add_flag("--mixture", opt.cfg.mixture, "flip between D1 and D2 per trial");
    auto* diag = app.add_subcommand("diagnostics-suite", "structural diagnostics");
    diag->alias("diag");
    add_experiment_options(diag, opt, true, false, false, false, false);
    diag->add_option("--aips-c", opt.cfg.aips_c, "AIPS slack constant");

    // gen
    std::string gen_family, gen_out = "instance";
    std::size_t gen_n = 0, gen_d = 0, gen_alpha = 0, gen_beta = 0;
    double gen_noise = 1.0;
    std::uint64_t gen_seed = 0;
    bool gen_pad = false;
    auto* gen = app.add_subcommand("gen", "write an instance in the plain-text format");
    gen->add_option("--family", gen_family,
                    "cs-adversarial|lev-adversarial|lower-bound-d1|lower-bound-d2|wellcond")
        ->required();
    gen->add_option("--n", gen_n, "rows");
    gen->add_option("--d", gen_d, "columns");
    gen->add_option("--alpha", gen_alpha, "alpha");
    gen->add_option("--beta", gen_beta, "beta");
    gen->add_option("--noise", gen_noise, "noise");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_flag("--pad-pow2", gen_pad, "pad rows to the next power of two");
    gen->add_option("--out", gen_out, "output path prefix");

    // run --preset
    std::string preset_name, preset_out, preset_format;
    auto* run = app.add_subcommand("run", "run a shipped preset configuration");
    run->add_option("--preset", preset_name, "preset name or JSON config path")->required();
    run->add_option("--out", preset_out, "output file override");
    run->add_option("--format", preset_format, "format override: csv|json");
    std::size_t preset_threads = 0;
    run->add_option("--threads", preset_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_family, gen_n, gen_d, gen_alpha, gen_beta, gen_noise, gen_seed,
                           gen_pad, gen_out);
        if (run->parsed()) {
            Options preset;
            preset.cfg = config_from_json(load_preset_text(preset_name));
            preset.format = preset.cfg.format == OutputFormat::Csv ? "csv" : "json";
            if (!preset_out.empty()) preset.cfg.out_path = preset_out;
            if (!preset_format.empty()) preset.format = preset_format;
            if (preset_threads) preset.cfg.threads = preset_threads;
            return run_configured(preset);
        }
        for (auto* sub : {linf, cs, lev, lbl2, diag})
            if (sub->parsed()) {
                opt.cfg.experiment = experiment_from_name(sub->get_name());
                if (sub->count("--sketch") == 0) {
                    if (sub == cs) opt.cfg.sketch = "countsketch";
                    if (sub == lev) opt.cfg.sketch = "leverage";
                }
                return run_configured(opt);
            }
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InternalInvariant& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
