#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace hidetify;

struct ParamFlags {
    std::optional<std::string> config;
    std::optional<std::vector<double>> taus;
    std::optional<std::size_t> m;
    std::optional<std::size_t> nk;
    std::optional<double> omega;
    std::optional<double> alpha_min;
    std::optional<double> alpha_max;
    std::optional<double> alpha_valid;
    std::optional<std::size_t> max_iters;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> min_denominator;
    std::size_t threads = 1;

    void add_to(CLI::App* app) {
        app->add_option("--config", config, "JSON file with RammParams keys");
        app->add_option("--taus", taus, "expectile levels, e.g. 0.25,0.5,0.75")->delimiter(',');
        app->add_option("--m", m, "random subsets per observation");
        app->add_option("--nk", nk, "subset size (default n/2)");
        app->add_option("--omega", omega, "cap on the share of rows the Min step may flag");
        app->add_option("--alpha-min", alpha_min, "Min step level");
        app->add_option("--alpha-max", alpha_max, "Max step level");
        app->add_option("--alpha-valid", alpha_valid, "validation step level");
        app->add_option("--max-iters", max_iters, "cap on Min/Max rounds");
        app->add_option("--seed", seed, "random seed (falls back to HIDETIFY_SEED, then 0)");
        app->add_option("--min-denominator", min_denominator, "Min step Bonferroni denominator")
            ->check(CLI::IsMember({"subset_size", "active_count"}));
        app->add_option("--threads", threads, "worker threads, 0 for all cores");
    }

    /// defaults < config file < flags; the seed falls back to the environment before 0.
    RammParams resolve() const {
        RammParams p;
        bool seed_from_config = false;
        if (config) {
            auto cfg = cli::read_json_file(*config);
            cli::apply_config(p, cfg);
            seed_from_config = cfg.contains("seed");
        }
        if (seed) {
            p.seed = *seed;
        } else if (!seed_from_config) {
            p.seed = 0;
            if (const char* env = std::getenv("HIDETIFY_SEED"); env && *env) {
                try {
                    std::size_t used = 0;
                    p.seed = std::stoull(env, &used);
                    if (env[used] != '\0') {
                        throw std::invalid_argument("trailing characters");
                    }
                } catch (const std::exception&) {
                    throw InvalidArgument(std::string("HIDETIFY_SEED is not an unsigned integer: ") + env);
                }
            }
        }
        if (taus) p.taus = ExpectileSequence(*taus);
        if (m) p.m = *m;
        if (nk) p.subset_size = *nk;
        if (omega) p.omega = *omega;
        if (alpha_min) p.alpha_min = *alpha_min;
        if (alpha_max) p.alpha_max = *alpha_max;
        if (alpha_valid) p.alpha_valid = *alpha_valid;
        if (max_iters) p.max_outer_iters = *max_iters;
        if (min_denominator) {
            p.min_denominator = *min_denominator == "active_count" ? MinStepDenominator::active_count
                                                                  : MinStepDenominator::subset_size;
        }
        p.threads = threads;
        return p;
    }
};

struct SimFlags {
    std::string model = "I";
    double mu = 10.0;
    double fraction = 0.15;
    std::size_t n = 100;
    std::size_t p = 300;

    void add_to(CLI::App* app) {
        app->add_option("--model", model, "contamination model: I, II or III")
            ->check(CLI::IsMember({"I", "II", "III", "1", "2", "3"}));
        app->add_option("--mu", mu, "contamination degree");
        app->add_option("--fraction", fraction, "share of contaminated rows");
        app->add_option("--n", n, "rows");
        app->add_option("--p", p, "predictors");
    }

    ContaminationSpec spec() const {
        ContaminationSpec s;
        s.model = *parse_model(model);
        s.mu = mu;
        s.fraction = fraction;
        return s;
    }
};

std::vector<Detector> parse_detectors(const std::vector<std::string>& names) {
    std::vector<Detector> out;
    for (const auto& name : names) {
        auto d = parse_detector(name);
        if (!d) {
            throw InvalidArgument("unknown detector '" + name + "'");
        }
        out.push_back(*d);
    }
    return out;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& name : names) {
        auto m = Method::parse(name);
        if (!m) {
            throw InvalidArgument("unknown method '" + name + "'");
        }
        out.push_back(*m);
    }
    return out;
}

/// Resolves flags inside the exit-code guard so that bad values map to exit 2.
template <typename Body>
int run(Body&& body) {
    int code = cli::ok;
    int guard = cli::guarded(std::cerr, [&] { code = body(); });
    return guard != cli::ok ? guard : code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detects influential observations in high-dimensional regression data"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    app.require_subcommand(1);

    const std::vector<std::string> all_detectors{"asymMIP", "MIP", "asymHIM", "HIM"};

    cli::DetectOptions detect_opt;
    ParamFlags detect_params;
    std::string detector_name = "asymMIP";
    auto* detect = app.add_subcommand("detect", "flag influential rows of a CSV file");
    detect->add_option("--input", detect_opt.input, "CSV file with a header row")->required();
    detect->add_option("--response", detect_opt.response, "response column name or 0-based index");
    detect->add_option("--detector", detector_name, "asymMIP, MIP, asymHIM or HIM")
        ->check(CLI::IsMember(all_detectors));
    detect->add_option("--out", detect_opt.out, "report CSV; metadata goes to <out>.meta.json");
    detect->add_flag("--drop-degenerate", detect_opt.drop_degenerate, "drop constant columns with a warning");
    detect->add_flag("--timestamp", detect_opt.timestamp, "record the run time in the metadata");
    detect_params.add_to(detect);

    cli::SimulateOptions sim_opt;
    SimFlags sim_flags;
    ParamFlags sim_params;
    std::vector<std::string> sim_detectors = all_detectors;
    auto* simulate = app.add_subcommand("simulate", "detection power and error on simulated data");
    sim_flags.add_to(simulate);
    simulate->add_option("--replications", sim_opt.replications, "Monte Carlo replications");
    simulate->add_option("--detectors", sim_detectors, "detectors to run")->delimiter(',');
    simulate->add_option("--out", sim_opt.out, "long-format results CSV");
    sim_params.add_to(simulate);

    cli::CompareOptions cmp_opt;
    SimFlags cmp_flags;
    ParamFlags cmp_params;
    std::vector<std::string> cmp_methods{"RawData", "asymMIP", "MIP", "asymHIM", "HIM"};
    auto* compare = app.add_subcommand("compare", "lasso fits on raw versus cleaned simulated data");
    cmp_flags.add_to(compare);
    compare->add_option("--replications", cmp_opt.replications, "Monte Carlo replications");
    compare->add_option("--methods", cmp_methods, "RawData and/or detectors")->delimiter(',');
    compare->add_option("--folds", cmp_opt.folds, "cross-validation folds");
    compare->add_option("--grid-size", cmp_opt.grid_size, "lambda grid points");
    compare->add_option("--out", cmp_opt.out, "long-format results CSV");
    compare->add_option("--summary-out", cmp_opt.summary_out, "per-method summary CSV");
    cmp_params.add_to(compare);

    cli::GenerateOptions gen_opt;
    SimFlags gen_flags;
    std::optional<std::uint64_t> gen_seed;
    auto* generate = app.add_subcommand("generate", "write one simulated sample as CSV");
    gen_flags.add_to(generate);
    generate->add_option("--seed", gen_seed, "random seed (falls back to HIDETIFY_SEED, then 0)");
    generate->add_option("--out", gen_opt.out, "sample CSV");
    generate->add_option("--truth", gen_opt.truth_out, "ground-truth file (default <out>.truth)");

    std::string report_in;
    std::string report_out = "summary.csv";
    auto* report = app.add_subcommand("report", "summarize a simulate or compare results table");
    report->add_option("--input", report_in, "results CSV")->required();
    report->add_option("--out", report_out, "summary CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : cli::validation_error;
    }

    if (*detect) {
        return run([&] {
            detect_opt.detector = *parse_detector(detector_name);
            detect_opt.params = detect_params.resolve();
            return cli::cmd_detect(detect_opt, std::cerr);
        });
    }
    if (*simulate) {
        return run([&] {
            sim_opt.contamination = sim_flags.spec();
            sim_opt.n = sim_flags.n;
            sim_opt.p = sim_flags.p;
            sim_opt.params = sim_params.resolve();
            sim_opt.seed = sim_opt.params.seed;
            sim_opt.threads = sim_params.threads;
            sim_opt.detectors = parse_detectors(sim_detectors);
            return cli::cmd_simulate(sim_opt, std::cerr);
        });
    }
    if (*compare) {
        return run([&] {
            cmp_opt.contamination = cmp_flags.spec();
            cmp_opt.n = cmp_flags.n;
            cmp_opt.p = cmp_flags.p;
            cmp_opt.params = cmp_params.resolve();
            cmp_opt.seed = cmp_opt.params.seed;
            cmp_opt.threads = cmp_params.threads;
            cmp_opt.methods = parse_methods(cmp_methods);
            return cli::cmd_compare(cmp_opt, std::cerr);
        });
    }
    if (*generate) {
        return run([&] {
            ParamFlags seed_only;
            seed_only.seed = gen_seed;
            gen_opt.contamination = gen_flags.spec();
            gen_opt.n = gen_flags.n;
            gen_opt.p = gen_flags.p;
            gen_opt.seed = seed_only.resolve().seed;
            return cli::cmd_generate(gen_opt, std::cerr);
        });
    }
    return cli::cmd_report(report_in, report_out, std::cerr);
}
