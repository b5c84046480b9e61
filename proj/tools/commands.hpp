#ifndef HIDETIFY_TOOLS_COMMANDS_HPP
#define HIDETIFY_TOOLS_COMMANDS_HPP

// Command implementations behind the hidetify CLI. Kept apart from argument
// parsing so the tests can drive them directly.

#include <hidetify/hidetify.hpp>

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hidetify::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, validation_error = 2, degenerate_error = 3, convergence_error = 4 };

struct ReportRow {
    std::size_t row = 0;  ///< 1-based
    std::optional<ObservationScore> t_min;
    std::optional<ObservationScore> t_max;
    std::string step_flagged;
    std::optional<ObservationScore> validation;
    bool influential = false;
};

/// One row per observation; statistics are the latest ones computed for that row.
inline std::vector<ReportRow> build_report(const DetectionResult& result, std::size_t n) {
    std::vector<ReportRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].row = i + 1;
    }
    for (const auto& step : result.trace) {
        for (const auto& s : step.scores) {
            auto& r = rows.at(s.observation);
            switch (step.step) {
                case StepKind::min:
                    r.t_min = s;
                    break;
                case StepKind::max:
                    r.t_max = s;
                    break;
                case StepKind::validation:
                case StepKind::single:
                    r.validation = s;
                    break;
            }
        }
        if (step.step == StepKind::min || step.step == StepKind::max || step.step == StepKind::single) {
            for (std::size_t k : step.flagged) {
                auto& label = rows.at(k).step_flagged;
                if (label.empty()) {
                    label = step.step == StepKind::single ? std::string("single")
                                                          : std::string(to_string(step.step)) + "@" +
                                                                std::to_string(step.iteration);
                }
            }
        }
    }
    for (std::size_t k : result.influential) {
        rows.at(k).influential = true;
    }
    return rows;
}

inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    auto num = [](const std::optional<ObservationScore>& s, bool p) {
        return s ? format_number(p ? s->p_value : s->statistic) : std::string("NA");
    };
    out << "row,t_min_stat,t_min_p,t_max_stat,t_max_p,step_flagged,validation_stat,validation_p,influential\n";
    for (const auto& r : rows) {
        out << r.row << ',' << num(r.t_min, false) << ',' << num(r.t_min, true) << ',' << num(r.t_max, false) << ','
            << num(r.t_max, true) << ',' << r.step_flagged << ',' << num(r.validation, false) << ','
            << num(r.validation, true) << ',' << (r.influential ? 1 : 0) << '\n';
    }
}

inline nlohmann::ordered_json params_json(const RammParams& p, std::size_t n) {
    nlohmann::ordered_json j;
    j["m"] = p.m;
    j["subset_size"] = p.resolved_subset_size(n);
    j["omega"] = p.omega;
    j["alpha_min"] = p.alpha_min;
    j["alpha_max"] = p.alpha_max;
    j["alpha_valid"] = p.alpha_valid;
    j["taus"] = p.taus.levels();
    j["max_outer_iters"] = p.max_outer_iters;
    j["seed"] = p.seed;
    j["min_denominator"] = p.min_denominator == MinStepDenominator::subset_size ? "subset_size" : "active_count";
    return j;
}

/// Applies the keys of a JSON config object onto `params`; unknown keys are an error.
inline void apply_config(RammParams& params, const nlohmann::json& cfg) {
    if (!cfg.is_object()) {
        throw InvalidArgument("config file must hold a JSON object");
    }
    for (const auto& [key, value] : cfg.items()) {
        try {
            if (key == "m") params.m = value.get<std::size_t>();
            else if (key == "subset_size") params.subset_size = value.get<std::size_t>();
            else if (key == "omega") params.omega = value.get<double>();
            else if (key == "alpha_min") params.alpha_min = value.get<double>();
            else if (key == "alpha_max") params.alpha_max = value.get<double>();
            else if (key == "alpha_valid") params.alpha_valid = value.get<double>();
            else if (key == "taus") params.taus = ExpectileSequence(value.get<std::vector<double>>());
            else if (key == "max_outer_iters") params.max_outer_iters = value.get<std::size_t>();
            else if (key == "seed") params.seed = value.get<std::uint64_t>();
            else if (key == "threads") params.threads = value.get<std::size_t>();
            else if (key == "min_denominator") {
                auto s = value.get<std::string>();
                if (s == "subset_size") params.min_denominator = MinStepDenominator::subset_size;
                else if (s == "active_count") params.min_denominator = MinStepDenominator::active_count;
                else throw InvalidArgument("min_denominator must be subset_size or active_count");
            } else {
                throw InvalidArgument("unknown config key '" + key + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("config key '" + key + "': " + e.what());
        }
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open config '" + path + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("config '" + path + "': " + e.what());
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write '" + path + "'");
    }
    return out;
}

/// Runs `body`, translating library errors into exit codes and a message on `log`.
template <typename Body>
int guarded(std::ostream& log, Body&& body, const std::vector<std::string>& column_names = {}) {
    try {
        body();
        return ok;
    } catch (const DegenerateColumn& e) {
        std::string name = "response";
        if (e.column()) {
            name = *e.column() < column_names.size() ? "'" + column_names[*e.column()] + "'"
                                                     : "column " + std::to_string(*e.column());
        }
        log << "error: " << name << " has zero asymmetric variance";
        if (e.subset()) {
            log << " on random subset " << *e.subset();
        }
        log << " (use --drop-degenerate to drop constant columns)\n";
        return degenerate_error;
    } catch (const TooFewActive& e) {
        log << "error: " << e.what() << '\n';
        return degenerate_error;
    } catch (const NoConvergence& e) {
        log << "error: " << e.what() << '\n';
        return convergence_error;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return validation_error;
    }
}

struct DetectOptions {
    std::string input;
    std::string response = "y";
    Detector detector = Detector::asymMIP;
    RammParams params;
    std::string out = "report.csv";
    bool drop_degenerate = false;
    bool timestamp = false;
};

/// Metadata sidecar written next to a report.
inline std::string metadata_path(const std::string& report_path) { return report_path + ".meta.json"; }

inline int cmd_detect(const DetectOptions& opt, std::ostream& log) {
    std::vector<std::string> names;
    return guarded(
        log,
        [&] {
            auto named = to_data_matrix(read_csv_file(opt.input), opt.response);
            names = named.predictor_names;
            const auto eff = effective_params(opt.detector, opt.params);
            std::vector<std::string> dropped;
            if (opt.drop_degenerate) {
                auto bad = degenerate_columns(named.data, eff.taus);
                if (!bad.empty()) {
                    std::vector<std::size_t> keep;
                    std::vector<std::string> kept_names;
                    for (std::size_t j = 0, b = 0; j < named.data.cols(); ++j) {
                        if (b < bad.size() && bad[b] == j) {
                            dropped.push_back(names[j]);
                            ++b;
                        } else {
                            keep.push_back(j);
                            kept_names.push_back(names[j]);
                        }
                    }
                    if (keep.empty()) {
                        throw InvalidArgument("every predictor column is constant");
                    }
                    for (const auto& d : dropped) {
                        log << "warning: dropping constant column '" << d << "'\n";
                    }
                    named.data = named.data.select_columns(keep);
                    names = kept_names;
                }
            }
            auto result = run_detector(opt.detector, named.data, opt.params);

            auto out = open_output(opt.out);
            write_report_csv(out, build_report(result, named.data.rows()));

            nlohmann::ordered_json meta;
            meta["tool"] = "hidetify";
            meta["version"] = kVersion;
            meta["command"] = "detect";
            meta["detector"] = to_string(opt.detector);
            meta["input"] = opt.input;
            meta["response"] = named.response_name;
            meta["n"] = named.data.rows();
            meta["p"] = named.data.cols();
            meta["dropped_columns"] = dropped;
            meta["params"] = params_json(eff, named.data.rows());
            meta["iterations_used"] = result.iterations_used;
            std::vector<std::size_t> flagged_rows;
            for (std::size_t k : result.influential) {
                flagged_rows.push_back(k + 1);
            }
            meta["influential_rows"] = flagged_rows;
            if (opt.timestamp) {
                auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
                std::ostringstream ts;
                ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
                meta["timestamp"] = ts.str();
            }
            auto meta_out = open_output(metadata_path(opt.out));
            meta_out << meta.dump(2) << '\n';
        },
        names);
}

struct SimulateOptions {
    ContaminationSpec contamination;
    std::size_t n = 100;
    std::size_t p = 300;
    std::size_t replications = 10;
    std::uint64_t seed = 0;
    std::vector<Detector> detectors{Detector::asymMIP, Detector::MIP, Detector::asymHIM, Detector::HIM};
    RammParams params;
    std::size_t threads = 1;
    std::string out = "simulate.csv";
};

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
    return guarded(log, [&] {
        SimulationConfig cfg;
        cfg.contamination = opt.contamination;
        cfg.n = opt.n;
        cfg.p = opt.p;
        cfg.replications = opt.replications;
        cfg.seed = opt.seed;
        cfg.params = opt.params;
        cfg.threads = opt.threads;
        auto records = simulate_detection(cfg, opt.detectors);
        auto out = open_output(opt.out);
        write_records_csv(out, records);
    });
}

struct CompareOptions {
    ContaminationSpec contamination;
    std::size_t n = 100;
    std::size_t p = 300;
    std::size_t replications = 10;
    std::uint64_t seed = 0;
    std::vector<Method> methods{Method::raw(), Method{Detector::asymMIP}, Method{Detector::MIP},
                                Method{Detector::asymHIM}, Method{Detector::HIM}};
    RammParams params;
    std::size_t threads = 1;
    std::size_t folds = 5;
    std::size_t grid_size = 20;
    std::string out = "compare.csv";
    std::string summary_out;
};

inline int cmd_compare(const CompareOptions& opt, std::ostream& log) {
    return guarded(log, [&] {
        SimulationConfig cfg;
        cfg.contamination = opt.contamination;
        cfg.n = opt.n;
        cfg.p = opt.p;
        cfg.replications = opt.replications;
        cfg.seed = opt.seed;
        cfg.params = opt.params;
        cfg.threads = opt.threads;
        cfg.folds = opt.folds;
        cfg.grid_size = opt.grid_size;
        auto records = compare_pipelines(cfg, opt.methods);
        auto out = open_output(opt.out);
        write_records_csv(out, records);
        if (!opt.summary_out.empty()) {
            auto s = open_output(opt.summary_out);
            write_summary_csv(s, summarize(records));
        }
    });
}

struct GenerateOptions {
    ContaminationSpec contamination;
    std::size_t n = 100;
    std::size_t p = 300;
    std::uint64_t seed = 0;
    std::string out = "sample.csv";
    std::string truth_out;
};

/// Writes one simulated sample as CSV plus its ground-truth sidecar.
inline int cmd_generate(const GenerateOptions& opt, std::ostream& log) {
    return guarded(log, [&] {
        auto clean = generate_clean(opt.n, opt.p, derive_seed(opt.seed, {1}));
        ContaminationSpec spec = opt.contamination;
        spec.seed = derive_seed(opt.seed, {2});
        auto sample = contaminate(clean, spec);
        auto out = open_output(opt.out);
        write_data_csv(out, sample.data);
        auto truth = open_output(opt.truth_out.empty() ? opt.out + ".truth" : opt.truth_out);
        write_truth(truth, sample.truth);
    });
}

/// Parses a long-format table written by write_records_csv.
inline std::vector<MetricRecord> read_records_csv(std::istream& in) {
    std::vector<MetricRecord> out;
    std::string line;
    std::size_t line_no = 0;
    auto number = [&](const std::string& cell) {
        if (cell == "NA") {
            return std::nan("");
        }
        double v = 0.0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
            throw CsvError(line_no, "'" + cell + "' is not a number");
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(cell);
        }
        if (line_no == 1) {
            if (cells != std::vector<std::string>{"method", "model", "mu", "replication", "metric", "value"}) {
                throw CsvError(1, "expected header method,model,mu,replication,metric,value");
            }
            continue;
        }
        if (cells.size() != 6) {
            throw CsvError(line_no, "expected 6 fields, got " + std::to_string(cells.size()));
        }
        MetricRecord r;
        r.method = cells[0];
        r.model = cells[1];
        r.mu = number(cells[2]);
        r.replication = static_cast<std::size_t>(number(cells[3]));
        r.metric = cells[4];
        r.value = number(cells[5]);
        out.push_back(std::move(r));
    }
    if (line_no == 0) {
        throw CsvError(0, "empty results table");
    }
    return out;
}

/// Mean and quartiles per (method, metric) of a simulate/compare results table.
inline int cmd_report(const std::string& input, const std::string& out_path, std::ostream& log) {
    return guarded(log, [&] {
        std::ifstream in(input);
        if (!in) {
            throw InvalidArgument("cannot open '" + input + "'");
        }
        auto records = read_records_csv(in);
        auto out = open_output(out_path);
        write_summary_csv(out, summarize(records));
    });
}

}  // namespace hidetify::cli

#endif
