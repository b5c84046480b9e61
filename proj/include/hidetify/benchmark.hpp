#ifndef HIDETIFY_BENCHMARK_HPP
#define HIDETIFY_BENCHMARK_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "data_matrix.hpp"
#include "detectors.hpp"
#include "errors.hpp"
#include "lasso.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "ramm.hpp"
#include "simgen.hpp"

/**
 * @file benchmark.hpp
 *
 * @brief Monte Carlo harness: detection power/error on simulated data, and the
 * effect of cleaning on a downstream lasso fit.
 *
 * Replication r derives all of its randomness from (seed, r), so a run is
 * reproducible regardless of how many worker threads execute it.
 */

namespace hidetify {

/// A detector, or the raw-data baseline (no rows removed) when empty.
struct Method {
    std::optional<Detector> detector;

    static Method raw() { return {}; }
    std::string name() const { return detector ? to_string(*detector) : "RawData"; }

    static std::optional<Method> parse(std::string_view s) {
        if (s == "RawData") {
            return Method::raw();
        }
        if (auto d = parse_detector(s)) {
            return Method{*d};
        }
        return std::nullopt;
    }
};

/// One long-format result row: (method, model, mu, replication, metric, value).
struct MetricRecord {
    std::string method;
    std::string model;
    double mu = 0.0;
    std::size_t replication = 0;
    std::string metric;
    double value = 0.0;
};

struct MetricSummary {
    std::string method;
    std::string metric;
    std::size_t count = 0;
    double mean = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
};

struct SimulationConfig {
    ContaminationSpec contamination;
    std::size_t n = 100;
    std::size_t p = 300;
    std::size_t replications = 10;
    std::uint64_t seed = 0;
    /// Detector settings; the seed field is replaced per replication.
    RammParams params;
    /// Replications run concurrently; each replication is single-threaded.
    std::size_t threads = 1;
    std::size_t folds = 5;
    std::size_t grid_size = 20;
    double grid_ratio = 0.01;
    /// Called with every lasso fit (CV and final) in compare_pipelines; must be thread-safe when threads > 1.
    FitObserver on_fit;
};

namespace detail {

inline constexpr std::uint64_t kDataSeed = 1;
inline constexpr std::uint64_t kContaminationSeed = 2;
inline constexpr std::uint64_t kDetectorSeed = 3;
inline constexpr std::uint64_t kCvSeed = 4;

inline ContaminatedSample replicate_sample(const SimulationConfig& cfg, std::size_t rep) {
    auto clean = generate_clean(cfg.n, cfg.p, derive_seed(cfg.seed, {rep, kDataSeed}));
    ContaminationSpec spec = cfg.contamination;
    spec.seed = derive_seed(cfg.seed, {rep, kContaminationSeed});
    return contaminate(clean, spec);
}

inline RammParams replicate_params(const SimulationConfig& cfg, std::size_t rep) {
    RammParams params = cfg.params;
    params.seed = derive_seed(cfg.seed, {rep, kDetectorSeed});
    params.threads = 1;
    return params;
}

/// Linear-interpolation quantile of sorted values.
inline double quantile_sorted(const std::vector<double>& v, double prob) {
    if (v.empty()) {
        return std::nan("");
    }
    double pos = prob * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace detail

/// Mean and quartiles per (method, metric), in first-appearance order of the records.
inline std::vector<MetricSummary> summarize(const std::vector<MetricRecord>& records) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<double>> values;
    for (const auto& r : records) {
        auto key = std::make_pair(r.method, r.metric);
        auto [it, inserted] = values.try_emplace(key);
        if (inserted) {
            keys.push_back(key);
        }
        it->second.push_back(r.value);
    }
    std::vector<MetricSummary> out;
    for (const auto& key : keys) {
        auto v = values[key];
        std::sort(v.begin(), v.end());
        MetricSummary s;
        s.method = key.first;
        s.metric = key.second;
        s.count = v.size();
        double total = 0.0;
        for (double x : v) {
            total += x;
        }
        s.mean = total / static_cast<double>(v.size());
        s.q25 = detail::quantile_sorted(v, 0.25);
        s.median = detail::quantile_sorted(v, 0.5);
        s.q75 = detail::quantile_sorted(v, 0.75);
        out.push_back(s);
    }
    return out;
}

/// Mean of `metric` for `method`; NaN when there are no such records.
inline double mean_metric(const std::vector<MetricRecord>& records, std::string_view method, std::string_view metric) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
        if (r.method == method && r.metric == metric) {
            total += r.value;
            ++count;
        }
    }
    return count ? total / static_cast<double>(count) : std::nan("");
}

/**
 * Detection power study: per replication, simulate a contaminated sample and
 * record tpr_inf, fpr_inf and n_flagged for each detector.
 */
inline std::vector<MetricRecord> simulate_detection(const SimulationConfig& cfg, const std::vector<Detector>& detectors) {
    if (cfg.replications < 1) {
        throw InvalidArgument("replications must be at least 1");
    }
    cfg.contamination.validate();
    std::vector<std::vector<MetricRecord>> per_rep(cfg.replications);
    const std::string model = to_string(cfg.contamination.model);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
        auto sample = detail::replicate_sample(cfg, rep);
        auto params = detail::replicate_params(cfg, rep);
        for (auto d : detectors) {
            auto result = run_detector(d, sample.data, params);
            auto add = [&](const char* metric, double value) {
                per_rep[rep].push_back({to_string(d), model, cfg.contamination.mu, rep, metric, value});
            };
            if (!sample.truth.empty()) {
                auto m = detection_metrics(sample.truth, result.influential, cfg.n);
                add("tpr_inf", m.tpr_inf);
                add("fpr_inf", m.fpr_inf);
            } else {
                add("fpr_inf", static_cast<double>(result.influential.size()) / static_cast<double>(cfg.n));
            }
            add("n_flagged", static_cast<double>(result.influential.size()));
        }
    });
    std::vector<MetricRecord> out;
    for (auto& v : per_rep) {
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

/**
 * Downstream comparison: per replication, clean the simulated sample with each
 * method, choose lambda by k-fold CV on what is left, refit, and record the
 * coefficient metrics (err, tpr, fpr), the lasso KKT violation, and for
 * detectors the detection metrics.
 */
inline std::vector<MetricRecord> compare_pipelines(const SimulationConfig& cfg, const std::vector<Method>& methods) {
    if (cfg.replications < 1) {
        throw InvalidArgument("replications must be at least 1");
    }
    if (methods.empty()) {
        throw InvalidArgument("no methods to compare");
    }
    cfg.contamination.validate();
    std::vector<std::vector<MetricRecord>> per_rep(cfg.replications);
    const std::string model = to_string(cfg.contamination.model);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
        auto sample = detail::replicate_sample(cfg, rep);
        auto params = detail::replicate_params(cfg, rep);
        const auto cv_seed = derive_seed(cfg.seed, {rep, detail::kCvSeed});
        for (const auto& method : methods) {
            auto add = [&](const char* metric, double value) {
                per_rep[rep].push_back({method.name(), model, cfg.contamination.mu, rep, metric, value});
            };
            std::vector<std::size_t> kept = all_rows(cfg.n);
            if (method.detector) {
                auto result = run_detector(*method.detector, sample.data, params);
                kept = result.clean;
                if (!sample.truth.empty()) {
                    auto dm = detection_metrics(sample.truth, result.influential, cfg.n);
                    add("tpr_inf", dm.tpr_inf);
                    add("fpr_inf", dm.fpr_inf);
                }
                add("n_removed", static_cast<double>(result.influential.size()));
            }
            DataMatrix train = sample.data.select_rows(kept);
            auto grid = lambda_grid(train, cfg.grid_size, cfg.grid_ratio);
            double lambda = select_lambda_cv(train, cfg.folds, grid, cv_seed, cfg.on_fit);
            auto fit = fit_lasso(train, lambda);
            if (cfg.on_fit) {
                cfg.on_fit(train, fit);
            }
            auto cm = coefficient_metrics(fit, sample.beta);
            add("err", cm.err);
            add("tpr", cm.tpr);
            add("fpr", cm.fpr);
            add("lambda", lambda);
            add("kkt_violation", kkt_violation(train, fit));
        }
    });
    std::vector<MetricRecord> out;
    for (auto& v : per_rep) {
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

/// Shortest round-trip decimal form of `v`; locale independent.
inline std::string format_number(double v) {
    if (std::isnan(v)) {
        return "NA";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
    out << "method,model,mu,replication,metric,value\n";
    for (const auto& r : records) {
        out << r.method << ',' << r.model << ',' << format_number(r.mu) << ',' << r.replication << ',' << r.metric
            << ',' << format_number(r.value) << '\n';
    }
}

inline void write_summary_csv(std::ostream& out, const std::vector<MetricSummary>& rows) {
    out << "method,metric,count,mean,q25,median,q75\n";
    for (const auto& s : rows) {
        out << s.method << ',' << s.metric << ',' << s.count << ',' << format_number(s.mean) << ','
            << format_number(s.q25) << ',' << format_number(s.median) << ',' << format_number(s.q75) << '\n';
    }
}

}  // namespace hidetify

#endif
