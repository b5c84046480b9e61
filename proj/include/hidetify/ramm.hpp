#ifndef HIDETIFY_RAMM_HPP
#define HIDETIFY_RAMM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chi_square.hpp"
#include "data_matrix.hpp"
#include "errors.hpp"
#include "expectile.hpp"
#include "influence.hpp"
#include "parallel.hpp"
#include "random.hpp"

/**
 * @file ramm.hpp
 *
 * @brief Random min-max multiple deletion (RaMM) detection of influential observations.
 *
 * The outer loop alternates a conservative Min step, which flags only the
 * clearest outliers (protects good points from being swamped), and an
 * aggressive Max step, which catches clustered outliers that hide each other
 * (masking). Everything flagged is then re-tested one at a time against the
 * remaining presumed-clean rows in a Validation step.
 */

namespace hidetify {

/// Bonferroni denominator for the Min step.
enum class MinStepDenominator {
    subset_size,  ///< alpha / n_k
    active_count  ///< alpha / |active|
};

struct RammParams {
    std::size_t m = 5;
    /// 0 selects floor(n / 2).
    std::size_t subset_size = 0;
    double omega = 0.2;
    double alpha_min = 0.05;
    double alpha_max = 0.001;
    double alpha_valid = 0.05;
    ExpectileSequence taus = ExpectileSequence::standard();
    std::size_t max_outer_iters = 10;
    std::uint64_t seed = 0;
    /// Worker threads for per-observation scoring; 0 uses every hardware thread.
    std::size_t threads = 1;
    MinStepDenominator min_denominator = MinStepDenominator::subset_size;

    std::size_t resolved_subset_size(std::size_t n) const { return subset_size == 0 ? n / 2 : subset_size; }

    void validate(std::size_t n) const {
        auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
        if (m < 1) {
            throw InvalidArgument("m must be at least 1");
        }
        std::size_t nk = resolved_subset_size(n);
        if (nk < 1 || nk + 2 > n) {
            throw InvalidArgument("subset size must lie in [1, n - 2], got " + std::to_string(nk));
        }
        if (!in_unit(omega)) {
            throw InvalidArgument("omega must lie in (0, 1)");
        }
        if (!in_unit(alpha_min) || !in_unit(alpha_max) || !in_unit(alpha_valid)) {
            throw InvalidArgument("significance levels must lie in (0, 1)");
        }
        if (max_outer_iters < 1) {
            throw InvalidArgument("max_outer_iters must be at least 1");
        }
    }
};

enum class StepKind { min, max, validation, single };

inline const char* to_string(StepKind s) {
    switch (s) {
        case StepKind::min:
            return "min";
        case StepKind::max:
            return "max";
        case StepKind::validation:
            return "validation";
        case StepKind::single:
            return "single";
    }
    return "?";
}

struct ObservationScore {
    std::size_t observation = 0;
    double statistic = 0.0;
    double p_value = 1.0;

    friend bool operator==(const ObservationScore&, const ObservationScore&) = default;
};

/// One step of a run: what was scored, and which observations it flagged (or confirmed).
struct StepRecord {
    StepKind step = StepKind::min;
    std::size_t iteration = 0;
    std::vector<std::size_t> flagged;
    std::vector<ObservationScore> scores;  ///< ordered by observation

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct DetectionResult {
    std::vector<std::size_t> influential;
    std::vector<std::size_t> clean;
    std::vector<StepRecord> trace;
    std::size_t iterations_used = 0;

    friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

/// The active set got too small to draw reference subsets; `trace` holds the steps completed so far.
class TooFewActive : public Error {
public:
    TooFewActive(std::size_t active, std::size_t needed, std::vector<StepRecord> trace = {})
        : Error("active set of " + std::to_string(active) + " rows is below the required " + std::to_string(needed)),
          trace_(std::move(trace)) {}

    const std::vector<StepRecord>& trace() const noexcept { return trace_; }

private:
    std::vector<StepRecord> trace_;
};

namespace detail {

inline constexpr std::uint64_t kMinStepStream = 1;
inline constexpr std::uint64_t kMaxStepStream = 2;

/// Subset statistics for every k in `active`, each against its own family drawn from `active`.
inline std::vector<SubsetScores> score_active(const DataMatrix& data, std::span<const std::size_t> active,
                                              const RammParams& params, std::size_t subset_size,
                                              std::uint64_t stream, std::size_t iteration) {
    if (active.size() < subset_size + 2) {
        throw TooFewActive(active.size(), subset_size + 2);
    }
    std::vector<SubsetScores> out(active.size());
    parallel_for(active.size(), params.threads, [&](std::size_t idx) {
        thread_local InfluenceWorkspace ws;
        std::size_t k = active[idx];
        auto family = SubsetFamily::draw(active, k, params.m, subset_size,
                                         derive_seed(params.seed, {stream, iteration, k}));
        out[idx] = subset_scores(data, family, params.taus, ws);
    });
    return out;
}

inline std::vector<std::size_t> remove_indices(std::span<const std::size_t> from, std::span<const std::size_t> drop) {
    std::vector<std::size_t> sorted_drop(drop.begin(), drop.end());
    std::sort(sorted_drop.begin(), sorted_drop.end());
    std::vector<std::size_t> out;
    out.reserve(from.size());
    for (std::size_t i : from) {
        if (!std::binary_search(sorted_drop.begin(), sorted_drop.end(), i)) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace detail

/**
 * Min step: scores asymT_min for every active observation and flags those
 * with p < alpha_min / n_k, keeping at most floor(omega n) of them (smallest
 * p-values first, ties to the smaller index). `subset_size` overrides the
 * size resolved from params when nonzero.
 */
inline StepRecord min_step(const DataMatrix& data, std::span<const std::size_t> active, const RammParams& params,
                           std::size_t iteration, std::size_t subset_size = 0) {
    const std::size_t n = data.rows();
    const std::size_t nk = subset_size ? subset_size : params.resolved_subset_size(n);
    auto scores = detail::score_active(data, active, params, nk, detail::kMinStepStream, iteration);

    StepRecord record;
    record.step = StepKind::min;
    record.iteration = iteration;
    record.scores.reserve(active.size());
    for (const auto& s : scores) {
        record.scores.push_back({s.t_min.observation, s.t_min.statistic, s.t_min.p_value});
    }

    const double denominator = params.min_denominator == MinStepDenominator::subset_size
                                   ? static_cast<double>(nk)
                                   : static_cast<double>(active.size());
    const double threshold = params.alpha_min / denominator;
    std::vector<ObservationScore> candidates;
    for (const auto& s : record.scores) {
        if (s.p_value < threshold) {
            candidates.push_back(s);
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const ObservationScore& a, const ObservationScore& b) {
        return a.p_value != b.p_value ? a.p_value < b.p_value : a.observation < b.observation;
    });
    const auto cap = static_cast<std::size_t>(std::floor(params.omega * static_cast<double>(n)));
    if (candidates.size() > cap) {
        candidates.resize(cap);
    }
    for (const auto& c : candidates) {
        record.flagged.push_back(c.observation);
    }
    std::sort(record.flagged.begin(), record.flagged.end());
    return record;
}

/// Max step: scores asymT_max for every active observation and flags p < alpha_max / |active|.
inline StepRecord max_step(const DataMatrix& data, std::span<const std::size_t> active, const RammParams& params,
                           std::size_t iteration, std::size_t subset_size = 0) {
    const std::size_t nk = subset_size ? subset_size : params.resolved_subset_size(data.rows());
    auto scores = detail::score_active(data, active, params, nk, detail::kMaxStepStream, iteration);

    StepRecord record;
    record.step = StepKind::max;
    record.iteration = iteration;
    const double threshold = params.alpha_max / static_cast<double>(active.size());
    for (const auto& s : scores) {
        record.scores.push_back({s.t_max.observation, s.t_max.statistic, s.t_max.p_value});
        if (s.t_max.p_value < threshold) {
            record.flagged.push_back(s.t_max.observation);
        }
    }
    return record;
}

/**
 * Validation step: each candidate k is tested alone against `clean`, with
 * statistic |clean + k|^2 asymD_k and a chi^2(q) tail at alpha_valid / |candidates|.
 * `flagged` of the returned record lists the confirmed candidates.
 */
inline StepRecord validation_step(const DataMatrix& data, std::span<const std::size_t> clean,
                                  std::span<const std::size_t> candidates, const RammParams& params,
                                  std::size_t iteration = 0) {
    StepRecord record;
    record.step = StepKind::validation;
    record.iteration = iteration;
    if (candidates.empty()) {
        return record;
    }
    if (clean.size() < 4) {
        throw TooFewActive(clean.size(), 4);
    }
    std::vector<std::size_t> sorted_clean(clean.begin(), clean.end());
    std::sort(sorted_clean.begin(), sorted_clean.end());
    for (std::size_t k : candidates) {
        if (k >= data.rows()) {
            throw InvalidArgument("candidate index out of range");
        }
        if (std::binary_search(sorted_clean.begin(), sorted_clean.end(), k)) {
            throw InvalidArgument("candidate " + std::to_string(k) + " is also in the clean set");
        }
    }
    std::vector<std::size_t> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end());

    const double augmented = static_cast<double>(clean.size() + 1);
    const double df = static_cast<double>(params.taus.size());
    record.scores.resize(order.size());
    parallel_for(order.size(), params.threads, [&](std::size_t idx) {
        thread_local InfluenceWorkspace ws;
        std::size_t k = order[idx];
        double stat = augmented * augmented * asym_him_against(data, clean, k, params.taus, ws);
        record.scores[idx] = {k, stat, chi_square_upper_tail(stat, df)};
    });
    const double threshold = params.alpha_valid / static_cast<double>(order.size());
    for (const auto& s : record.scores) {
        if (s.p_value < threshold) {
            record.flagged.push_back(s.observation);
        }
    }
    return record;
}

/**
 * Full RaMM run. The outer loop performs at least one Min/Max pair and keeps
 * going while the presumed-clean set has shrunk to at most n/2 and the last
 * pair flagged something, up to max_outer_iters pairs. The subset size is
 * clamped to |active| - 2 as the active set shrinks.
 */
inline DetectionResult detect(const DataMatrix& data, const RammParams& params) {
    const std::size_t n = data.rows();
    params.validate(n);
    const std::size_t base_nk = params.resolved_subset_size(n);

    DetectionResult result;
    std::vector<std::size_t> active = all_rows(n);
    std::vector<std::size_t> pool;

    auto clamp_nk = [&](std::size_t active_size) -> std::size_t {
        if (active_size < 4) {
            throw TooFewActive(active_size, 4, result.trace);
        }
        return std::min(base_nk, active_size - 2);
    };

    for (std::size_t iter = 1; iter <= params.max_outer_iters; ++iter) {
        auto min_rec = min_step(data, active, params, iter, clamp_nk(active.size()));
        active = detail::remove_indices(active, min_rec.flagged);
        pool.insert(pool.end(), min_rec.flagged.begin(), min_rec.flagged.end());
        std::size_t new_flags = min_rec.flagged.size();
        result.trace.push_back(std::move(min_rec));

        auto max_rec = max_step(data, active, params, iter, clamp_nk(active.size()));
        active = detail::remove_indices(active, max_rec.flagged);
        pool.insert(pool.end(), max_rec.flagged.begin(), max_rec.flagged.end());
        new_flags += max_rec.flagged.size();
        result.trace.push_back(std::move(max_rec));

        result.iterations_used = iter;
        if (new_flags == 0 || active.size() > n / 2) {
            break;
        }
    }

    std::sort(pool.begin(), pool.end());
    if (!pool.empty() && active.size() < 4) {
        throw TooFewActive(active.size(), 4, result.trace);
    }
    auto validation = validation_step(data, active, pool, params, result.iterations_used);
    result.influential = validation.flagged;
    result.trace.push_back(std::move(validation));
    result.clean = detail::remove_indices(all_rows(n), result.influential);
    return result;
}

/**
 * Single-detection (leave-one-out) screening: every observation is scored by
 * n^2 asymD_k on the full sample, with a chi^2(q) tail at alpha / n.
 */
inline DetectionResult detect_single(const DataMatrix& data, const ExpectileSequence& taus, double alpha,
                                     std::size_t threads = 1) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0, 1)");
    }
    const std::size_t n = data.rows();
    const double scale = static_cast<double>(n) * static_cast<double>(n);
    const double df = static_cast<double>(taus.size());

    StepRecord record;
    record.step = StepKind::single;
    record.iteration = 1;
    record.scores.resize(n);
    parallel_for(n, threads, [&](std::size_t k) {
        thread_local InfluenceWorkspace ws;
        auto rows = all_rows_except(n, k);
        double stat = scale * asym_him_against(data, rows, k, taus, ws);
        record.scores[k] = {k, stat, chi_square_upper_tail(stat, df)};
    });
    const double threshold = alpha / static_cast<double>(n);
    for (const auto& s : record.scores) {
        if (s.p_value < threshold) {
            record.flagged.push_back(s.observation);
        }
    }
    DetectionResult result;
    result.influential = record.flagged;
    result.clean = detail::remove_indices(all_rows(n), result.influential);
    result.trace.push_back(std::move(record));
    result.iterations_used = 1;
    return result;
}

}  // namespace hidetify

#endif
