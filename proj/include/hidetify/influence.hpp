#ifndef HIDETIFY_INFLUENCE_HPP
#define HIDETIFY_INFLUENCE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "chi_square.hpp"
#include "data_matrix.hpp"
#include "errors.hpp"
#include "expectile.hpp"
#include "random.hpp"

/**
 * @file influence.hpp
 *
 * @brief Leave-one-out and random-subset asymmetric influence statistics.
 *
 * Every statistic here compares two marginal correlation vectors (one entry
 * per predictor): one computed on a reference row set and one on the same rows
 * plus the observation under test. All expectiles, asymmetric standard
 * deviations and correlations are re-estimated from scratch on each row set.
 */

namespace hidetify {

/**
 * @brief The m random reference subsets used to test one observation.
 *
 * Each subset holds `subset_size` distinct row indices, never the target. The
 * m subsets are drawn independently of each other, so two of them may
 * coincide. Indices inside a subset are sorted.
 */
struct SubsetFamily {
    std::size_t target = 0;
    std::vector<std::vector<std::size_t>> subsets;
    std::size_t subset_size = 0;
    std::uint64_t seed = 0;

    std::size_t augmented_size() const noexcept { return subset_size + 1; }
    std::size_t count() const noexcept { return subsets.size(); }

    /**
     * Draws `m` subsets of size `subset_size` from `pool` minus `target`. The
     * family depends only on (pool, target, m, subset_size, seed).
     */
    static SubsetFamily draw(std::span<const std::size_t> pool, std::size_t target, std::size_t m,
                             std::size_t subset_size, std::uint64_t seed) {
        if (m < 1) {
            throw InvalidArgument("subset family needs m >= 1");
        }
        std::vector<std::size_t> candidates;
        candidates.reserve(pool.size());
        for (std::size_t i : pool) {
            if (i != target) {
                candidates.push_back(i);
            }
        }
        if (subset_size < 1 || subset_size > candidates.size()) {
            throw InvalidArgument("subset size " + std::to_string(subset_size) + " does not fit a pool of " +
                                  std::to_string(candidates.size()));
        }
        SubsetFamily family;
        family.target = target;
        family.subset_size = subset_size;
        family.seed = seed;
        family.subsets.reserve(m);
        auto rng = make_rng(seed, {target, m, subset_size, pool.size()});
        for (std::size_t r = 0; r < m; ++r) {
            std::vector<std::size_t> work = candidates;
            for (std::size_t i = 0; i < subset_size; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, work.size() - 1);
                std::swap(work[i], work[pick(rng)]);
            }
            work.resize(subset_size);
            std::sort(work.begin(), work.end());
            family.subsets.push_back(std::move(work));
        }
        return family;
    }

    /// Throws InvalidArgument unless the family is usable against an n-row matrix.
    void validate(std::size_t n) const {
        if (target >= n) {
            throw InvalidArgument("subset family target out of range");
        }
        if (subsets.empty()) {
            throw InvalidArgument("subset family is empty");
        }
        std::vector<char> seen(n);
        for (const auto& s : subsets) {
            if (s.size() != subset_size) {
                throw InvalidArgument("subset has the wrong size");
            }
            std::fill(seen.begin(), seen.end(), 0);
            for (std::size_t i : s) {
                if (i >= n || i == target || seen[i]) {
                    throw InvalidArgument("subset holds an invalid, repeated or target index");
                }
                seen[i] = 1;
            }
        }
    }
};

enum class ScoreKind { single_asym_him, subset_min, subset_max };

struct InfluenceScore {
    std::size_t observation = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    ScoreKind kind = ScoreKind::single_asym_him;
};

/// Scratch buffers reused across calls on one thread.
struct InfluenceWorkspace {
    std::vector<double> y;
    std::vector<double> x;
    std::vector<AsymmetricMoments> y_without;
    std::vector<AsymmetricMoments> y_with;
};

namespace detail {

/**
 * D_{tau_l} = p^{-1} sum_j (rho_{tau_l j}(rows + k) - rho_{tau_l j}(rows))^2 for
 * every level; `rows` must not contain `k`. The row set with k appended is
 * evaluated in the order rows..., k.
 */
inline std::vector<double> influence_by_level(const DataMatrix& data, std::span<const std::size_t> rows,
                                              std::size_t k, const ExpectileSequence& taus,
                                              InfluenceWorkspace& ws, std::optional<std::size_t> subset = {}) {
    const std::size_t base = rows.size();
    const std::size_t q = taus.size();
    ws.y.resize(base + 1);
    ws.x.resize(base + 1);
    for (std::size_t i = 0; i < base; ++i) {
        ws.y[i] = data.y(rows[i]);
    }
    ws.y[base] = data.y(k);

    std::span<const double> y_without(ws.y.data(), base);
    std::span<const double> y_with(ws.y.data(), base + 1);
    ws.y_without.resize(q);
    ws.y_with.resize(q);
    for (std::size_t l = 0; l < q; ++l) {
        ws.y_without[l] = moments_unchecked(y_without, taus[l]);
        ws.y_with[l] = moments_unchecked(y_with, taus[l]);
        if (is_degenerate(y_without, ws.y_without[l].sigma_tau) || is_degenerate(y_with, ws.y_with[l].sigma_tau)) {
            throw DegenerateColumn(std::nullopt, subset);
        }
    }

    std::vector<double> sums(q, 0.0);
    std::span<const double> x_without(ws.x.data(), base);
    std::span<const double> x_with(ws.x.data(), base + 1);
    for (std::size_t j = 0; j < data.cols(); ++j) {
        auto col = data.column(j);
        for (std::size_t i = 0; i < base; ++i) {
            ws.x[i] = col[rows[i]];
        }
        ws.x[base] = col[k];
        for (std::size_t l = 0; l < q; ++l) {
            double r0 = correlation_with(x_without, y_without, taus[l], ws.y_without[l], j, subset);
            double r1 = correlation_with(x_with, y_with, taus[l], ws.y_with[l], j, subset);
            double d = r1 - r0;
            sums[l] += d * d;
        }
    }
    for (double& s : sums) {
        s /= static_cast<double>(data.cols());
    }
    return sums;
}

inline void check_observation(const DataMatrix& data, std::size_t k) {
    if (k >= data.rows()) {
        throw InvalidArgument("observation index " + std::to_string(k) + " out of range");
    }
}

}  // namespace detail

/**
 * Leave-one-out influence D_{tau k} of observation `k` (0-based): the mean
 * squared change of the p marginal asymmetric correlations when row k is
 * dropped.
 */
inline double loo_influence(const DataMatrix& data, std::size_t k, double tau) {
    detail::check_observation(data, k);
    InfluenceWorkspace ws;
    auto rows = all_rows_except(data.rows(), k);
    return detail::influence_by_level(data, rows, k, ExpectileSequence({tau}), ws)[0];
}

/// asymD_k: sum of the leave-one-out influences over all levels.
inline double asym_him(const DataMatrix& data, std::size_t k, const ExpectileSequence& taus) {
    detail::check_observation(data, k);
    InfluenceWorkspace ws;
    auto rows = all_rows_except(data.rows(), k);
    auto by_level = detail::influence_by_level(data, rows, k, taus, ws);
    double total = 0.0;
    for (double d : by_level) {
        total += d;
    }
    return total;
}

/**
 * asymD_k of `k` measured against the reference rows `clean` (which must not
 * contain k), i.e. comparing correlations on clean + {k} with those on clean.
 */
inline double asym_him_against(const DataMatrix& data, std::span<const std::size_t> clean, std::size_t k,
                               const ExpectileSequence& taus, InfluenceWorkspace& ws) {
    auto by_level = detail::influence_by_level(data, clean, k, taus, ws);
    double total = 0.0;
    for (double d : by_level) {
        total += d;
    }
    return total;
}

/// D_{tau r k} for every subset r of the family.
inline std::vector<double> subset_influence(const DataMatrix& data, const SubsetFamily& family, double tau) {
    family.validate(data.rows());
    InfluenceWorkspace ws;
    ExpectileSequence level({tau});
    std::vector<double> out;
    out.reserve(family.count());
    for (std::size_t r = 0; r < family.count(); ++r) {
        out.push_back(detail::influence_by_level(data, family.subsets[r], family.target, level, ws, r)[0]);
    }
    return out;
}

/// Both subset statistics for one observation, sharing the m x q influence grid.
struct SubsetScores {
    InfluenceScore t_min;
    InfluenceScore t_max;
};

/**
 * asymT_min = min_{r,l} n_sub^2 D_{tau_l r k} with a chi^2(1) tail, and
 * asymT_max = max_r n_sub^2 sum_l D_{tau_l r k} with a chi^2(q) tail.
 */
inline SubsetScores subset_scores(const DataMatrix& data, const SubsetFamily& family,
                                  const ExpectileSequence& taus, InfluenceWorkspace& ws) {
    const double scale = static_cast<double>(family.augmented_size()) * static_cast<double>(family.augmented_size());
    double lowest = std::numeric_limits<double>::infinity();
    double highest = 0.0;
    for (std::size_t r = 0; r < family.count(); ++r) {
        auto by_level = detail::influence_by_level(data, family.subsets[r], family.target, taus, ws, r);
        double sum = 0.0;
        for (double d : by_level) {
            lowest = std::min(lowest, d);
            sum += d;
        }
        highest = std::max(highest, sum);
    }
    SubsetScores s;
    s.t_min = {family.target, scale * lowest, chi_square_upper_tail(scale * lowest, 1.0), ScoreKind::subset_min};
    s.t_max = {family.target, scale * highest, chi_square_upper_tail(scale * highest, static_cast<double>(taus.size())),
               ScoreKind::subset_max};
    return s;
}

inline InfluenceScore asym_t_min(const DataMatrix& data, const SubsetFamily& family, const ExpectileSequence& taus) {
    family.validate(data.rows());
    InfluenceWorkspace ws;
    return subset_scores(data, family, taus, ws).t_min;
}

inline InfluenceScore asym_t_max(const DataMatrix& data, const SubsetFamily& family, const ExpectileSequence& taus) {
    family.validate(data.rows());
    InfluenceWorkspace ws;
    return subset_scores(data, family, taus, ws).t_max;
}

}  // namespace hidetify

#endif
