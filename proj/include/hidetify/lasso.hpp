#ifndef HIDETIFY_LASSO_HPP
#define HIDETIFY_LASSO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "data_matrix.hpp"
#include "errors.hpp"
#include "random.hpp"

/**
 * @file lasso.hpp
 *
 * @brief Lasso by cyclic coordinate descent, k-fold CV for the penalty, and
 * coefficient-recovery metrics.
 *
 * Columns are standardized internally (zero mean, unit 1/n variance) and the
 * response is centered, so the problem solved is
 * (1/(2n)) ||y - b0 - X b||^2 + lambda ||b||_1 in standardized units.
 * Coefficients are reported back on the original scale.
 */

namespace hidetify {

struct LassoFit {
    std::vector<double> coefficients;  ///< original scale, length p
    double intercept = 0.0;
    double lambda = 0.0;
    std::size_t iterations = 0;  ///< coordinate-descent sweeps
};

struct LassoOptions {
    std::size_t max_sweeps = 100000;
    double tolerance = 1e-8;  ///< on the largest standardized coefficient change in a sweep
    /// Called after every sweep with the current penalized objective.
    std::function<void(double)> on_sweep;
};

/// Receives every fit made during cross-validation, with the rows it was trained on.
using FitObserver = std::function<void(const DataMatrix& train, const LassoFit& fit)>;

namespace detail {

/// Standardized copy of a data matrix; constant columns get scale 0 and stay out of the model.
struct Standardized {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> x;  ///< column-major, standardized
    std::vector<double> y;  ///< centered
    std::vector<double> means;
    std::vector<double> scales;
    double y_mean = 0.0;

    explicit Standardized(const DataMatrix& data)
        : n(data.rows()), p(data.cols()), x(n * p), y(n), means(p), scales(p) {
        const double nd = static_cast<double>(n);
        for (std::size_t j = 0; j < p; ++j) {
            auto c = data.column(j);
            double m = std::accumulate(c.begin(), c.end(), 0.0) / nd;
            double ss = 0.0;
            for (double v : c) {
                ss += (v - m) * (v - m);
            }
            double s = std::sqrt(ss / nd);
            double scale = 0.0;
            for (double v : c) {
                scale = std::max(scale, std::abs(v));
            }
            means[j] = m;
            scales[j] = s > 1e-12 * scale ? s : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[j * n + i] = scales[j] > 0.0 ? (c[i] - m) / scales[j] : 0.0;
            }
        }
        auto r = data.response();
        y_mean = std::accumulate(r.begin(), r.end(), 0.0) / nd;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = r[i] - y_mean;
        }
    }

    std::span<const double> column(std::size_t j) const { return {x.data() + j * n, n}; }
};

inline double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

inline double penalized_objective(const Standardized& s, std::span<const double> resid, std::span<const double> b,
                                  double lambda) {
    double rss = 0.0;
    for (double r : resid) {
        rss += r * r;
    }
    double l1 = 0.0;
    for (double v : b) {
        l1 += std::abs(v);
    }
    return rss / (2.0 * static_cast<double>(s.n)) + lambda * l1;
}

/// Coordinate descent in standardized units; `b` is the warm start and the result.
inline std::size_t coordinate_descent(const Standardized& s, double lambda, std::vector<double>& b,
                                      const LassoOptions& options) {
    const double nd = static_cast<double>(s.n);
    std::vector<double> resid = s.y;
    for (std::size_t j = 0; j < s.p; ++j) {
        if (b[j] != 0.0) {
            auto c = s.column(j);
            for (std::size_t i = 0; i < s.n; ++i) {
                resid[i] -= c[i] * b[j];
            }
        }
    }
    for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < s.p; ++j) {
            if (s.scales[j] == 0.0) {
                continue;
            }
            auto c = s.column(j);
            double dot = 0.0;
            for (std::size_t i = 0; i < s.n; ++i) {
                dot += c[i] * resid[i];
            }
            double next = soft_threshold(dot / nd + b[j], lambda);
            double delta = next - b[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < s.n; ++i) {
                    resid[i] -= c[i] * delta;
                }
                b[j] = next;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (options.on_sweep) {
            options.on_sweep(penalized_objective(s, resid, b, lambda));
        }
        if (max_change <= options.tolerance) {
            return sweep;
        }
    }
    throw NoConvergence("lasso coordinate descent did not converge in " + std::to_string(options.max_sweeps) +
                        " sweeps");
}

inline LassoFit to_original_scale(const Standardized& s, std::span<const double> b, double lambda,
                                  std::size_t sweeps) {
    LassoFit fit;
    fit.coefficients.assign(s.p, 0.0);
    fit.intercept = s.y_mean;
    for (std::size_t j = 0; j < s.p; ++j) {
        if (s.scales[j] > 0.0 && b[j] != 0.0) {
            fit.coefficients[j] = b[j] / s.scales[j];
            fit.intercept -= fit.coefficients[j] * s.means[j];
        }
    }
    fit.lambda = lambda;
    fit.iterations = sweeps;
    return fit;
}

}  // namespace detail

/// Smallest penalty that zeroes every slope: max_j |(1/n) x_j'(y - ybar)| on standardized columns.
inline double lambda_max(const DataMatrix& data) {
    detail::Standardized s(data);
    double best = 0.0;
    for (std::size_t j = 0; j < s.p; ++j) {
        auto c = s.column(j);
        double dot = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            dot += c[i] * s.y[i];
        }
        best = std::max(best, std::abs(dot) / static_cast<double>(s.n));
    }
    return best;
}

/// `count` penalties log-spaced from lambda_max down to ratio * lambda_max, descending.
inline std::vector<double> lambda_grid(const DataMatrix& data, std::size_t count = 20, double ratio = 0.01) {
    if (count < 1 || !(ratio > 0.0 && ratio < 1.0)) {
        throw InvalidArgument("lambda grid needs count >= 1 and ratio in (0, 1)");
    }
    const double top = lambda_max(data);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = top * std::pow(ratio, t);
    }
    return grid;
}

inline LassoFit fit_lasso(const DataMatrix& data, double lambda, const LassoOptions& options = {}) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("lambda must be a finite value >= 0");
    }
    detail::Standardized s(data);
    std::vector<double> b(s.p, 0.0);
    std::size_t sweeps = detail::coordinate_descent(s, lambda, b, options);
    return detail::to_original_scale(s, b, lambda, sweeps);
}

/// Fits along `lambdas` in the given order, warm-starting each fit from the previous one.
inline std::vector<LassoFit> fit_lasso_path(const DataMatrix& data, std::span<const double> lambdas,
                                            const LassoOptions& options = {}) {
    detail::Standardized s(data);
    std::vector<double> b(s.p, 0.0);
    std::vector<LassoFit> fits;
    fits.reserve(lambdas.size());
    for (double lambda : lambdas) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw InvalidArgument("lambda must be a finite value >= 0");
        }
        std::size_t sweeps = detail::coordinate_descent(s, lambda, b, options);
        fits.push_back(detail::to_original_scale(s, b, lambda, sweeps));
    }
    return fits;
}

/**
 * Largest violation of the lasso stationarity conditions, in standardized
 * units: |g_j| - lambda for zero slopes and |g_j - lambda sign(b_j)| for
 * nonzero ones, where g_j = (1/n) x_j' r. Non-positive means certified.
 */
inline double kkt_violation(const DataMatrix& data, const LassoFit& fit) {
    detail::Standardized s(data);
    std::vector<double> resid(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        double pred = fit.intercept;
        for (std::size_t j = 0; j < s.p; ++j) {
            pred += fit.coefficients[j] * data.x(i, j);
        }
        resid[i] = data.y(i) - pred;
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s.p; ++j) {
        if (s.scales[j] == 0.0) {
            continue;
        }
        auto c = s.column(j);
        double dot = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            dot += c[i] * resid[i];
        }
        double g = dot / static_cast<double>(s.n);
        double b = fit.coefficients[j] * s.scales[j];
        double v = b == 0.0 ? std::abs(g) - fit.lambda : std::abs(g - fit.lambda * (b > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

inline double predict(const LassoFit& fit, const DataMatrix& data, std::size_t row) {
    double v = fit.intercept;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        v += fit.coefficients[j] * data.x(row, j);
    }
    return v;
}

/// Mean held-out squared error for each grid entry (same order as `grid`).
inline std::vector<double> cv_errors(const DataMatrix& data, std::size_t folds, std::span<const double> grid,
                                     std::uint64_t seed, const FitObserver& observer = {}) {
    if (folds < 2 || folds > data.rows()) {
        throw InvalidArgument("cross-validation needs 2 <= folds <= n");
    }
    if (grid.empty()) {
        throw InvalidArgument("lambda grid is empty");
    }
    const std::size_t n = data.rows();
    std::vector<std::size_t> perm = all_rows(n);
    auto rng = make_rng(seed, {0xcf});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold_of[perm[i]] = i % folds;
    }

    // Path runs from the largest penalty down so warm starts stay cheap.
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
    std::vector<double> path(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        path[i] = grid[order[i]];
    }

    std::vector<double> sse(grid.size(), 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < n; ++i) {
            (fold_of[i] == f ? test : train).push_back(i);
        }
        DataMatrix train_data = data.select_rows(train);
        auto fits = fit_lasso_path(train_data, path);
        if (observer) {
            for (const auto& fit : fits) {
                observer(train_data, fit);
            }
        }
        for (std::size_t g = 0; g < fits.size(); ++g) {
            double e = 0.0;
            for (std::size_t i : test) {
                double r = data.y(i) - predict(fits[g], data, i);
                e += r * r;
            }
            sse[order[g]] += e;
        }
    }
    for (double& v : sse) {
        v /= static_cast<double>(n);
    }
    return sse;
}

/// Grid entry with the smallest k-fold CV error; exact ties go to the larger penalty.
inline double select_lambda_cv(const DataMatrix& data, std::size_t folds, std::span<const double> grid,
                               std::uint64_t seed, const FitObserver& observer = {}) {
    if (grid.size() == 1) {
        if (!(grid[0] >= 0.0)) {
            throw InvalidArgument("lambda must be >= 0");
        }
        return grid[0];
    }
    auto errors = cv_errors(data, folds, grid, seed, observer);
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (errors[g] < errors[best] || (errors[g] == errors[best] && grid[g] > grid[best])) {
            best = g;
        }
    }
    return grid[best];
}

struct CoefficientMetrics {
    double err = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

/**
 * ERR = sqrt(||b_hat - b||_2), the square root of the l2 norm itself (not of
 * its square). Supports are exact nonzeros. A rate whose reference set is
 * empty is reported as 0.
 */
inline CoefficientMetrics coefficient_metrics(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.size() != truth.size()) {
        throw InvalidArgument("coefficient vectors differ in length");
    }
    double sq = 0.0;
    std::size_t support = 0;
    std::size_t support_hits = 0;
    std::size_t off_support_hits = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        double d = estimate[j] - truth[j];
        sq += d * d;
        bool active = truth[j] != 0.0;
        bool picked = estimate[j] != 0.0;
        support += active;
        if (picked) {
            (active ? support_hits : off_support_hits) += 1;
        }
    }
    const std::size_t off_support = truth.size() - support;
    CoefficientMetrics m;
    m.err = std::sqrt(std::sqrt(sq));
    m.tpr = support ? static_cast<double>(support_hits) / static_cast<double>(support) : 0.0;
    m.fpr = off_support ? static_cast<double>(off_support_hits) / static_cast<double>(off_support) : 0.0;
    return m;
}

inline CoefficientMetrics coefficient_metrics(const LassoFit& fit, std::span<const double> truth) {
    return coefficient_metrics(fit.coefficients, truth);
}

}  // namespace hidetify

#endif
