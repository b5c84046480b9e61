#ifndef HIDETIFY_EXPECTILE_HPP
#define HIDETIFY_EXPECTILE_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "data_matrix.hpp"
#include "errors.hpp"

/**
 * @file expectile.hpp
 *
 * @brief Empirical expectiles and the asymmetric second moments built on them.
 *
 * The tau-expectile of a sample minimizes the asymmetric square loss
 * sum_i |tau - 1(y_i <= theta)| (y_i - theta)^2. Asymmetric variances,
 * covariances and correlations are the usual 1/n moments with deviations
 * centered at the tau-expectile instead of the mean, so tau = 0.5 gives back
 * the ordinary (1/n-normalized) Pearson quantities.
 */

namespace hidetify {

/**
 * @brief Ordered list of expectile levels tau_1 < ... < tau_q, all in (0, 1).
 */
class ExpectileSequence {
public:
    ExpectileSequence(std::initializer_list<double> levels) : ExpectileSequence(std::vector<double>(levels)) {}

    explicit ExpectileSequence(std::vector<double> levels) : levels_(std::move(levels)) {
        if (levels_.empty()) {
            throw InvalidLevel("expectile sequence must hold at least one level");
        }
        for (std::size_t l = 0; l < levels_.size(); ++l) {
            double tau = levels_[l];
            if (!(tau > 0.0 && tau < 1.0)) {
                throw InvalidLevel("expectile level " + std::to_string(tau) + " is outside (0, 1)");
            }
            if (l > 0 && !(levels_[l - 1] < tau)) {
                throw InvalidLevel("expectile levels must be strictly increasing");
            }
        }
    }

    /// The levels used by asymMIP/asymHIM unless told otherwise.
    static ExpectileSequence standard() { return {0.25, 0.5, 0.75}; }
    /// The single-level sequence that reduces asymmetric statistics to HIM/MIP.
    static ExpectileSequence median_only() { return {0.5}; }

    std::size_t size() const noexcept { return levels_.size(); }
    double operator[](std::size_t l) const { return levels_[l]; }
    auto begin() const noexcept { return levels_.begin(); }
    auto end() const noexcept { return levels_.end(); }
    const std::vector<double>& levels() const noexcept { return levels_; }

    friend bool operator==(const ExpectileSequence&, const ExpectileSequence&) = default;

private:
    std::vector<double> levels_;
};

struct AsymmetricMoments {
    double mu_tau = 0.0;     ///< tau-expectile
    double sigma_tau = 0.0;  ///< sqrt of the 1/n mean squared deviation from mu_tau
};

inline constexpr int kExpectileMaxIterations = 200;
inline constexpr double kExpectileTolerance = 1e-10;

/// Empirical asymmetric square loss (1/n) sum_i R_tau(y_i - theta).
inline double asymmetric_loss(std::span<const double> y, double tau, double theta) {
    double total = 0.0;
    for (double v : y) {
        double r = v - theta;
        total += (r <= 0.0 ? 1.0 - tau : tau) * r * r;
    }
    return total / static_cast<double>(y.size());
}

namespace detail {

inline void check_level(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InvalidLevel("expectile level " + std::to_string(tau) + " is outside (0, 1)");
    }
}

inline void check_sample(std::span<const double> y) {
    if (y.empty()) {
        throw InvalidSample("sample is empty");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) {
            throw InvalidSample("non-finite value at position " + std::to_string(i));
        }
    }
}

inline double mean(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) {
        s += v;
    }
    return s / static_cast<double>(y.size());
}

/// IRLS without input validation; callers guarantee a finite, non-empty sample and tau in (0, 1).
inline double expectile_irls(std::span<const double> y, double tau) {
    double theta = mean(y);
    if (tau == 0.5) {
        return theta;
    }
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
        return y[0];
    }
#ifndef NDEBUG
    double loss = asymmetric_loss(y, tau, theta);
#endif
    for (int it = 0; it < kExpectileMaxIterations; ++it) {
        double sw = 0.0;
        double swy = 0.0;
        for (double v : y) {
            double w = v <= theta ? 1.0 - tau : tau;
            sw += w;
            swy += w * v;
        }
        double next = swy / sw;
#ifndef NDEBUG
        double next_loss = asymmetric_loss(y, tau, next);
        assert(next_loss <= loss + 1e-12 * (1.0 + loss));
        loss = next_loss;
#endif
        if (std::abs(next - theta) <= kExpectileTolerance * (1.0 + std::abs(theta))) {
            return next;
        }
        theta = next;
    }
    throw NoConvergence("expectile IRLS did not converge in " + std::to_string(kExpectileMaxIterations) +
                        " iterations");
}

/// 1/n sum of squared deviations from `center`.
inline double mean_square_about(std::span<const double> y, double center) {
    double s = 0.0;
    for (double v : y) {
        double d = v - center;
        s += d * d;
    }
    return s / static_cast<double>(y.size());
}

/// Zero variance up to rounding of the centering step.
inline bool is_degenerate(std::span<const double> y, double sigma) {
    double scale = 0.0;
    for (double v : y) {
        scale = std::max(scale, std::abs(v));
    }
    return sigma <= 1e-12 * scale || sigma == 0.0;
}

inline AsymmetricMoments moments_unchecked(std::span<const double> y, double tau) {
    AsymmetricMoments m;
    m.mu_tau = expectile_irls(y, tau);
    m.sigma_tau = std::sqrt(mean_square_about(y, m.mu_tau));
    return m;
}

}  // namespace detail

/**
 * Empirical tau-expectile by iteratively reweighted least squares, started at
 * the arithmetic mean and stopped when |theta_{t+1} - theta_t| <= 1e-10 (1 + |theta_t|).
 */
inline double empirical_expectile(std::span<const double> sample, double tau) {
    detail::check_level(tau);
    detail::check_sample(sample);
    return detail::expectile_irls(sample, tau);
}

inline AsymmetricMoments asymmetric_moments(std::span<const double> sample, double tau) {
    detail::check_level(tau);
    detail::check_sample(sample);
    return detail::moments_unchecked(sample, tau);
}

/// n^{-1} sum_i (y_i - mu_tau)^2.
inline double asymmetric_variance(std::span<const double> sample, double tau) {
    if (sample.size() < 2) {
        throw InvalidSample("asymmetric variance needs at least 2 values");
    }
    auto m = asymmetric_moments(sample, tau);
    return m.sigma_tau * m.sigma_tau;
}

/// n^{-1} sum_i (x_i - mu_tau(x)) (y_i - mu_tau(y)).
inline double asymmetric_covariance(std::span<const double> x, std::span<const double> y, double tau) {
    if (x.size() != y.size()) {
        throw InvalidArgument("covariance inputs differ in length");
    }
    double mx = empirical_expectile(x, tau);
    double my = empirical_expectile(y, tau);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - mx) * (y[i] - my);
    }
    return s / static_cast<double>(x.size());
}

namespace detail {

/// Correlation of `x` against a response whose moments are already known.
inline double correlation_with(std::span<const double> x, std::span<const double> y, double tau,
                               const AsymmetricMoments& ym, std::optional<std::size_t> column,
                               std::optional<std::size_t> subset = {}) {
    double mx = expectile_irls(x, tau);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - ym.mu_tau);
    }
    double n = static_cast<double>(x.size());
    double sx = std::sqrt(sxx / n);
    if (is_degenerate(x, sx)) {
        throw DegenerateColumn(column, subset);
    }
    return (sxy / n) / (sx * ym.sigma_tau);
}

}  // namespace detail

/**
 * Asymmetric correlation Cov_tau(x, y) / (sigma_tau(x) sigma_tau(y)).
 * Throws DegenerateColumn when either input has zero asymmetric variance
 * (`column` is empty when `y` is the offending one).
 */
inline double asymmetric_correlation(std::span<const double> x, std::span<const double> y, double tau) {
    if (x.size() != y.size()) {
        throw InvalidArgument("correlation inputs differ in length");
    }
    if (x.size() < 2) {
        throw InvalidSample("correlation needs at least 2 paired values");
    }
    detail::check_level(tau);
    detail::check_sample(x);
    detail::check_sample(y);
    auto mx = detail::moments_unchecked(x, tau);
    auto my = detail::moments_unchecked(y, tau);
    if (detail::is_degenerate(x, mx.sigma_tau)) {
        throw DegenerateColumn(std::size_t{0});
    }
    if (detail::is_degenerate(y, my.sigma_tau)) {
        throw DegenerateColumn(std::nullopt);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - mx.mu_tau) * (y[i] - my.mu_tau);
    }
    return (s / static_cast<double>(x.size())) / (mx.sigma_tau * my.sigma_tau);
}

/// q x p table of correlations, row l holding level tau_l.
class CorrelationTable {
public:
    CorrelationTable(std::size_t q, std::size_t p) : q_(q), p_(p), values_(q * p, 0.0) {}

    std::size_t levels() const noexcept { return q_; }
    std::size_t columns() const noexcept { return p_; }
    double operator()(std::size_t l, std::size_t j) const { return values_[l * p_ + j]; }
    double& operator()(std::size_t l, std::size_t j) { return values_[l * p_ + j]; }
    std::span<const double> row(std::size_t l) const { return {values_.data() + l * p_, p_}; }
    std::span<double> row(std::size_t l) { return {values_.data() + l * p_, p_}; }

private:
    std::size_t q_;
    std::size_t p_;
    std::vector<double> values_;
};

/// Correlation of every predictor with the response at every level.
inline CorrelationTable columnwise_asymmetric_correlations(const DataMatrix& data, const ExpectileSequence& taus) {
    CorrelationTable table(taus.size(), data.cols());
    auto y = data.response();
    for (std::size_t l = 0; l < taus.size(); ++l) {
        auto ym = detail::moments_unchecked(y, taus[l]);
        if (detail::is_degenerate(y, ym.sigma_tau)) {
            throw DegenerateColumn(std::nullopt);
        }
        for (std::size_t j = 0; j < data.cols(); ++j) {
            table(l, j) = detail::correlation_with(data.column(j), y, taus[l], ym, j);
        }
    }
    return table;
}

/// Indices of predictors with zero asymmetric variance at any of `taus`.
inline std::vector<std::size_t> degenerate_columns(const DataMatrix& data, const ExpectileSequence& taus) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        auto c = data.column(j);
        for (double tau : taus) {
            auto m = detail::moments_unchecked(c, tau);
            if (detail::is_degenerate(c, m.sigma_tau)) {
                out.push_back(j);
                break;
            }
        }
    }
    return out;
}

}  // namespace hidetify

#endif
