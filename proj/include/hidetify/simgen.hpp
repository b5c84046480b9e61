#ifndef HIDETIFY_SIMGEN_HPP
#define HIDETIFY_SIMGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "data_matrix.hpp"
#include "errors.hpp"
#include "random.hpp"

/**
 * @file simgen.hpp
 *
 * @brief Simulated regression data with planted influential observations.
 *
 * Clean rows follow y = x' beta + eps with AR(1)-correlated Gaussian
 * predictors (Cov(x_j, x_j') = 0.5^|j - j'|) and standard normal noise. The
 * first floor(fraction n) rows can then be replaced by one of three
 * contamination schemes: clustered copies of the most extreme row (model I,
 * masking), rows from a shifted regression that look ordinary (model II,
 * swamping), or half of each (model III).
 */

namespace hidetify {

enum class ContaminationModel { I_masking, II_swamping, III_mixed };

inline const char* to_string(ContaminationModel m) {
    switch (m) {
        case ContaminationModel::I_masking:
            return "I";
        case ContaminationModel::II_swamping:
            return "II";
        case ContaminationModel::III_mixed:
            return "III";
    }
    return "?";
}

inline std::optional<ContaminationModel> parse_model(std::string_view s) {
    if (s == "I" || s == "1") return ContaminationModel::I_masking;
    if (s == "II" || s == "2") return ContaminationModel::II_swamping;
    if (s == "III" || s == "3") return ContaminationModel::III_mixed;
    return std::nullopt;
}

struct ContaminationSpec {
    ContaminationModel model = ContaminationModel::I_masking;
    double mu = 10.0;
    double fraction = 0.15;
    std::uint64_t seed = 0;

    std::size_t contaminated_count(std::size_t n) const {
        return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    }

    void validate() const {
        if (!(fraction >= 0.0 && fraction < 0.5)) {
            throw InvalidArgument("contamination fraction must lie in [0, 0.5)");
        }
        if (!(mu > 0.0)) {
            throw InvalidArgument("contamination degree mu must be positive");
        }
    }
};

struct ContaminatedSample {
    DataMatrix data;
    std::vector<std::size_t> truth;  ///< 0-based rows that were replaced, ascending
    std::vector<double> beta;        ///< true slopes, length p
    double intercept = 0.0;
};

/// The sparse slope vector (0.3, 0.1, 0.2, 0.3, 0.9, 0.3, 1.1, 2.2, 0, 0.4, 0, ..., 0).
inline std::vector<double> true_beta(std::size_t p) {
    static constexpr double kLeading[10] = {0.3, 0.1, 0.2, 0.3, 0.9, 0.3, 1.1, 2.2, 0.0, 0.4};
    if (p < 10) {
        throw InvalidArgument("simulated design needs p >= 10");
    }
    std::vector<double> beta(p, 0.0);
    std::copy(std::begin(kLeading), std::end(kLeading), beta.begin());
    return beta;
}

namespace detail {
inline constexpr std::uint64_t kCleanStream = 0xc1ea;
inline constexpr std::uint64_t kContaminationStream = 0xc0de;

inline std::vector<double> column_major_copy(const DataMatrix& d) {
    std::vector<double> out;
    out.reserve(d.rows() * d.cols());
    for (std::size_t j = 0; j < d.cols(); ++j) {
        auto c = d.column(j);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}
}  // namespace detail

/**
 * n i.i.d. rows; predictors by the AR(1) recursion
 * x_1 = z_1, x_j = 0.5 x_{j-1} + sqrt(0.75) z_j, which has unit variances and
 * Cov(x_j, x_j') = 0.5^|j - j'| without forming a p x p Cholesky factor.
 */
inline ContaminatedSample generate_clean(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (n < 4) {
        throw InvalidArgument("simulated data needs n >= 4");
    }
    auto beta = true_beta(p);
    auto rng = make_rng(seed, {detail::kCleanStream});
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innovation = std::sqrt(0.75);

    std::vector<double> x(n * p);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double prev = 0.0;
        double fit = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double z = normal(rng);
            double v = j == 0 ? z : 0.5 * prev + innovation * z;
            x[j * n + i] = v;
            fit += beta[j] * v;
            prev = v;
        }
        y[i] = fit + normal(rng);
    }
    return {DataMatrix(n, p, std::move(x), std::move(y)), {}, std::move(beta), 0.0};
}

/// Model II coefficients: beta plus w_j = j 0.005 mu on the last 20 slopes.
inline std::vector<double> swamping_beta(std::span<const double> beta, double mu) {
    if (beta.size() < 20) {
        throw ModelIIRequiresP20();
    }
    std::vector<double> out(beta.begin(), beta.end());
    const std::size_t offset = beta.size() - 20;
    for (std::size_t j = 1; j <= 20; ++j) {
        out[offset + j - 1] += static_cast<double>(j) * 0.005 * mu;
    }
    return out;
}

/// Replaces the first floor(fraction n) rows of a clean sample according to `spec.model`.
inline ContaminatedSample contaminate(const ContaminatedSample& clean, const ContaminationSpec& spec) {
    spec.validate();
    if (!clean.truth.empty()) {
        throw InvalidArgument("sample is already contaminated");
    }
    const std::size_t n = clean.data.rows();
    const std::size_t p = clean.data.cols();
    const std::size_t total = spec.contaminated_count(n);
    if (total == 0) {
        return clean;
    }
    std::size_t n_masking = 0;
    switch (spec.model) {
        case ContaminationModel::I_masking:
            n_masking = total;
            break;
        case ContaminationModel::II_swamping:
            n_masking = 0;
            break;
        case ContaminationModel::III_mixed:
            n_masking = total / 2;
            break;
    }
    const std::size_t n_swamping = total - n_masking;
    if (n_swamping > 0 && p < 20) {
        throw ModelIIRequiresP20();
    }
    if (n_masking > 0 && p < 10) {
        throw InvalidArgument("model I contamination needs p >= 10");
    }

    auto rng = make_rng(spec.seed, {detail::kContaminationStream});
    std::normal_distribution<double> normal(0.0, 1.0);
    auto x = detail::column_major_copy(clean.data);
    std::vector<double> y(clean.data.response().begin(), clean.data.response().end());
    const double pd = static_cast<double>(p);

    if (n_masking > 0) {
        // Seed row is picked on the clean sample, before any replacement.
        std::size_t seed_row = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(clean.data.y(i)) > std::abs(clean.data.y(seed_row))) {
                seed_row = i;
            }
        }
        std::vector<std::size_t> cols(p);
        for (std::size_t i = 1; i <= n_masking; ++i) {
            const std::size_t row = i - 1;
            const double shift = static_cast<double>(i) / pd;
            for (std::size_t j = 0; j < p; ++j) {
                cols[j] = j;
                x[j * n + row] = clean.data.x(seed_row, j);
            }
            for (std::size_t s = 0; s < 10; ++s) {
                std::uniform_int_distribution<std::size_t> pick(s, p - 1);
                std::swap(cols[s], cols[pick(rng)]);
                x[cols[s] * n + row] += shift;
            }
            y[row] = clean.data.y(seed_row) + spec.mu + std::sqrt(0.5) * normal(rng) * shift;
        }
    }

    if (n_swamping > 0) {
        auto shifted = swamping_beta(clean.beta, spec.mu);
        const auto zero_block = static_cast<std::size_t>(std::floor(0.9 * pd));
        std::bernoulli_distribution coin(0.5);
        for (std::size_t row = n_masking; row < total; ++row) {
            double fit = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                double v = normal(rng) + (j < zero_block ? 0.0 : 0.5 * spec.mu);
                x[j * n + row] = v;
                fit += shifted[j] * v;
            }
            double sign = coin(rng) ? 1.0 : -1.0;
            y[row] = sign * (fit + normal(rng));
        }
    }

    ContaminatedSample out{DataMatrix(n, p, std::move(x), std::move(y)), all_rows(total), clean.beta, clean.intercept};
    return out;
}

struct DetectionMetrics {
    double tpr_inf = 0.0;
    double fpr_inf = 0.0;
};

/// TPR_inf = |truth & flagged| / |truth|, FPR_inf = |flagged \ truth| / (n - |truth|).
inline DetectionMetrics detection_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> flagged,
                                          std::size_t n) {
    if (truth.empty()) {
        throw EmptyTruth();
    }
    std::vector<char> is_true(n, 0);
    for (std::size_t i : truth) {
        if (i >= n) {
            throw InvalidArgument("truth index out of range");
        }
        is_true[i] = 1;
    }
    std::vector<char> seen(n, 0);
    std::size_t hits = 0;
    std::size_t false_hits = 0;
    for (std::size_t i : flagged) {
        if (i >= n) {
            throw InvalidArgument("flagged index out of range");
        }
        if (seen[i]) {
            continue;
        }
        seen[i] = 1;
        (is_true[i] ? hits : false_hits) += 1;
    }
    std::size_t n_true = 0;
    for (char c : is_true) {
        n_true += c;
    }
    DetectionMetrics m;
    m.tpr_inf = static_cast<double>(hits) / static_cast<double>(n_true);
    m.fpr_inf = n_true == n ? 0.0 : static_cast<double>(false_hits) / static_cast<double>(n - n_true);
    return m;
}

}  // namespace hidetify

#endif
