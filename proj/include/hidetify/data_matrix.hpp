#ifndef HIDETIFY_DATA_MATRIX_HPP
#define HIDETIFY_DATA_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace hidetify {

/**
 * @brief An n x p predictor matrix paired with a length-n response.
 *
 * Predictors are stored column-major so that per-predictor sweeps read
 * contiguous memory. All entries are finite and n >= 4, which every
 * leave-one-out and subset statistic relies on.
 */
class DataMatrix {
public:
    DataMatrix() = default;

    /// `columns` is column-major, `columns.size() == n * p`.
    DataMatrix(std::size_t n, std::size_t p, std::vector<double> columns, std::vector<double> response)
        : n_(n), p_(p), x_(std::move(columns)), y_(std::move(response)) {
        if (n_ < 4) {
            throw InvalidArgument("data matrix needs at least 4 rows, got " + std::to_string(n_));
        }
        if (p_ < 1) {
            throw InvalidArgument("data matrix needs at least one predictor column");
        }
        if (x_.size() != n_ * p_ || y_.size() != n_) {
            throw InvalidArgument("data matrix storage does not match n x p");
        }
        for (std::size_t j = 0; j < p_; ++j) {
            for (std::size_t i = 0; i < n_; ++i) {
                if (!std::isfinite(x_[j * n_ + i])) {
                    throw InvalidSample("non-finite predictor at row " + std::to_string(i) + ", column " +
                                        std::to_string(j));
                }
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            if (!std::isfinite(y_[i])) {
                throw InvalidSample("non-finite response at row " + std::to_string(i));
            }
        }
    }

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return p_; }

    double x(std::size_t i, std::size_t j) const { return x_[j * n_ + i]; }
    double y(std::size_t i) const { return y_[i]; }

    std::span<const double> column(std::size_t j) const { return {x_.data() + j * n_, n_}; }
    std::span<const double> response() const { return y_; }

    /// Rows `rows` (in the given order) as a new matrix.
    DataMatrix select_rows(std::span<const std::size_t> rows) const {
        std::vector<double> cols(rows.size() * p_);
        std::vector<double> resp(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            resp[r] = y_.at(rows[r]);
        }
        for (std::size_t j = 0; j < p_; ++j) {
            const double* src = x_.data() + j * n_;
            double* dst = cols.data() + j * rows.size();
            for (std::size_t r = 0; r < rows.size(); ++r) {
                dst[r] = src[rows[r]];
            }
        }
        return DataMatrix(rows.size(), p_, std::move(cols), std::move(resp));
    }

    /// Columns `keep` (in the given order) as a new matrix.
    DataMatrix select_columns(std::span<const std::size_t> keep) const {
        std::vector<double> cols;
        cols.reserve(keep.size() * n_);
        for (std::size_t j : keep) {
            auto c = column(j);
            cols.insert(cols.end(), c.begin(), c.end());
        }
        return DataMatrix(n_, keep.size(), std::move(cols), y_);
    }

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<double> x_;
    std::vector<double> y_;
};

/// Rows 0..n-1 except `k`.
inline std::vector<std::size_t> all_rows_except(std::size_t n, std::size_t k) {
    std::vector<std::size_t> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i != k) {
            rows.push_back(i);
        }
    }
    return rows;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = i;
    }
    return rows;
}

}  // namespace hidetify

#endif
