#ifndef HIDETIFY_ERRORS_HPP
#define HIDETIFY_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace hidetify {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input sample is empty or holds NaN/Inf.
class InvalidSample : public Error {
public:
    using Error::Error;
};

/// Expectile level outside (0, 1), or an ill-formed level sequence.
class InvalidLevel : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// Bad parameter combination (sizes, fractions, significance levels ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/**
 * A column (or the response) has zero asymmetric variance on the rows it was
 * evaluated on. `column` is the 0-based predictor index, or empty when the
 * response itself is constant. `subset` is set when the failure happened on a
 * random subset rather than on the full sample.
 */
class DegenerateColumn : public Error {
public:
    DegenerateColumn(std::optional<std::size_t> column, std::optional<std::size_t> subset = {})
        : Error(describe(column, subset)), column_(column), subset_(subset) {}

    std::optional<std::size_t> column() const noexcept { return column_; }
    std::optional<std::size_t> subset() const noexcept { return subset_; }

private:
    static std::string describe(std::optional<std::size_t> column, std::optional<std::size_t> subset) {
        std::string msg = column ? "column " + std::to_string(*column) : std::string("response");
        msg += " has zero asymmetric variance";
        if (subset) {
            msg += " on subset " + std::to_string(*subset);
        }
        return msg;
    }

    std::optional<std::size_t> column_;
    std::optional<std::size_t> subset_;
};

/// Model II contamination perturbs the last 20 coefficients and needs p >= 20.
class ModelIIRequiresP20 : public Error {
public:
    ModelIIRequiresP20() : Error("model II contamination requires p >= 20") {}
};

/// Detection rates need at least one true influential observation.
class EmptyTruth : public Error {
public:
    EmptyTruth() : Error("true influential set is empty; TPR is undefined") {}
};

}  // namespace hidetify

#endif
