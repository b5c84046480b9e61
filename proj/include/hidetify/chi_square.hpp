#ifndef HIDETIFY_CHI_SQUARE_HPP
#define HIDETIFY_CHI_SQUARE_HPP

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>

#include "errors.hpp"

namespace hidetify {

/// P(chi^2_df > x), via the regularized upper incomplete gamma function.
inline double chi_square_upper_tail(double x, double df) {
    if (!(df > 0.0)) {
        throw InvalidArgument("chi-square degrees of freedom must be positive");
    }
    if (std::isnan(x)) {
        throw InvalidArgument("chi-square statistic is NaN");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

/// P(chi^2_df <= x).
inline double chi_square_cdf(double x, double df) {
    if (x <= 0.0) {
        return 0.0;
    }
    return boost::math::gamma_p(df / 2.0, x / 2.0);
}

/// x such that P(chi^2_df > x) = upper.
inline double chi_square_upper_quantile(double upper, double df) {
    return 2.0 * boost::math::gamma_q_inv(df / 2.0, upper);
}

}  // namespace hidetify

#endif
