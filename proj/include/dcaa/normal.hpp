#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "dcaa/error.hpp"

namespace dcaa::normal {

inline double pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double quantile(double p) {
    require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument, "normal quantile needs p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// phi(Phi^{-1}(p)) / p: mean of a standard normal below its p-quantile, negated.
inline double lower_tail_factor(double p) { return pdf(quantile(p)) / p; }

}  // namespace dcaa::normal
