#include "dcaa/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcaa/normal.hpp"

namespace dcaa {

namespace {

void check_level(double p) {
    require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument, "risk level p must lie in (0, 1)");
}

// Tail means sum in the original sample order so that negating the sample
// negates the sum bit for bit.
template <class Pred>
double tail_mean(std::span<const double> values, Pred in_tail, const char* which) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : values) {
        if (in_tail(v)) {
            sum += v;
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorKind::EmptyTail, std::string(which) + " tail beyond VaR is empty");
    return sum / static_cast<double>(count);
}

}  // namespace

EmpiricalSample::EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), ErrorKind::InvalidArgument, "empirical sample is empty");
    require(std::none_of(values_.begin(), values_.end(), [](double v) { return std::isnan(v); }),
            ErrorKind::InvalidArgument, "empirical sample contains NaN");
    sorted_ = values_;
    std::stable_sort(sorted_.begin(), sorted_.end());
}

EmpiricalSample EmpiricalSample::negated() const {
    std::vector<double> neg(values_.size());
    std::transform(values_.begin(), values_.end(), neg.begin(), [](double v) { return -v; });
    return EmpiricalSample(std::move(neg));
}

std::size_t quantile_rank(std::size_t n, double p) {
    check_level(p);
    const double x = p * static_cast<double>(n);
    const double nearest = std::round(x);
    double rank = std::ceil(x);
    if (std::abs(x - nearest) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x)) rank = nearest;
    return std::clamp<std::size_t>(static_cast<std::size_t>(rank), 1, n);
}

double var(const EmpiricalSample& sample, double p) {
    return sample.sorted()[quantile_rank(sample.size(), p) - 1];
}

double cvar(const EmpiricalSample& sample, double p) {
    const double threshold = var(sample, p);
    return tail_mean(sample.values(), [threshold](double v) { return v > threshold; }, "upper");
}

double clvar(const EmpiricalSample& sample, double p) {
    const double threshold = var(sample, p);
    return tail_mean(sample.values(), [threshold](double v) { return v < threshold; }, "lower");
}

double gaussian_cvar_of_negative(double mean, double sd, double p) {
    check_level(p);
    require(sd >= 0.0, ErrorKind::InvalidArgument, "standard deviation must be non-negative");
    if (sd == 0.0) return -mean;
    return -mean + sd * normal::lower_tail_factor(p);
}

Matrix comonotonic_counterpart(std::span<const QuantileFunction> quantile_functions, std::span<const double> u_draws) {
    Matrix out(static_cast<Eigen::Index>(u_draws.size()), static_cast<Eigen::Index>(quantile_functions.size()));
    for (std::size_t k = 0; k < u_draws.size(); ++k) {
        require(u_draws[k] > 0.0 && u_draws[k] < 1.0, ErrorKind::InvalidArgument, "uniform draws must lie in (0, 1)");
        for (std::size_t j = 0; j < quantile_functions.size(); ++j)
            out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = quantile_functions[j](u_draws[k]);
    }
    return out;
}

std::vector<double> midpoint_grid(std::size_t n) {
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    return u;
}

}  // namespace dcaa
