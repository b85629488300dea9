#include "dcaa/bound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "dcaa/normal.hpp"

namespace dcaa {

void InvestmentPlan::validate(double r) const {
    require(tau >= 1, ErrorKind::InvalidArgument, "horizon tau must be at least 1");
    require(std::ssize(alpha) == tau, ErrorKind::DimensionMismatch,
            "endowment schedule needs tau = " + std::to_string(tau) + " entries");
    require(l >= 1 && l <= tau, ErrorKind::InvalidArgument, "current period l must lie in [1, tau]");
    require(std::all_of(alpha.begin(), alpha.end(), [](double a) { return a >= 0.0 && std::isfinite(a); }),
            ErrorKind::InvalidArgument, "endowments must be non-negative");
    require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument, "risk level p must lie in (0, 1)");
    require(w_prev >= 0.0 && std::isfinite(w_prev), ErrorKind::InvalidArgument, "wealth must be non-negative");
    require(c0 >= r, ErrorKind::InvalidArgument, "drift cap c0 must not be below the risk-free rate");
    require(std::isfinite(K), ErrorKind::InvalidArgument, "wealth floor K must be finite");
}

double InvestmentPlan::tranche_amount(int n) const {
    return n == first_tranche() ? w_prev : alpha[static_cast<std::size_t>(n)];
}

double InvestmentPlan::lambda_weight(int n) const {
    if (n == first_tranche() && weighting == LambdaWeighting::WealthWeighted) return w_prev;
    return alpha[static_cast<std::size_t>(n)];
}

double stop_loss_floor(double k_star, int tau, double r) {
    require(tau >= 1, ErrorKind::InvalidArgument, "horizon tau must be at least 1");
    double sum = 0.0;
    for (int i = 1; i <= tau; ++i) sum += std::exp((tau - i + 1) * r / tau);
    return k_star * sum;
}

double lambda_weight_sum(const InvestmentPlan& plan) {
    double total = 0.0;
    for (int k = plan.first_tranche(); k < plan.tau; ++k)
        for (int w = plan.first_tranche(); w < plan.tau; ++w)
            total += plan.lambda_weight(k) * plan.lambda_weight(w) * std::min(plan.tau - k, plan.tau - w);
    return total;
}

double corr_vn_lambda(int n, const InvestmentPlan& plan) {
    require(n >= plan.first_tranche() && n < plan.tau, ErrorKind::InvalidArgument,
            "tranche index n must lie in [l-1, tau-1]");
    const double denom_sum = lambda_weight_sum(plan);
    require(denom_sum > 0.0, ErrorKind::InvalidArgument, "all conditioning weights are zero");
    double numer = 0.0;
    for (int k = plan.first_tranche(); k < plan.tau; ++k)
        numer += plan.lambda_weight(k) * std::min(plan.tau - n, plan.tau - k);
    return numer / std::sqrt((plan.tau - n) * denom_sum);
}

RayScalars ray_scalars(const InvestmentPlan& plan, const Vector& r_vec, C9Form form) {
    require(r_vec.size() == plan.tranche_count(), ErrorKind::DimensionMismatch,
            "need one correlation per remaining tranche");
    RayScalars out;
    for (int i = 0; i < plan.tranche_count(); ++i) {
        const int n = plan.first_tranche() + i;
        const double amount = plan.tranche_amount(n);
        const double periods = plan.tau - n;
        out.c8 += amount * periods;
        // The current-wealth tranche carries (tau - l + 1) in both forms.
        const double weight = (form == C9Form::Derived || i == 0) ? periods : 1.0;
        out.c9 += 0.5 * amount * weight * r_vec(i) * r_vec(i);
    }
    return out;
}

double BoundCoefficients::sd() const { return std::sqrt(std::max(variance, 0.0)); }

BoundCoefficients bound_coefficients(const ModelParams& params, const InvestmentPlan& plan, const Vector& x,
                                     const BoundOptions& options) {
    plan.validate(params.r());
    check_dimension(params, x);

    const int count = plan.tranche_count();
    BoundCoefficients out;
    out.first_tranche = plan.first_tranche();
    out.tau = plan.tau;
    out.variance = portfolio_variance(params, x);
    out.amount.resize(count);
    out.r_n.resize(count);
    for (int i = 0; i < count; ++i) {
        const int n = out.first_tranche + i;
        out.amount(i) = plan.tranche_amount(n);
        out.r_n(i) = corr_vn_lambda(n, plan);
    }
    out.sigma_lambda = std::sqrt(out.variance * lambda_weight_sum(plan));

    // Per-period log-MGF of the transformed jumps at 1.
    double jump_rate = 0.0;
    if (!options.jump_terms_at_zero) {
        double common_product = 1.0;
        for (Eigen::Index j = 0; j < params.m(); ++j) {
            common_product *= scaled_mgf_at_one(x(j), params.h()(j, 0));
            jump_rate += params.lambda_idio()(j) * (scaled_mgf_at_one(x(j), params.h()(j, 1)) - 1.0);
        }
        jump_rate += params.lambda_common() * (common_product - 1.0);
    }

    const double excess = params.excess_drift().dot(x);
    out.c1.resize(count);
    out.c2.resize(count);
    out.c3.resize(count);
    for (int i = 0; i < count; ++i) {
        const double periods = plan.tau - (out.first_tranche + i);
        const double rn = out.r_n(i);
        out.c1(i) = periods * params.r() + periods * jump_rate;
        out.c2(i) = periods * excess - 0.5 * periods * rn * rn * out.variance;
        out.c3(i) = std::sqrt(periods) * rn;
    }
    out.c4 = out.amount.dot((1.0 + out.c1.array()).matrix());
    out.c5 = out.amount.dot(out.c2);
    out.c6 = out.amount.dot(out.c3);
    out.c7 = out.c6 * normal::lower_tail_factor(plan.p);
    const RayScalars ray = ray_scalars(plan, out.r_n, options.c9_form);
    out.c8 = ray.c8;
    out.c9 = ray.c9;
    return out;
}

double lower_bound_value(const BoundCoefficients& coeffs, double lambda_std, bool* clamped) {
    constexpr double limit = 700.0;
    const double sd = coeffs.sd();
    double total = 0.0;
    bool any_clamped = false;
    for (Eigen::Index i = 0; i < coeffs.amount.size(); ++i) {
        double exponent = coeffs.c1(i) + coeffs.c2(i) + coeffs.c3(i) * sd * lambda_std;
        if (std::abs(exponent) > limit) {
            exponent = std::clamp(exponent, -limit, limit);
            any_clamped = true;
        }
        total += coeffs.amount(i) * std::exp(exponent);
    }
    if (clamped != nullptr) *clamped = any_clamped;
    return total;
}

double lower_bound_mean(const BoundCoefficients& coeffs) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < coeffs.amount.size(); ++i)
        total += coeffs.amount(i) *
                 std::exp(coeffs.c1(i) + coeffs.c2(i) + 0.5 * coeffs.c3(i) * coeffs.c3(i) * coeffs.variance);
    return total;
}

double lower_bound_stop_loss(const BoundCoefficients& coeffs, double d) {
    const double mean = lower_bound_mean(coeffs);
    if (d <= 0.0) return mean - d;
    const double sd = coeffs.sd();
    if (sd == 0.0 || (coeffs.c3.array() * sd == 0.0).all()) return std::max(lower_bound_value(coeffs, 0.0) - d, 0.0);
    auto excess = [&](double z) { return lower_bound_value(coeffs, z) - d; };
    double lo = -1.0;
    double hi = 1.0;
    while (excess(lo) > 0.0) {
        if (lo < -40.0) return mean - d;  // d sits below the bound's support for every practical z
        lo *= 2.0;
    }
    while (excess(hi) < 0.0) {
        if (hi > 40.0) return 0.0;
        hi *= 2.0;
    }
    std::uintmax_t iterations = 200;
    const auto bracket =
        boost::math::tools::toms748_solve(excess, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
    const double z = 0.5 * (bracket.first + bracket.second);
    double total = -d * normal::cdf(-z);
    for (Eigen::Index i = 0; i < coeffs.amount.size(); ++i) {
        const double s = coeffs.c3(i) * sd;
        total += coeffs.amount(i) * std::exp(coeffs.c1(i) + coeffs.c2(i) + 0.5 * s * s) * normal::cdf(s - z);
    }
    return std::max(total, 0.0);
}

double linearized_bound(const BoundCoefficients& coeffs, double lambda_std) {
    return coeffs.c4 + coeffs.c5 + coeffs.c6 * coeffs.sd() * lambda_std;
}

double linearized_risk(const BoundCoefficients& coeffs) { return -coeffs.c4 - coeffs.c5 + coeffs.c7 * coeffs.sd(); }

}  // namespace dcaa
