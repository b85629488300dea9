#pragma once

#include <vector>

#include "dcaa/model.hpp"

namespace dcaa {

// Weight given to the current-wealth tranche (n = l-1) inside the
// conditioning variable Lambda = sum_k a_k V_k.
enum class LambdaWeighting {
    Literal,        // a_{l-1} = alpha_{l-1}
    WealthWeighted  // a_{l-1} = w_{l-1}
};

/// Periodic-investment plan seen from the start of period l.
///
/// Endowments alpha_0..alpha_{tau-1} are paid at the period boundaries; the
/// tranche invested at boundary n grows over periods n+1..tau. `w_prev` is
/// the wealth on hand at boundary l-1, which replaces alpha_{l-1} as the first
/// tranche.
struct InvestmentPlan {
    int tau = 6;
    std::vector<double> alpha = std::vector<double>(6, 1.0);
    double p = 0.05;
    double k_star = 0.0;
    double K = 0.0;
    double c0 = 1.0;
    int l = 1;
    double w_prev = 1.0;
    LambdaWeighting weighting = LambdaWeighting::Literal;

    void validate(double r) const;

    int first_tranche() const { return l - 1; }
    int tranche_count() const { return tau - l + 1; }
    // Amount invested in tranche n: w_prev for n = l-1, alpha_n afterwards.
    double tranche_amount(int n) const;
    // Weight of V_n inside Lambda.
    double lambda_weight(int n) const;
};

// K = k* sum_{i=1}^{tau} exp((tau - i + 1) r / tau).
double stop_loss_floor(double k_star, int tau, double r);

// sum_{k,w} a_k a_w min(tau - k, tau - w) over tranches k, w >= l-1.
double lambda_weight_sum(const InvestmentPlan& plan);

// Corr(V_n, Lambda).
double corr_vn_lambda(int n, const InvestmentPlan& plan);

enum class C9Form {
    Derived,  // includes the (tau - i) factor of the c5 quadratic term
    Literal   // omits it, as in the printed closed form
};

struct RayScalars {
    double c8 = 0.0;
    double c9 = 0.0;
};

// Coefficients of the ray objective c5(q x*) = c8 (A'x) - c9 sigma^2(x).
RayScalars ray_scalars(const InvestmentPlan& plan, const Vector& r_vec, C9Form form = C9Form::Derived);

struct BoundOptions {
    // Evaluate the jump-MGF part of c1 at x = 0, where it vanishes. The
    // closed-form solver needs c4 independent of x.
    bool jump_terms_at_zero = false;
    C9Form c9_form = C9Form::Derived;
};

/// Derived scalars of the comonotonic lower bound and its linearization.
/// Vectors are indexed by tranche, entry i holding n = l-1+i.
struct BoundCoefficients {
    int first_tranche = 0;
    int tau = 0;
    Vector amount;  // w_{l-1}, alpha_l, ..., alpha_{tau-1}
    Vector r_n;
    double variance = 0.0;  // sigma^2(x)
    double sigma_lambda = 0.0;
    Vector c1;
    Vector c2;
    Vector c3;
    double c4 = 0.0;
    double c5 = 0.0;
    double c6 = 0.0;
    double c7 = 0.0;
    double c8 = 0.0;
    double c9 = 0.0;

    double sd() const;
};

BoundCoefficients bound_coefficients(const ModelParams& params, const InvestmentPlan& plan, const Vector& x,
                                     const BoundOptions& options = {});

// Comonotonic lower bound W^L as a function of Lambda / sigma_Lambda.
// Exponents are clamped to [-700, 700]; `clamped` reports whether that fired.
double lower_bound_value(const BoundCoefficients& coeffs, double lambda_std, bool* clamped = nullptr);

// E[W^L] over Lambda / sigma_Lambda ~ N(0, 1).
double lower_bound_mean(const BoundCoefficients& coeffs);

// E[(W^L - d)_+], closed form given the root of W^L = d.
double lower_bound_stop_loss(const BoundCoefficients& coeffs, double d);

// First-order Taylor version: c4 + c5 + c6 sqrt(sigma^2(x)) lambda_std.
double linearized_bound(const BoundCoefficients& coeffs, double lambda_std);

// CVaR_{1-p}(-W'^L) = -c4 - c5 + c7 sqrt(sigma^2(x)).
double linearized_risk(const BoundCoefficients& coeffs);

}  // namespace dcaa
