#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dcaa/bound.hpp"
#include "dcaa/risk.hpp"
#include "dcaa/simulator.hpp"
#include "support/oracles.hpp"

using namespace dcaa;

namespace {

InvestmentPlan six_month_plan() {
    InvestmentPlan plan;
    plan.tau = 6;
    plan.alpha.assign(6, 1.0);
    plan.p = 0.05;
    plan.l = 1;
    plan.w_prev = 1.0;
    plan.c0 = 0.5;
    return plan;
}

ModelParams jump_market(double scale = 1.0) {
    Vector A(2);
    A << 0.04 * scale, 0.025 * scale;
    Vector sigma(2);
    sigma << 0.2 * scale, 0.15 * scale;
    Matrix rho(2, 2);
    rho << 1.0, 0.3, 0.3, 1.0;
    Vector lam(2);
    lam << 0.2 * scale, 0.2 * scale;
    return ModelParams::with_excess_drift(0.03 * scale, A, sigma, rho, 0.3 * scale, lam,
                                          {JumpLaw::normal(-0.05, 0.01), JumpLaw::normal(-0.03, 0.02)},
                                          {JumpLaw::normal(0.02, 0.01), JumpLaw::normal(-0.04, 0.01)});
}

// Independent Brownian oracle for Corr(V_n, Lambda).
double mc_correlation(const InvestmentPlan& plan, int n, std::size_t paths, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<double> vn(paths);
    std::vector<double> lam(paths);
    std::vector<double> inc(static_cast<std::size_t>(plan.tau));
    for (std::size_t k = 0; k < paths; ++k) {
        for (double& d : inc) d = n01(rng);
        double total = 0.0;
        for (int tranche = plan.l - 1; tranche < plan.tau; ++tranche) {
            double v = 0.0;
            for (int t = tranche; t < plan.tau; ++t) v += inc[static_cast<std::size_t>(t)];
            total += plan.lambda_weight(tranche) * v;
            if (tranche == n) vn[k] = v;
        }
        lam[k] = total;
    }
    return oracle::correlation(vn, lam);
}

}  // namespace

TEST(StopLossFloor, Examples) {
    EXPECT_EQ(stop_loss_floor(0.0, 6, 0.03), 0.0);
    EXPECT_DOUBLE_EQ(stop_loss_floor(0.9, 6, 0.0), 0.9 * 6);
    double hand = 0.0;
    for (double e : {0.03, 0.025, 0.02, 0.015, 0.01, 0.005}) hand += std::exp(e);
    EXPECT_NEAR(stop_loss_floor(0.95, 6, 0.03), 0.95 * hand, 1e-14);
}

TEST(CorrVnLambda, SingleActiveTranche) {
    InvestmentPlan plan = six_month_plan();
    plan.alpha.assign(6, 0.0);
    plan.alpha[5] = 2.0;
    plan.l = 6;
    EXPECT_NEAR(corr_vn_lambda(5, plan), 1.0, 1e-15);
}

TEST(CorrVnLambda, TwoPeriodHandValue) {
    InvestmentPlan plan;
    plan.tau = 2;
    plan.alpha = {1.0, 1.0};
    plan.l = 1;
    EXPECT_NEAR(corr_vn_lambda(0, plan), 3.0 / std::sqrt(10.0), 1e-15);
    EXPECT_NEAR(mc_correlation(plan, 0, 100'000, 1), 3.0 / std::sqrt(10.0), 0.01);
}

TEST(CorrVnLambda, MatchesBrownianMonteCarlo) {
    InvestmentPlan plan = six_month_plan();
    plan.alpha = {1.0, 0.5, 2.0, 0.0, 1.5, 1.0};
    plan.l = 2;
    plan.w_prev = 3.0;
    for (LambdaWeighting weighting : {LambdaWeighting::Literal, LambdaWeighting::WealthWeighted}) {
        plan.weighting = weighting;
        for (int n = 1; n < 6; ++n)
            EXPECT_NEAR(corr_vn_lambda(n, plan), mc_correlation(plan, n, 100'000, 40 + n), 0.01) << "n=" << n;
    }
}

TEST(CorrVnLambda, Errors) {
    InvestmentPlan plan = six_month_plan();
    EXPECT_THROW(corr_vn_lambda(6, plan), Error);
    plan.alpha.assign(6, 0.0);
    EXPECT_THROW(corr_vn_lambda(0, plan), Error);
}

TEST(BoundCoefficients, RiskFreeDegenerateCase) {
    const ModelParams market = ModelParams::diffusion_only(0.03, Vector::Zero(2), Vector::Constant(2, 0.2),
                                                           Matrix::Identity(2, 2));
    InvestmentPlan plan = six_month_plan();
    plan.alpha = {1.0, 2.0, 0.5, 1.0, 1.0, 3.0};
    plan.l = 3;
    plan.w_prev = 4.0;
    const BoundCoefficients c = bound_coefficients(market, plan, Vector::Zero(2));
    double c4 = plan.w_prev * (1.0 + (6 - 3 + 1) * 0.03);
    for (int i = 3; i < 6; ++i) c4 += plan.alpha[i] * (1.0 + (6 - i) * 0.03);
    ASSERT_EQ(c.c1.size(), 4);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(c.c1(i), (6 - (2 + i)) * 0.03, 1e-15);
        EXPECT_EQ(c.c2(i), 0.0);
    }
    EXPECT_EQ(c.c5, 0.0);
    EXPECT_NEAR(c.c4, c4, 1e-14);
}

TEST(BoundCoefficients, SixPeriodEndowmentSchedule) {
    // w = alpha_0 = ... = alpha_5 = 1, r = 0.03, l = 1: the current-wealth
    // tranche earns 6 periods and alpha_1..alpha_5 earn 5..1.
    const ModelParams market = ModelParams::diffusion_only(0.03, Vector::Zero(2), Vector::Constant(2, 0.2),
                                                           Matrix::Identity(2, 2));
    const BoundCoefficients c = bound_coefficients(market, six_month_plan(), Vector::Zero(2));
    EXPECT_NEAR(c.c4, 6.0 + 0.03 * (6 + 5 + 4 + 3 + 2 + 1), 1e-14);
    EXPECT_NEAR(c.c4, 6.63, 1e-14);
    EXPECT_NEAR(c.c8, 21.0, 1e-14);
}

TEST(BoundCoefficients, StructuralInvariants) {
    const ModelParams market = jump_market();
    InvestmentPlan plan = six_month_plan();
    plan.l = 2;
    plan.w_prev = 2.5;
    Vector x(2);
    x << 0.6, 0.4;
    const BoundCoefficients c = bound_coefficients(market, plan, x);
    for (Eigen::Index i = 0; i < c.r_n.size(); ++i) {
        const int n = c.first_tranche + static_cast<int>(i);
        EXPECT_GT(c.r_n(i), 0.0);
        EXPECT_LE(c.r_n(i), 1.0 + 1e-15);
        EXPECT_EQ(c.c3(i), std::sqrt(static_cast<double>(plan.tau - n)) * c.r_n(i));
    }
    EXPECT_GT(c.c6, 0.0);
    EXPECT_NEAR(c.c7 / c.c6, oracle::normal_pdf(oracle::normal_quantile_bisect(0.05)) / 0.05, 1e-12);
    EXPECT_NEAR(c.c7 / c.c6, 2.0627, 1e-4);
    EXPECT_GT(c.c8, 0.0);
    EXPECT_GT(c.c9, 0.0);
    EXPECT_NEAR(c.sigma_lambda * c.sigma_lambda, portfolio_variance(market, x) * lambda_weight_sum(plan), 1e-14);
}

TEST(BoundCoefficients, JumpTermsAtZeroOnlyChangeC1) {
    const ModelParams market = jump_market();
    Vector x(2);
    x << 0.8, 0.5;
    const BoundCoefficients full = bound_coefficients(market, six_month_plan(), x);
    const BoundCoefficients solver = bound_coefficients(market, six_month_plan(), x, {.jump_terms_at_zero = true});
    const BoundCoefficients at_zero = bound_coefficients(market, six_month_plan(), Vector::Zero(2));
    EXPECT_NE(full.c4, solver.c4);
    EXPECT_NEAR(solver.c4, at_zero.c4, 1e-15);
    EXPECT_EQ(full.c5, solver.c5);
    EXPECT_EQ(full.c7, solver.c7);
}

TEST(BoundCoefficients, ScaledMgfFailurePropagates) {
    const ModelParams market = ModelParams::with_excess_drift(
        0.0, Vector::Constant(1, 0.02), Vector::Constant(1, 0.2), Matrix::Identity(1, 1), 0.5, Vector::Zero(1),
        {JumpLaw::point_mass(-1.0)}, {JumpLaw::none()});
    EXPECT_THROW(bound_coefficients(market, six_month_plan(), Vector::Constant(1, 2.0)), Error);
}

TEST(LowerBoundValue, DegenerateAndMidCurve) {
    const ModelParams market = jump_market();
    const BoundCoefficients zero = bound_coefficients(market, six_month_plan(), Vector::Zero(2));
    EXPECT_EQ(lower_bound_value(zero, -3.0), lower_bound_value(zero, 4.0));

    Vector x(2);
    x << 0.5, 0.5;
    const BoundCoefficients c = bound_coefficients(market, six_month_plan(), x);
    double mid = 0.0;
    for (Eigen::Index i = 0; i < c.amount.size(); ++i) mid += c.amount(i) * std::exp(c.c1(i) + c.c2(i));
    EXPECT_NEAR(lower_bound_value(c, 0.0), mid, 1e-13);
    double prev = 0.0;
    for (double z = -4.0; z <= 4.0; z += 0.5) {
        const double v = lower_bound_value(c, z);
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(LowerBoundValue, MeanMatchesClosedFormTerminalMean) {
    const ModelParams market = jump_market();
    InvestmentPlan plan = six_month_plan();
    for (int l : {1, 3, 6}) {
        plan.l = l;
        plan.w_prev = 1.7;
        Vector x(2);
        x << 0.7, 0.2;
        const BoundCoefficients c = bound_coefficients(market, plan, x);
        EXPECT_NEAR(lower_bound_mean(c), expected_terminal_wealth(market, plan, x), 1e-10);
        // Quadrature of W^L against the standard normal density.
        double quad = 0.0;
        const double h = 1e-3;
        for (double z = -12.0; z <= 12.0; z += h) quad += lower_bound_value(c, z) * oracle::normal_pdf(z) * h;
        EXPECT_NEAR(quad, lower_bound_mean(c), 1e-8);
    }
}

TEST(LowerBoundValue, ClampsExtremeExponents) {
    const ModelParams market = jump_market();
    Vector x(2);
    x << 1.0, 1.0;
    const BoundCoefficients c = bound_coefficients(market, six_month_plan(), x);
    bool clamped = false;
    const double v = lower_bound_value(c, 1e6, &clamped);
    EXPECT_TRUE(clamped);
    EXPECT_TRUE(std::isfinite(v));
    lower_bound_value(c, 1.0, &clamped);
    EXPECT_FALSE(clamped);
}

TEST(LinearizedBound, ZeroAllocationAndMean) {
    const ModelParams market = jump_market();
    const BoundCoefficients zero = bound_coefficients(market, six_month_plan(), Vector::Zero(2));
    EXPECT_EQ(linearized_bound(zero, 2.0), zero.c4);
    Vector x(2);
    x << 0.4, 0.9;
    const BoundCoefficients c = bound_coefficients(market, six_month_plan(), x);
    EXPECT_NEAR(0.5 * (linearized_bound(c, 1.3) + linearized_bound(c, -1.3)), c.c4 + c.c5, 1e-14);
}

TEST(LinearizedBound, TaylorRemainderIsSecondOrder) {
    InvestmentPlan plan = six_month_plan();
    Vector x(2);
    x << 0.5, 0.5;
    std::vector<double> worst;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const ModelParams market = jump_market(eps);
        plan.c0 = 0.5 * eps;
        const BoundCoefficients c = bound_coefficients(market, plan, x);
        double diff = 0.0;
        for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0})
            diff = std::max(diff, std::abs(linearized_bound(c, z) - lower_bound_value(c, z)));
        worst.push_back(diff);
    }
    EXPECT_LT(worst[1] / worst[0], 0.02);
    EXPECT_LT(worst[2] / worst[1], 0.02);
    EXPECT_LT(worst[2], 1e-5);
}

TEST(LinearizedRisk, MatchesGaussianCvar) {
    const ModelParams market = jump_market();
    Vector x(2);
    x << 0.6, 0.3;
    const BoundCoefficients c = bound_coefficients(market, six_month_plan(), x);
    EXPECT_NEAR(linearized_risk(c), gaussian_cvar_of_negative(c.c4 + c.c5, c.c6 * c.sd(), 0.05), 1e-12);
}

TEST(RayScalars, Examples) {
    InvestmentPlan single;
    single.tau = 1;
    single.alpha = {0.0};
    single.w_prev = 2.0;
    single.weighting = LambdaWeighting::WealthWeighted;
    Vector r1(1);
    r1 << corr_vn_lambda(0, single);
    EXPECT_EQ(r1(0), 1.0);
    const RayScalars s = ray_scalars(single, r1);
    EXPECT_EQ(s.c8, 2.0);
    EXPECT_EQ(s.c9, 1.0);

    InvestmentPlan plan = six_month_plan();
    Vector r(6);
    for (int n = 0; n < 6; ++n) r(n) = corr_vn_lambda(n, plan);
    const RayScalars derived = ray_scalars(plan, r);
    const RayScalars literal = ray_scalars(plan, r, C9Form::Literal);
    EXPECT_NEAR(derived.c8, 21.0, 1e-14);
    EXPECT_EQ(derived.c8, literal.c8);
    EXPECT_GT(derived.c9, literal.c9);
}

TEST(InvestmentPlan, Validation) {
    InvestmentPlan plan = six_month_plan();
    EXPECT_NO_THROW(plan.validate(0.03));
    plan.alpha.pop_back();
    EXPECT_THROW(plan.validate(0.03), Error);
    plan = six_month_plan();
    plan.l = 7;
    EXPECT_THROW(plan.validate(0.03), Error);
    plan = six_month_plan();
    plan.c0 = 0.01;
    EXPECT_THROW(plan.validate(0.03), Error);
    plan = six_month_plan();
    plan.alpha[2] = -1.0;
    EXPECT_THROW(plan.validate(0.03), Error);
}
