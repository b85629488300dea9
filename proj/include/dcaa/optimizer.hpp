#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcaa/bound.hpp"
#include "dcaa/model.hpp"

namespace dcaa {

// Which candidate scale produced q.
enum class Binding {
    RiskFloor,        // q1
    RayStationarity,  // q2
    DriftCap,         // q3
    ZeroDrift,        // A = 0, nothing to invest in
    ZeroFallback      // all candidates negative but x = 0 is feasible
};

std::string_view to_string(Binding binding);

struct SolverOptions {
    C9Form c9_form = C9Form::Derived;
};

struct SolverReport {
    Vector x_star;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double q = 0.0;
    Vector x;
    Binding binding = Binding::ZeroDrift;
    double objective = 0.0;    // c4 + c5 at x
    double risk_slack = 0.0;   // -K - (-c4 - c5 + c7 sqrt(sigma^2(x)))
    double drift_slack = 0.0;  // c0 - (r + A'x)
    double B1 = 0.0;
    double B2 = 0.0;
    double B3 = 0.0;
    double sharpe_sq = 0.0;  // A' Sigma^{-1} A
    BoundCoefficients coefficients;
    std::vector<std::string> warnings;

    Allocation allocation() const { return Allocation::along_ray(q, x_star); }
};

// x* = Sigma^{-1} A.
Vector base_direction(const ModelParams& params);

/// Closed-form maximizer of c4 + c5(x) subject to the linearized CLVaR floor
/// and the drift cap. The solution lies on the ray q x* with
/// q = min{q1, q2, q3}; ties go to the earlier candidate.
///
/// Throws ErrorKind::InvalidArgument for p >= 0.5 and ErrorKind::Infeasible
/// when no non-negative scale meets both constraints.
SolverReport solve(const ModelParams& params, const InvestmentPlan& plan, const SolverOptions& options = {});

struct GridResult {
    Vector x_best;
    double objective = 0.0;
    std::size_t feasible_points = 0;
};

// Exhaustive search of the linearized problem over a box with `steps` points
// per axis. Verification oracle for `solve`; m <= 3.
GridResult grid_oracle(const ModelParams& params, const InvestmentPlan& plan,
                       std::span<const std::pair<double, double>> box, int steps);

}  // namespace dcaa
