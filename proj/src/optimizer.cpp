#include "dcaa/optimizer.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace dcaa {

std::string_view to_string(Binding binding) {
    switch (binding) {
        case Binding::RiskFloor: return "risk-floor";
        case Binding::RayStationarity: return "ray-stationarity";
        case Binding::DriftCap: return "drift-cap";
        case Binding::ZeroDrift: return "zero-drift";
        case Binding::ZeroFallback: return "zero-fallback";
    }
    return "unknown";
}

Vector base_direction(const ModelParams& params) {
    const Vector& A = params.excess_drift();
    Vector x_star = params.covariance_llt().solve(A);
    const double residual = (params.covariance() * x_star - A).lpNorm<Eigen::Infinity>();
    require(x_star.allFinite() && residual <= 1e-10 * std::max(A.lpNorm<Eigen::Infinity>(), 1e-300) + 1e-300,
            ErrorKind::NotPositiveDefinite, "covariance solve failed to reproduce A");
    return x_star;
}

namespace {

void fill_report(SolverReport& report, const ModelParams& params, const InvestmentPlan& plan,
                 const SolverOptions& options) {
    report.x = report.q * report.x_star;
    report.coefficients = bound_coefficients(params, plan, report.x, {.jump_terms_at_zero = true, .c9_form = options.c9_form});
    report.objective = report.coefficients.c4 + report.coefficients.c5;
    report.risk_slack = -plan.K - linearized_risk(report.coefficients);
    report.drift_slack = plan.c0 - portfolio_drift(params, report.x);
}

}  // namespace

SolverReport solve(const ModelParams& params, const InvestmentPlan& plan, const SolverOptions& options) {
    plan.validate(params.r());
    require(plan.p < 0.5, ErrorKind::InvalidArgument, "closed-form allocation requires p < 0.5");

    SolverReport report;
    report.x_star = base_direction(params);
    report.sharpe_sq = params.excess_drift().dot(report.x_star);

    const BoundCoefficients base =
        bound_coefficients(params, plan, Vector::Zero(params.m()), {.jump_terms_at_zero = true, .c9_form = options.c9_form});
    report.B3 = base.c4 - plan.K;

    if (!(report.sharpe_sq > 0.0)) {
        report.binding = Binding::ZeroDrift;
        report.q = 0.0;
        if (report.B3 < 0.0) report.warnings.push_back("zero allocation violates the risk floor");
        fill_report(report, params, plan, options);
        return report;
    }

    const double G = report.sharpe_sq;
    const double c7 = base.c7;
    const double c8 = base.c8;
    const double c9 = base.c9;
    report.B1 = -c9 * G;
    report.B2 = (c8 / -c9) * report.B1 - c7 * std::sqrt(report.B1 / -c9);

    const double disc = report.B2 * report.B2 - 4.0 * report.B1 * report.B3;
    if (disc < 0.0)
        throw Error(ErrorKind::Infeasible,
                    "risk floor is unattainable along the ray: discriminant " + std::to_string(disc) + " < 0");

    report.q1 = (-report.B2 - std::sqrt(disc)) / (2.0 * report.B1);
    report.q2 = c8 / (2.0 * c9);
    report.q3 = (plan.c0 - params.r()) / G;

    const std::array<std::pair<double, Binding>, 3> candidates{{{report.q1, Binding::RiskFloor},
                                                                {report.q2, Binding::RayStationarity},
                                                                {report.q3, Binding::DriftCap}}};
    report.q = candidates[0].first;
    report.binding = candidates[0].second;
    for (const auto& [value, binding] : candidates) {
        if (value < report.q) {
            report.q = value;
            report.binding = binding;
        }
    }

    if (report.q < 0.0) {
        if (report.B3 >= 0.0 && plan.c0 >= params.r()) {
            report.warnings.push_back("all candidate scales are negative; holding cash");
            report.binding = Binding::ZeroFallback;
            report.q = 0.0;
        } else {
            throw Error(ErrorKind::Infeasible, "no non-negative scale satisfies the constraints (min candidate " +
                                                   std::to_string(report.q) + ")");
        }
    }

    // Between the roots the quadratic is non-negative; the drift cap can push
    // q below the lower root when the zero allocation already breaks the floor.
    const double floor_value = (report.B1 * report.q + report.B2) * report.q + report.B3;
    const double scale = std::abs(report.B3) + std::abs(report.B2 * report.q) + std::abs(report.B1 * report.q * report.q);
    if (floor_value < -1e-12 * std::max(scale, 1.0))
        throw Error(ErrorKind::Infeasible, "drift cap excludes every allocation that meets the risk floor");

    fill_report(report, params, plan, options);
    return report;
}

GridResult grid_oracle(const ModelParams& params, const InvestmentPlan& plan,
                       std::span<const std::pair<double, double>> box, int steps) {
    const Eigen::Index m = params.m();
    require(m <= 3, ErrorKind::InvalidArgument, "grid oracle supports at most three assets");
    require(std::ssize(box) == m, ErrorKind::DimensionMismatch, "need one range per asset");
    require(steps >= 2, ErrorKind::InvalidArgument, "grid needs at least two points per axis");

    // x-independent pieces, computed once; c5 is rebuilt per point from c2.
    const BoundCoefficients base = bound_coefficients(params, plan, Vector::Zero(m), {.jump_terms_at_zero = true});
    const Vector& A = params.excess_drift();
    const Matrix& cov = params.covariance();

    GridResult best;
    best.objective = -std::numeric_limits<double>::infinity();
    std::vector<int> index(static_cast<std::size_t>(m), 0);
    Vector x(m);
    while (true) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto [lo, hi] = box[static_cast<std::size_t>(j)];
            x(j) = lo + (hi - lo) * index[static_cast<std::size_t>(j)] / (steps - 1);
        }
        const double variance = x.dot(cov * x);
        const double excess = A.dot(x);
        double c5 = 0.0;
        for (Eigen::Index i = 0; i < base.amount.size(); ++i) {
            const double periods = base.tau - (base.first_tranche + i);
            const double rn = base.r_n(i);
            c5 += base.amount(i) * (periods * excess - 0.5 * periods * rn * rn * variance);
        }
        const double objective = base.c4 + c5;
        const bool risk_ok = -base.c4 - c5 + base.c7 * std::sqrt(variance) <= -plan.K;
        const bool drift_ok = params.r() + excess <= plan.c0;
        if (risk_ok && drift_ok) {
            ++best.feasible_points;
            if (objective > best.objective) {
                best.objective = objective;
                best.x_best = x;
            }
        }

        Eigen::Index axis = 0;
        while (axis < m && ++index[static_cast<std::size_t>(axis)] == steps) index[static_cast<std::size_t>(axis++)] = 0;
        if (axis == m) break;
    }
    if (best.feasible_points == 0) throw Error(ErrorKind::Infeasible, "no feasible grid point");
    return best;
}

}  // namespace dcaa
