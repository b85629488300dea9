#include "dcaa/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "parallel.hpp"

namespace dcaa {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

// log(1 + x_j (e^z - 1)), or nothing on ruin.
bool transformed_jump(double z, double x_j, double& out) {
    const double growth = 1.0 + x_j * std::expm1(z);
    if (!(growth > 0.0)) return false;
    out = std::log(growth);
    return true;
}

}  // namespace

PeriodDraw sample_period_return(const ModelParams& params, const Vector& x, Rng& rng, double period_start) {
    check_dimension(params, x);
    const Eigen::Index m = params.m();
    const double variance = portfolio_variance(params, x);

    PeriodDraw draw;
    draw.idio_count.assign(static_cast<std::size_t>(m), 0);
    std::normal_distribution<double> standard(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    draw.diffusion = variance > 0.0 ? std::sqrt(variance) * standard(rng) : 0.0;
    double jumps = 0.0;
    auto event_time = [&] { return period_start + (1.0 - unit(rng)); };

    draw.common_count = poisson_count(params.lambda_common(), rng);
    for (int k = 0; k < draw.common_count; ++k) {
        JumpEvent ev{event_time(), -1, 0.0};
        for (Eigen::Index j = 0; j < m; ++j) {
            double z_star = 0.0;
            if (!transformed_jump(params.common_jump_law()[static_cast<std::size_t>(j)].sample(rng), x(j), z_star))
                draw.ruined = true;
            ev.log_factor += z_star;
        }
        jumps += ev.log_factor;
        draw.jumps.push_back(ev);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const int count = poisson_count(params.lambda_idio()(j), rng);
        draw.idio_count[static_cast<std::size_t>(j)] = count;
        for (int k = 0; k < count; ++k) {
            JumpEvent ev{event_time(), static_cast<int>(j), 0.0};
            if (!transformed_jump(params.idio_jump_law()[static_cast<std::size_t>(j)].sample(rng), x(j), ev.log_factor))
                draw.ruined = true;
            jumps += ev.log_factor;
            draw.jumps.push_back(ev);
        }
    }
    std::sort(draw.jumps.begin(), draw.jumps.end(), [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });

    draw.y = draw.ruined ? kMinusInf : portfolio_drift(params, x) - 0.5 * variance + jumps + draw.diffusion;
    return draw;
}

double reconstruct_terminal_wealth(const InvestmentPlan& plan, const Vector& y) {
    double total = 0.0;
    double suffix = 0.0;
    for (Eigen::Index i = y.size() - 1; i >= 0; --i) {
        suffix += y(i);
        total += plan.tranche_amount(plan.first_tranche() + static_cast<int>(i)) * std::exp(suffix);
    }
    return total;
}

std::vector<PathSample> sample_terminal_wealth(const ModelParams& params, const InvestmentPlan& plan, const Vector& x,
                                               const SimulationSettings& settings) {
    plan.validate(params.r());
    check_dimension(params, x);
    const int count = plan.tranche_count();
    const double sigma_lambda = std::sqrt(portfolio_variance(params, x) * lambda_weight_sum(plan));

    std::vector<PathSample> paths(settings.n_paths);
    detail::parallel_for(settings.n_paths, settings.workers, [&](std::size_t index) {
        Rng rng = substream(settings.seed, index);
        PathSample& path = paths[index];
        path.y.resize(count);
        path.v.resize(count);
        path.s.resize(count);
        path.periods.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            path.periods.push_back(sample_period_return(params, x, rng, plan.l - 1 + i));
            path.y(i) = path.periods.back().y;
            path.ruined = path.ruined || path.periods.back().ruined;
        }
        double v_suffix = 0.0;
        double s_suffix = 0.0;
        for (int i = count - 1; i >= 0; --i) {
            const PeriodDraw& draw = path.periods[static_cast<std::size_t>(i)];
            v_suffix += draw.diffusion;
            s_suffix += draw.ruined ? kMinusInf : draw.y - draw.diffusion;
            path.v(i) = v_suffix;
            path.s(i) = s_suffix;
        }
        path.lambda = 0.0;
        for (int i = 0; i < count; ++i) path.lambda += plan.lambda_weight(plan.first_tranche() + i) * path.v(i);
        path.lambda_std = sigma_lambda > 0.0 ? path.lambda / sigma_lambda : 0.0;
        path.terminal_wealth = reconstruct_terminal_wealth(plan, path.y);
    });
    return paths;
}

double period_growth_mean(const ModelParams& params, const Vector& x) {
    check_dimension(params, x);
    double common_product = 1.0;
    double rate = 0.0;
    for (Eigen::Index j = 0; j < params.m(); ++j) {
        common_product *= scaled_mgf_at_one(x(j), params.h()(j, 0));
        rate += params.lambda_idio()(j) * (scaled_mgf_at_one(x(j), params.h()(j, 1)) - 1.0);
    }
    rate += params.lambda_common() * (common_product - 1.0);
    return std::exp(portfolio_drift(params, x) + rate);
}

double expected_terminal_wealth(const ModelParams& params, const InvestmentPlan& plan, const Vector& x) {
    plan.validate(params.r());
    const double growth = period_growth_mean(params, x);
    double total = 0.0;
    for (int n = plan.first_tranche(); n < plan.tau; ++n) total += plan.tranche_amount(n) * std::pow(growth, plan.tau - n);
    return total;
}

EulerResult euler_path(const ModelParams& params, const Vector& x, double dt, double horizon, Rng& rng) {
    check_dimension(params, x);
    require(dt > 0.0 && dt <= 0.01, ErrorKind::InvalidArgument, "Euler step must lie in (0, 0.01]");
    require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be positive");
    const Eigen::Index m = params.m();
    const auto steps = static_cast<long>(std::llround(horizon / dt));
    const double h = horizon / static_cast<double>(steps);
    const double drift_step = portfolio_drift(params, x) * h;
    // x' L: the portfolio loading on independent normals, since x' dB' has variance x' Sigma x dt.
    const Vector loading = params.covariance_llt().matrixL().transpose() * x;
    const double sqrt_h = std::sqrt(h);

    std::normal_distribution<double> standard(0.0, 1.0);
    std::exponential_distribution<double> unit_exp(1.0);

    // Arrival times of every jump stream over [0, horizon], merged in time order.
    struct Arrival {
        double time;
        int asset;
    };
    std::vector<Arrival> arrivals;
    auto add_stream = [&](double intensity, int asset) {
        if (intensity <= 0.0) return;
        for (double t = unit_exp(rng) / intensity; t < horizon; t += unit_exp(rng) / intensity)
            arrivals.push_back({t, asset});
    };
    add_stream(params.lambda_common(), -1);
    for (Eigen::Index j = 0; j < m; ++j) add_stream(params.lambda_idio()(j), static_cast<int>(j));
    std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) { return a.time < b.time; });

    EulerResult result{1.0, false};
    std::size_t next = 0;
    Vector z(m);
    for (long k = 0; k < steps; ++k) {
        for (Eigen::Index j = 0; j < m; ++j) z(j) = standard(rng);
        result.growth *= 1.0 + drift_step + sqrt_h * loading.dot(z);
        const double step_end = static_cast<double>(k + 1) * h;
        while (next < arrivals.size() && (arrivals[next].time < step_end || k + 1 == steps)) {
            double factor = 1.0;
            if (arrivals[next].asset < 0) {
                for (Eigen::Index j = 0; j < m; ++j)
                    factor += x(j) * std::expm1(params.common_jump_law()[static_cast<std::size_t>(j)].sample(rng));
            } else {
                const auto j = static_cast<std::size_t>(arrivals[next].asset);
                factor += x(static_cast<Eigen::Index>(j)) * std::expm1(params.idio_jump_law()[j].sample(rng));
            }
            result.growth *= factor;
            ++next;
        }
        if (!(result.growth > 0.0)) return {0.0, true};
    }
    return result;
}

std::vector<EulerResult> euler_paths(const ModelParams& params, const Vector& x, double dt, double horizon,
                                     const SimulationSettings& settings) {
    std::vector<EulerResult> out(settings.n_paths);
    detail::parallel_for(settings.n_paths, settings.workers, [&](std::size_t index) {
        Rng rng = substream(settings.seed, index);
        out[index] = euler_path(params, x, dt, horizon, rng);
    });
    return out;
}

std::vector<double> exact_log_growth(const ModelParams& params, const Vector& x, int horizon,
                                     const SimulationSettings& settings) {
    require(horizon >= 1, ErrorKind::InvalidArgument, "horizon must be at least one period");
    std::vector<double> out(settings.n_paths);
    detail::parallel_for(settings.n_paths, settings.workers, [&](std::size_t index) {
        Rng rng = substream(settings.seed, index);
        double total = 0.0;
        for (int t = 0; t < horizon; ++t) total += sample_period_return(params, x, rng, t).y;
        out[index] = total;
    });
    return out;
}

}  // namespace dcaa
