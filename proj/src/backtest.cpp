#include "dcaa/backtest.hpp"

#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

namespace dcaa {

namespace {

double next_wealth(const LedgerRow& row) {
    return row.volumes.dot(row.close) + row.cash * row.cash_growth + row.endowment_next;
}

ModelParams calibrate_until(const PricePanel& panel, Eigen::Index end_row, const CalibrationConfig& config) {
    const Eigen::Index begin =
        config.window == 0 ? 0 : std::max<Eigen::Index>(0, end_row - static_cast<Eigen::Index>(config.window));
    require(end_row - begin >= 2, ErrorKind::Data, "no price history before the period");
    return calibrate(panel.rows(begin, end_row), config);
}

}  // namespace

std::vector<double> BacktestLedger::wealth_path() const {
    std::vector<double> out;
    for (const LedgerRow& row : rows) out.push_back(row.wealth_next);
    return out;
}

double BacktestLedger::terminal_wealth() const { return rows.empty() ? 0.0 : rows.back().wealth_next; }

double BacktestLedger::invested() const {
    double total = rows.empty() ? 0.0 : rows.front().wealth;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) total += rows[k].endowment_next;
    return total;
}

double BacktestLedger::return_pct() const {
    const double paid = invested();
    return paid > 0.0 ? (terminal_wealth() - paid) / paid * 100.0 : 0.0;
}

double BacktestLedger::internal_rate() const {
    if (rows.empty()) return 0.0;
    const int n = static_cast<int>(rows.size());
    std::vector<double> flows{rows.front().wealth};
    for (int k = 0; k + 1 < n; ++k) flows.push_back(rows[static_cast<std::size_t>(k)].endowment_next);
    const double target = terminal_wealth();
    auto f = [&](double i) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += flows[static_cast<std::size_t>(k)] * std::pow(1.0 + i, n - k);
        return v - target;
    };
    double lo = -0.999;
    double hi = 1.0;
    if (f(lo) > 0.0) return lo;
    while (f(hi) < 0.0 && hi < 1e6) hi *= 2.0;
    std::uintmax_t iterations = 200;
    const auto root = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                        iterations);
    return 0.5 * (root.first + root.second);
}

double ledger_residual(const BacktestLedger& ledger) {
    double worst = 0.0;
    for (std::size_t k = 0; k < ledger.rows.size(); ++k) {
        const LedgerRow& row = ledger.rows[k];
        worst = std::max(worst, std::abs(row.wealth_next - next_wealth(row)));
        if (k + 1 < ledger.rows.size()) worst = std::max(worst, std::abs(ledger.rows[k + 1].wealth - row.wealth_next));
    }
    return worst;
}

BacktestLedger run_backtest(const PricePanel& panel, const BacktestSettings& settings) {
    const InvestmentPlan& base = settings.plan;
    const int tau = base.tau;
    require(tau >= 1 && std::ssize(base.alpha) == tau, ErrorKind::InvalidArgument,
            "endowment schedule must have tau entries");
    const std::size_t available = panel.periods().size();
    require(available >= static_cast<std::size_t>(tau), ErrorKind::Data,
            fmt::format("panel has {} periods, backtest needs {}", available, tau));
    const std::size_t first = settings.first_period.value_or(available - static_cast<std::size_t>(tau));
    require(first + static_cast<std::size_t>(tau) <= available, ErrorKind::InvalidArgument,
            "backtest runs past the end of the panel");

    std::optional<ModelParams> fixed = settings.params;
    if (!fixed && settings.timing == CalibrationTiming::Fixed) {
        const Eigen::Index start_row = panel.periods()[first].begin;
        // No history before the first period: calibrate in-sample on the whole panel.
        fixed = start_row >= 2 ? calibrate_until(panel, start_row, settings.calibration)
                               : calibrate(panel, settings.calibration);
    }

    BacktestLedger ledger;
    ledger.tickers = panel.tickers();
    ledger.k_star = base.k_star;
    const double r = fixed ? fixed->r() : settings.calibration.r;
    ledger.K = stop_loss_floor(base.k_star, tau, r);

    double wealth = base.alpha[0];
    try {
        for (int k = 0; k < tau; ++k) {
            const std::size_t period = first + static_cast<std::size_t>(k);
            const Period& rows = panel.periods()[period];
            const ModelParams params =
                fixed ? *fixed : calibrate_until(panel, rows.begin + 1, settings.calibration);
            require(params.m() == panel.m(), ErrorKind::DimensionMismatch, "model and panel disagree on asset count");

            InvestmentPlan plan = base;
            plan.l = k + 1;
            plan.w_prev = wealth;
            plan.K = ledger.K;
            const SolverReport report = solve(params, plan, settings.solver);

            LedgerRow row;
            row.period = k;
            row.open_date = panel.dates()[static_cast<std::size_t>(rows.begin)];
            row.close_date = panel.dates()[static_cast<std::size_t>(rows.end)];
            row.wealth = wealth;
            row.x = report.x;
            row.q = report.q;
            row.binding = report.binding;
            row.objective = report.objective;
            row.risk_slack = report.risk_slack;
            row.drift_slack = report.drift_slack;
            row.open = panel.period_open(period);
            row.close = panel.period_close(period);
            row.volumes = (wealth * report.x).cwiseQuotient(row.open);
            row.cash = wealth * (1.0 - report.x.sum());
            row.cash_growth = settings.cash_interest ? std::exp(params.r() / tau) : 1.0;
            row.endowment_next = k + 1 < tau ? base.alpha[static_cast<std::size_t>(k + 1)] : 0.0;
            row.wealth_next = next_wealth(row);
            wealth = row.wealth_next;
            ledger.rows.push_back(std::move(row));
        }
        ledger.complete = true;
    } catch (const Error& e) {
        ledger.error_kind = e.kind();
        ledger.error = e.what();
    }
    return ledger;
}

}  // namespace dcaa
