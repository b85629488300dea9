#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcaa/calibration.hpp"
#include "dcaa/error.hpp"
#include "dcaa/optimizer.hpp"
#include "dcaa/prices.hpp"

namespace dcaa {

enum class CalibrationTiming {
    Fixed,   // once, on the rows before the first backtest period (whole panel if there are none)
    Rolling  // before every period, on the trailing window ending at its opening row
};

struct BacktestSettings {
    // tau, alpha, p, k_star and c0 are read; l, w_prev and K are set per period.
    InvestmentPlan plan;
    CalibrationConfig calibration;
    CalibrationTiming timing = CalibrationTiming::Fixed;
    bool cash_interest = false;  // accrue exp(r / tau) on the cash fraction
    // Panel period at which the backtest starts; defaults to the last tau periods.
    std::optional<std::size_t> first_period;
    SolverOptions solver;
    // Skips calibration when set.
    std::optional<ModelParams> params;
};

/// One rebalancing period k = 0..tau-1.
struct LedgerRow {
    int period = 0;
    Date open_date;
    Date close_date;
    double wealth = 0.0;  // W_k, after the endowment alpha_k
    Vector x;
    double q = 0.0;
    Binding binding = Binding::ZeroDrift;
    double objective = 0.0;
    double risk_slack = 0.0;
    double drift_slack = 0.0;
    Vector open;     // S_b(k)
    Vector close;    // S_e(k)
    Vector volumes;  // f_k = W_k x / S_b(k)
    double cash = 0.0;
    double cash_growth = 1.0;
    double endowment_next = 0.0;  // alpha_{k+1}, zero after the last period
    double wealth_next = 0.0;     // W_{k+1} = f_k . S_e(k) + cash * growth + alpha_{k+1}
};

struct BacktestLedger {
    std::vector<std::string> tickers;
    double k_star = 0.0;
    double K = 0.0;
    std::vector<LedgerRow> rows;
    bool complete = false;
    std::optional<ErrorKind> error_kind;
    std::string error;

    // W_1..W_n for the completed periods.
    std::vector<double> wealth_path() const;
    double terminal_wealth() const;
    double invested() const;
    // (W_tau - invested) / invested * 100.
    double return_pct() const;
    // Per-period rate i with sum_k alpha_k (1 + i)^{tau - k} = W_tau.
    double internal_rate() const;
};

BacktestLedger run_backtest(const PricePanel& panel, const BacktestSettings& settings);

// Max |W_{k+1} - (f_k . S_e(k) + cash_k growth_k + alpha_{k+1})| over the ledger.
double ledger_residual(const BacktestLedger& ledger);

}  // namespace dcaa
