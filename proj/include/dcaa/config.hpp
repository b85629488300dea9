#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dcaa/backtest.hpp"
#include "dcaa/calibration.hpp"
#include "dcaa/io.hpp"
#include "dcaa/simulator.hpp"

namespace dcaa {

/// Settings shared by every subcommand. Loaded from a JSON file; command-line
/// flags are applied on top. Relative paths resolve against the file's folder.
///
///   {
///     "model": {...} | "model.json",        // or "calibration", not both
///     "calibration": {"kappa", "window", "days_per_period", "common_jump_fraction", "rolling_window"},
///     "prices": "prices.csv",
///     "plan": {"tau", "alpha", "p", "k_star": [..], "c0", "r", "l", "w_prev", "c9", "lambda_weighting"},
///     "simulation": {"paths", "seed", "dt", "workers"},
///     "backtest": {"cash_interest", "timing", "first_period"},
///     "output_dir": "out"
///   }
struct RunConfig {
    std::optional<ModelParams> model;
    CalibrationConfig calibration;
    std::optional<std::filesystem::path> prices;
    InvestmentPlan plan;
    std::vector<double> k_stars{0.5, 0.85, 0.9, 0.95};
    double r = 0.03;
    std::size_t paths = 10000;
    std::optional<std::uint64_t> seed;
    double dt = 1e-3;
    unsigned workers = 0;
    bool cash_interest = false;
    CalibrationTiming timing = CalibrationTiming::Fixed;
    std::optional<std::size_t> first_period;
    C9Form c9_form = C9Form::Derived;
    std::optional<std::filesystem::path> output_dir;
};

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Resizes alpha to tau, keeping given entries and filling with ones.
void resize_schedule(InvestmentPlan& plan, int tau);

}  // namespace dcaa
