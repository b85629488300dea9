#pragma once

#include <cstddef>
#include <vector>

#include "dcaa/model.hpp"
#include "dcaa/prices.hpp"

namespace dcaa {

struct CalibrationConfig {
    double kappa = 3.0;                // jump threshold, in rolling standard deviations
    std::size_t window = 0;            // trailing price rows to use; 0 means all
    double days_per_period = 21.0;     // daily -> per-period scaling
    double common_jump_fraction = 1.0; // share of assets flagged on one day for a common jump
    std::size_t rolling_window = 31;   // neighbourhood for the rolling median / std
    double r = 0.03;                   // per-period risk-free rate

    void validate() const;
};

struct CalibrationResult {
    ModelParams params;
    std::size_t observations = 0;  // daily returns used
    std::size_t jump_free = 0;     // days with no flag
    std::size_t common_jumps = 0;
    std::vector<std::size_t> idio_jumps;
};

// Flags |r_t - median| > kappa * std over the rolling neighbourhood of t, excluding t itself.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flag_jumps(const Matrix& returns, double kappa,
                                                               std::size_t rolling_window);

CalibrationResult calibrate_detailed(const PricePanel& panel, const CalibrationConfig& config);

inline ModelParams calibrate(const PricePanel& panel, const CalibrationConfig& config) {
    return calibrate_detailed(panel, config).params;
}

}  // namespace dcaa
