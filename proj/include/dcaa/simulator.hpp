#pragma once

#include <cstdint>
#include <vector>

#include "dcaa/bound.hpp"
#include "dcaa/model.hpp"
#include "dcaa/rng.hpp"

namespace dcaa {

struct JumpEvent {
    double time = 0.0;     // absolute time, inside (t-1, t]
    int asset = -1;        // -1 for a common jump
    double log_factor = 0.0;  // sum_j Z*_j for a common jump, Z*_j otherwise
};

struct PeriodDraw {
    double y = 0.0;  // log-return; -inf when ruined
    double diffusion = 0.0;
    int common_count = 0;
    std::vector<int> idio_count;
    std::vector<JumpEvent> jumps;
    bool ruined = false;
};

// One period of the exact law: Y = mu(x) - sigma^2(x)/2 + N(0, sigma^2(x)) + transformed jumps.
// `period_start` only positions the recorded jump times.
PeriodDraw sample_period_return(const ModelParams& params, const Vector& x, Rng& rng, double period_start = 0.0);

/// One realization of the remaining horizon under a constant mix x.
/// Vectors are indexed by tranche i, i.e. n = l-1+i for v and s and
/// t = l+i for y.
struct PathSample {
    Vector y;
    Vector v;  // diffusion part of the tranche log-growth, V_n
    Vector s;  // drift and jump part, S_n
    double terminal_wealth = 0.0;
    double lambda = 0.0;
    double lambda_std = 0.0;
    std::vector<PeriodDraw> periods;
    bool ruined = false;
};

struct SimulationSettings {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

// Paths are generated from per-index sub-streams and merged by index, so the
// output is identical for every worker count.
std::vector<PathSample> sample_terminal_wealth(const ModelParams& params, const InvestmentPlan& plan, const Vector& x,
                                               const SimulationSettings& settings);

// Rebuilds W_tau from the stored log-returns.
double reconstruct_terminal_wealth(const InvestmentPlan& plan, const Vector& y);

// E[e^Y] for one period.
double period_growth_mean(const ModelParams& params, const Vector& x);

// Closed-form E[W_tau].
double expected_terminal_wealth(const ModelParams& params, const InvestmentPlan& plan, const Vector& x);

struct EulerResult {
    double growth = 0.0;  // P(horizon) / P(0)
    bool ruined = false;
};

// Multiplicative Euler scheme for the wealth SDE with exact jump arrival times.
// Common jumps multiply wealth by 1 + sum_j x_j (e^{Z_j} - 1).
EulerResult euler_path(const ModelParams& params, const Vector& x, double dt, double horizon, Rng& rng);

// Runs `euler_path` over sub-streams, index-ordered like `sample_terminal_wealth`.
std::vector<EulerResult> euler_paths(const ModelParams& params, const Vector& x, double dt, double horizon,
                                     const SimulationSettings& settings);

// Log-growth over `horizon` whole periods from the exact sampler.
std::vector<double> exact_log_growth(const ModelParams& params, const Vector& x, int horizon,
                                     const SimulationSettings& settings);

}  // namespace dcaa
