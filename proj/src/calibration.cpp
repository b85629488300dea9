#include "dcaa/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dcaa/error.hpp"

namespace dcaa {

namespace {

constexpr std::size_t kMinObservations = 30;

double median_of(std::vector<double>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

JumpLaw fit_normal(const std::vector<double>& z) {
    if (z.empty()) return JumpLaw::none();
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    if (z.size() == 1) return JumpLaw::point_mass(mean);
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    return JumpLaw::normal(mean, ss / static_cast<double>(z.size() - 1));
}

}  // namespace

void CalibrationConfig::validate() const {
    require(kappa > 0.0, ErrorKind::InvalidArgument, "kappa must be positive");
    require(window == 0 || window >= kMinObservations, ErrorKind::InvalidArgument,
            "calibration window must cover at least 30 observations");
    require(days_per_period > 0.0, ErrorKind::InvalidArgument, "days per period must be positive");
    require(common_jump_fraction > 0.0 && common_jump_fraction <= 1.0, ErrorKind::InvalidArgument,
            "common jump fraction must lie in (0, 1]");
    require(rolling_window >= 3, ErrorKind::InvalidArgument, "rolling window must be at least 3");
    require(std::isfinite(r), ErrorKind::InvalidArgument, "risk-free rate must be finite");
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flag_jumps(const Matrix& returns, double kappa,
                                                               std::size_t rolling_window) {
    const Eigen::Index n = returns.rows();
    const auto width = std::min<Eigen::Index>(static_cast<Eigen::Index>(rolling_window), n);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flags =
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, returns.cols(), false);
    std::vector<double> neighbours;
    for (Eigen::Index t = 0; t < n; ++t) {
        // Centred window, shifted inward at the edges.
        const Eigen::Index lo = std::clamp<Eigen::Index>(t - width / 2, 0, n - width);
        for (Eigen::Index j = 0; j < returns.cols(); ++j) {
            neighbours.clear();
            for (Eigen::Index s = lo; s < lo + width; ++s)
                if (s != t) neighbours.push_back(returns(s, j));
            if (neighbours.size() < 2) continue;
            double mean = 0.0;
            for (double v : neighbours) mean += v;
            mean /= static_cast<double>(neighbours.size());
            double ss = 0.0;
            for (double v : neighbours) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / static_cast<double>(neighbours.size() - 1));
            const double med = median_of(neighbours);
            flags(t, j) = std::abs(returns(t, j) - med) > kappa * sd;
        }
    }
    return flags;
}

CalibrationResult calibrate_detailed(const PricePanel& panel, const CalibrationConfig& config) {
    config.validate();
    const Eigen::Index rows = panel.size();
    const Eigen::Index start =
        config.window == 0 ? 0 : std::max<Eigen::Index>(0, rows - static_cast<Eigen::Index>(config.window));
    const Matrix returns = panel.rows(start, rows).log_returns();
    const Eigen::Index n = returns.rows();
    const Eigen::Index m = returns.cols();
    require(n >= static_cast<Eigen::Index>(kMinObservations), ErrorKind::Data,
            fmt::format("calibration needs at least {} daily returns, got {}", kMinObservations, n));

    const auto flags = flag_jumps(returns, config.kappa, config.rolling_window);
    const auto common_needed = std::max<Eigen::Index>(
        2, static_cast<Eigen::Index>(std::ceil(config.common_jump_fraction * static_cast<double>(m) - 1e-12)));

    std::vector<Eigen::Index> clean;
    std::vector<Eigen::Index> common_days;
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index count = flags.row(t).count();
        if (count == 0)
            clean.push_back(t);
        else if (m >= 2 && count >= common_needed)
            common_days.push_back(t);
    }
    require(clean.size() >= 2, ErrorKind::Data, "fewer than 2 jump-free observations");

    Matrix jf(static_cast<Eigen::Index>(clean.size()), m);
    for (std::size_t k = 0; k < clean.size(); ++k) jf.row(static_cast<Eigen::Index>(k)) = returns.row(clean[k]);
    const Vector daily_mean = jf.colwise().mean().transpose();
    const Matrix centred = jf.rowwise() - daily_mean.transpose();
    const Matrix daily_cov = centred.transpose() * centred / static_cast<double>(jf.rows() - 1);

    const double D = config.days_per_period;
    const Matrix cov = D * daily_cov;
    Vector sigma = cov.diagonal().cwiseSqrt();
    require((sigma.array() > 0.0).all(), ErrorKind::NotPositiveDefinite,
            "sample covariance is singular (zero variance)");
    Matrix rho = sigma.cwiseInverse().asDiagonal() * cov * sigma.cwiseInverse().asDiagonal();
    rho = (0.5 * (rho + rho.transpose())).eval();
    rho.diagonal().setOnes();
    require(Eigen::LLT<Matrix>(cov).info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
            "sample covariance is singular");

    // Jump magnitudes net of the ordinary daily drift.
    std::vector<std::vector<double>> common_z(static_cast<std::size_t>(m));
    std::vector<std::vector<double>> idio_z(static_cast<std::size_t>(m));
    std::size_t ci = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const bool common = ci < common_days.size() && common_days[ci] == t;
        if (common) ++ci;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double z = returns(t, j) - daily_mean(j);
            if (common)
                common_z[static_cast<std::size_t>(j)].push_back(z);
            else if (flags(t, j))
                idio_z[static_cast<std::size_t>(j)].push_back(z);
        }
    }

    const double per_period = D / static_cast<double>(n);
    const double lambda = static_cast<double>(common_days.size()) * per_period;
    Vector lambda_idio(m);
    std::vector<JumpLaw> common_laws;
    std::vector<JumpLaw> idio_laws;
    std::vector<std::size_t> idio_counts;
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& cz = common_z[static_cast<std::size_t>(j)];
        const auto& iz = idio_z[static_cast<std::size_t>(j)];
        idio_counts.push_back(iz.size());
        lambda_idio(j) = static_cast<double>(iz.size()) * per_period;
        common_laws.push_back(fit_normal(cz));
        idio_laws.push_back(fit_normal(iz));
    }
    // Jump-free per-period log drift is A + r - sigma^2 / 2.
    const Vector A = D * daily_mean + 0.5 * cov.diagonal() - Vector::Constant(m, config.r);
    return {ModelParams::with_excess_drift(config.r, A, sigma, rho, lambda, lambda_idio, common_laws, idio_laws),
            static_cast<std::size_t>(n), clean.size(), common_days.size(), std::move(idio_counts)};
}

}  // namespace dcaa
