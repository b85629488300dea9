#include "dcaa/model.hpp"

#include <cmath>
#include <utility>

namespace dcaa {

JumpLaw JumpLaw::normal(double mean, double variance) {
    require(std::isfinite(mean) && std::isfinite(variance) && variance >= 0.0, ErrorKind::InvalidArgument,
            "normal jump law needs a finite mean and a non-negative variance");
    return JumpLaw{Family::Normal, mean, variance};
}

JumpLaw JumpLaw::point_mass(double z) {
    require(std::isfinite(z), ErrorKind::InvalidArgument, "point-mass jump must be finite");
    return JumpLaw{Family::PointMass, z, 0.0};
}

double h_moment(const JumpLaw& law) {
    switch (law.family) {
        case JumpLaw::Family::Normal: return std::expm1(law.mean + 0.5 * law.variance);
        case JumpLaw::Family::PointMass: return std::expm1(law.mean);
    }
    return 0.0;
}

ModelParams::ModelParams(double r, Vector mu, Vector sigma, Matrix rho, double lambda_common, Vector lambda_idio,
                         std::vector<JumpLaw> common_jump_law, std::vector<JumpLaw> idio_jump_law)
    : r_(r),
      mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      rho_(std::move(rho)),
      lambda_common_(lambda_common),
      lambda_idio_(std::move(lambda_idio)),
      common_law_(std::move(common_jump_law)),
      idio_law_(std::move(idio_jump_law)) {
    const Eigen::Index m = mu_.size();
    require(m >= 1, ErrorKind::InvalidArgument, "market needs at least one risky asset");
    require(std::isfinite(r_), ErrorKind::InvalidArgument, "risk-free rate must be finite");
    require(sigma_.size() == m && rho_.rows() == m && rho_.cols() == m && lambda_idio_.size() == m &&
                std::ssize(common_law_) == m && std::ssize(idio_law_) == m,
            ErrorKind::DimensionMismatch, "model parameter dimensions disagree");
    require(mu_.allFinite(), ErrorKind::InvalidArgument, "drifts must be finite");
    for (Eigen::Index j = 0; j < m; ++j) {
        require(std::isfinite(sigma_(j)) && sigma_(j) > 0.0, ErrorKind::InvalidArgument,
                "volatilities must be positive");
        require(lambda_idio_(j) >= 0.0, ErrorKind::InvalidArgument, "jump intensities must be non-negative");
        require(std::abs(rho_(j, j) - 1.0) <= 1e-12, ErrorKind::InvalidArgument,
                "correlation matrix needs a unit diagonal");
        for (Eigen::Index i = 0; i < m; ++i) {
            require(std::abs(rho_(i, j) - rho_(j, i)) <= 1e-12, ErrorKind::InvalidArgument,
                    "correlation matrix must be symmetric");
            require(rho_(i, j) >= -1.0 && rho_(i, j) <= 1.0, ErrorKind::InvalidArgument,
                    "correlations must lie in [-1, 1]");
        }
    }
    require(lambda_common_ >= 0.0 && std::isfinite(lambda_common_), ErrorKind::InvalidArgument,
            "common jump intensity must be non-negative");

    cov_ = sigma_.asDiagonal() * rho_ * sigma_.asDiagonal();
    cov_ = 0.5 * (cov_ + cov_.transpose());
    llt_.compute(cov_);
    require(llt_.info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
            "covariance matrix is not positive definite");

    h_.resize(m, 2);
    for (Eigen::Index j = 0; j < m; ++j) {
        h_(j, 0) = h_moment(common_law_[j]);
        h_(j, 1) = h_moment(idio_law_[j]);
        require(h_(j, 0) > -1.0 && h_(j, 1) > -1.0, ErrorKind::InvalidArgument, "jump moment h must exceed -1");
    }
    A_ = recompute_excess_drift();
}

ModelParams ModelParams::with_excess_drift(double r, const Vector& A, Vector sigma, Matrix rho, double lambda_common,
                                           Vector lambda_idio, std::vector<JumpLaw> common_jump_law,
                                           std::vector<JumpLaw> idio_jump_law) {
    require(std::ssize(common_jump_law) == A.size() && std::ssize(idio_jump_law) == A.size() &&
                lambda_idio.size() == A.size(),
            ErrorKind::DimensionMismatch, "model parameter dimensions disagree");
    Vector mu = A;
    for (Eigen::Index j = 0; j < A.size(); ++j)
        mu(j) += lambda_common * h_moment(common_jump_law[j]) + lambda_idio(j) * h_moment(idio_jump_law[j]);
    return ModelParams(r, std::move(mu), std::move(sigma), std::move(rho), lambda_common, std::move(lambda_idio),
                       std::move(common_jump_law), std::move(idio_jump_law));
}

ModelParams ModelParams::diffusion_only(double r, const Vector& A, Vector sigma, Matrix rho) {
    const auto m = static_cast<std::size_t>(A.size());
    return ModelParams(r, A, std::move(sigma), std::move(rho), 0.0, Vector::Zero(A.size()),
                       std::vector<JumpLaw>(m, JumpLaw::none()), std::vector<JumpLaw>(m, JumpLaw::none()));
}

Vector ModelParams::recompute_excess_drift() const {
    return mu_ - lambda_common_ * h_.col(0) - lambda_idio_.cwiseProduct(h_.col(1));
}

bool ModelParams::has_jumps() const { return lambda_common_ > 0.0 || (lambda_idio_.array() > 0.0).any(); }

}  // namespace dcaa
