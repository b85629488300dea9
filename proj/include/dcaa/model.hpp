#pragma once

#include <cmath>
#include <concepts>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcaa/error.hpp"

namespace dcaa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Law of the log jump magnitude Z. Normal is the Merton choice; a point mass
// gives exact, noise-free unit tests.
struct JumpLaw {
    enum class Family { Normal, PointMass };

    Family family = Family::PointMass;
    double mean = 0.0;
    double variance = 0.0;

    static JumpLaw normal(double mean, double variance);
    static JumpLaw point_mass(double z);
    static JumpLaw none() { return point_mass(0.0); }

    template <class Rng>
    double sample(Rng& rng) const {
        if (family == Family::PointMass || variance == 0.0) return mean;
        std::normal_distribution<double> dist(mean, std::sqrt(variance));
        return dist(rng);
    }

    bool operator==(const JumpLaw&) const = default;
};

// h = E[e^Z] - 1.
double h_moment(const JumpLaw& law);

// Z* with e^{Z*} - 1 = x_j (e^z - 1). Throws ErrorKind::Ruin when the jump
// would take the position to non-positive wealth.
template <std::floating_point Scalar>
Scalar jump_size_transform(Scalar z, Scalar x_j) {
    const Scalar growth = Scalar(1) + x_j * std::expm1(z);
    if (!(growth > Scalar(0)))
        throw Error(ErrorKind::Ruin, "jump wipes out the position: 1 + x_j(e^z - 1) <= 0");
    return std::log(growth);
}

// E[e^{Z*}] = 1 + x_j h.
inline double scaled_mgf_at_one(double x_j, double h) {
    const double value = 1.0 + x_j * h;
    require(value > 0.0, ErrorKind::Ruin, "scaled jump MGF is non-positive: 1 + x_j h <= 0");
    return value;
}

/// Market of one risk-free and m risky assets following a Merton
/// jump-diffusion with one common and m idiosyncratic Poisson jump streams.
///
/// All rates are per rebalancing period. `mu` is the excess drift before the
/// jump compensator; `excess_drift()` is A = mu - lambda h0 - lambda_j h1.
class ModelParams {
public:
    ModelParams(double r, Vector mu, Vector sigma, Matrix rho, double lambda_common, Vector lambda_idio,
                std::vector<JumpLaw> common_jump_law, std::vector<JumpLaw> idio_jump_law);

    // Builds the market from the compensated excess drift A instead of mu.
    static ModelParams with_excess_drift(double r, const Vector& A, Vector sigma, Matrix rho,
                                         double lambda_common, Vector lambda_idio,
                                         std::vector<JumpLaw> common_jump_law,
                                         std::vector<JumpLaw> idio_jump_law);

    // Jump-free market.
    static ModelParams diffusion_only(double r, const Vector& A, Vector sigma, Matrix rho);

    Eigen::Index m() const { return mu_.size(); }
    double r() const { return r_; }
    const Vector& mu() const { return mu_; }
    const Vector& sigma() const { return sigma_; }
    const Matrix& rho() const { return rho_; }
    const Matrix& covariance() const { return cov_; }
    const Eigen::LLT<Matrix>& covariance_llt() const { return llt_; }
    double lambda_common() const { return lambda_common_; }
    const Vector& lambda_idio() const { return lambda_idio_; }
    const std::vector<JumpLaw>& common_jump_law() const { return common_law_; }
    const std::vector<JumpLaw>& idio_jump_law() const { return idio_law_; }
    // m x 2: column 0 common, column 1 idiosyncratic.
    const Matrix& h() const { return h_; }
    const Vector& excess_drift() const { return A_; }

    Vector recompute_excess_drift() const;
    bool has_jumps() const;

private:
    double r_;
    Vector mu_;
    Vector sigma_;
    Matrix rho_;
    Matrix cov_;
    Eigen::LLT<Matrix> llt_;
    double lambda_common_;
    Vector lambda_idio_;
    std::vector<JumpLaw> common_law_;
    std::vector<JumpLaw> idio_law_;
    Matrix h_;
    Vector A_;
};

template <class Derived>
void check_dimension(const ModelParams& params, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != params.m())
        throw Error(ErrorKind::DimensionMismatch,
                    "allocation has " + std::to_string(x.size()) + " entries, market has " +
                        std::to_string(params.m()));
}

// mu(x) = A'x + r.
template <class Derived>
typename Derived::Scalar portfolio_drift(const ModelParams& params, const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    check_dimension(params, x);
    return params.excess_drift().template cast<Scalar>().dot(x.derived()) + Scalar(params.r());
}

// sigma^2(x) = x' Sigma x.
template <class Derived>
typename Derived::Scalar portfolio_variance(const ModelParams& params, const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    check_dimension(params, x);
    return x.dot(params.covariance().template cast<Scalar>() * x.derived());
}

struct Allocation {
    Vector x;
    double cash_fraction = 1.0;
    double q = 0.0;
    Vector x_star;

    static Allocation along_ray(double q, const Vector& x_star) {
        Allocation a;
        a.q = q;
        a.x_star = x_star;
        a.x = q * x_star;
        a.cash_fraction = 1.0 - a.x.sum();
        return a;
    }
};

}  // namespace dcaa
