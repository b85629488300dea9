#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcaa/model.hpp"

namespace dcaa {

// Immutable sample of real outcomes with its sorted view.
class EmpiricalSample {
public:
    explicit EmpiricalSample(std::vector<double> values);

    template <class Derived>
    static EmpiricalSample from(const Eigen::DenseBase<Derived>& values) {
        return EmpiricalSample(std::vector<double>(values.derived().data(),
                                                   values.derived().data() + values.size()));
    }

    std::span<const double> values() const { return values_; }
    std::span<const double> sorted() const { return sorted_; }
    std::size_t size() const { return values_.size(); }

    EmpiricalSample negated() const;

private:
    std::vector<double> values_;
    std::vector<double> sorted_;
};

// 1-based rank ceil(p N) of the p-quantile order statistic. Products within a
// few ulps of an integer are snapped so grid-aligned levels land exactly.
std::size_t quantile_rank(std::size_t n, double p);

// Generalized inverse of the empirical cdf: inf{x : F(x) >= p}.
double var(const EmpiricalSample& sample, double p);

// E[X | X > VaR_p]. Throws ErrorKind::EmptyTail when nothing exceeds VaR_p.
double cvar(const EmpiricalSample& sample, double p);

// E[X | X < VaR_p]. Throws ErrorKind::EmptyTail when nothing lies below VaR_p.
double clvar(const EmpiricalSample& sample, double p);

// CVaR at level 1 - p of -W for W ~ Normal(mean, sd^2).
double gaussian_cvar_of_negative(double mean, double sd, double p);

using QuantileFunction = std::function<double(double)>;

// Row k is (F_1^{-1}(u_k), ..., F_n^{-1}(u_k)).
Matrix comonotonic_counterpart(std::span<const QuantileFunction> quantile_functions, std::span<const double> u_draws);

// Midpoint grid {(k - 1/2) / n}.
std::vector<double> midpoint_grid(std::size_t n);

}  // namespace dcaa
