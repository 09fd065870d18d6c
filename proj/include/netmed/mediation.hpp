#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netmed/error.hpp"
#include "netmed/lsm.hpp"

namespace netmed {

/// Parameters of the latent space model plus the two mediation regressions:
///   z_i = i1 + a x_i + e1,   e1 ~ N(0, diag(sigma1_sq))
///   y_i = i2 + b'z_i + c' x_i + e2,   e2 ~ N(0, sigma2_sq)
///   logit P(m_ij = 1) = alpha - |z_i - z_j|
struct MediationParams {
    Eigen::VectorXd i1;
    double i2 = 0.0;
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    double c_prime = 0.0;
    double alpha = 0.0;
    Eigen::VectorXd sigma1_sq;
    double sigma2_sq = 1.0;

    static MediationParams zeros(Eigen::Index dim) {
        MediationParams p;
        p.i1 = Eigen::VectorXd::Zero(dim);
        p.a = Eigen::VectorXd::Zero(dim);
        p.b = Eigen::VectorXd::Zero(dim);
        p.sigma1_sq = Eigen::VectorXd::Ones(dim);
        return p;
    }

    Eigen::Index dim() const { return a.size(); }

    void validate() const {
        const auto d = a.size();
        require(d >= 1, "mediation parameters need at least one dimension");
        require(i1.size() == d && b.size() == d && sigma1_sq.size() == d, "mediation parameter vectors differ in length");
        require((sigma1_sq.array() > 0.0).all(), "mediator residual variances must be positive");
        require(sigma2_sq > 0.0, "outcome residual variance must be positive");
    }
};

/// Indirect, direct and total effect. `total` is always direct + med.
struct EffectEstimates {
    double med = 0.0;
    double direct = 0.0;
    double total = 0.0;
};

/// The network mediation effect a'b.
inline double mediation_effect(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    require(a.size() == b.size(), "mediation_effect: a and b differ in length");
    return a.dot(b);
}

inline double total_effect(double med, double c_prime) { return c_prime + med; }

inline EffectEstimates effects(const MediationParams& p) {
    const double med = mediation_effect(p.a, p.b);
    return {med, p.c_prime, total_effect(med, p.c_prime)};
}

/// Residual variance that gives a unit-variance mediator when X has unit variance.
inline double mediator_residual_variance(double a_d) {
    require(std::abs(a_d) < 1.0, "mediator path |a_d| must be < 1 for a positive residual variance");
    return 1.0 - a_d * a_d;
}

/// Residual variance that gives a unit-variance outcome:
/// 1 - (a'b + c')^2 - sum_d b_d^2 (1 - a_d^2).
inline double outcome_residual_variance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double c_prime) {
    require(a.size() == b.size(), "outcome_residual_variance: a and b differ in length");
    const double total = a.dot(b) + c_prime;
    double explained = total * total;
    for (Eigen::Index d = 0; d < a.size(); ++d) explained += b(d) * b(d) * (1.0 - a(d) * a(d));
    const double v = 1.0 - explained;
    if (!(v > 0.0)) {
        throw ValidationError("infeasible condition: outcome residual variance 1 - (a'b + c')^2 - sum b_d^2 (1 - a_d^2) = " +
                              std::to_string(v) + " is not positive");
    }
    return v;
}

inline double log_normal_pdf(double value, double mean, double variance) {
    const double r = value - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

/// Joint log-density of the mediator and (continuous) outcome equations given z.
inline double mediation_log_density(const MediationParams& p, std::span<const double> x, const LatentConfiguration& z,
                                    std::span<const double> y) {
    p.validate();
    const auto n = static_cast<Eigen::Index>(x.size());
    require(z.rows() == n && static_cast<Eigen::Index>(y.size()) == n, "mediation_log_density: length mismatch");
    require(z.cols() == p.dim(), "mediation_log_density: dimension mismatch");
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index d = 0; d < p.dim(); ++d)
            ll += log_normal_pdf(z(i, d), p.i1(d) + p.a(d) * x[i], p.sigma1_sq(d));
        ll += log_normal_pdf(y[i], p.i2 + z.row(i).dot(p.b) + p.c_prime * x[i], p.sigma2_sq);
    }
    return ll;
}

inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

/// P(Y = 1 | z_i, x_i) under the probit outcome model.
inline double probit_outcome_probability(const MediationParams& p, const Eigen::VectorXd& z_i, double x_i) {
    require(z_i.size() == p.b.size(), "probit_outcome_probability: dimension mismatch");
    return normal_cdf(p.i2 + p.b.dot(z_i) + p.c_prime * x_i);
}

}  // namespace netmed
