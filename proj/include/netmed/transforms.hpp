#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netmed/error.hpp"
#include "netmed/lsm.hpp"
#include "netmed/mediation.hpp"
#include "netmed/random.hpp"

namespace netmed {

/// z -> R z + t with R orthogonal (rotation when det R = 1, otherwise it includes a reflection).
struct Isometry {
    Eigen::MatrixXd rotation;
    Eigen::VectorXd translation;

    static Isometry identity(Eigen::Index dim) {
        return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
    }

    static Isometry translate(const Eigen::VectorXd& t) {
        return {Eigen::MatrixXd::Identity(t.size(), t.size()), t};
    }

    /// Reflection that flips the sign of coordinate `axis`.
    static Isometry reflect(Eigen::Index dim, Eigen::Index axis) {
        Isometry iso = identity(dim);
        iso.rotation(axis, axis) = -1.0;
        return iso;
    }

    Eigen::Index dim() const { return translation.size(); }

    void validate(double tol = 1e-10) const {
        require(rotation.rows() == rotation.cols() && rotation.rows() == translation.size(),
                "isometry: rotation and translation dimensions differ");
        const Eigen::MatrixXd gram = rotation.transpose() * rotation;
        require((gram - Eigen::MatrixXd::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= tol,
                "isometry: matrix is not orthogonal");
    }

    /// `this` applied after `first`.
    Isometry after(const Isometry& first) const {
        return {rotation * first.rotation, rotation * first.translation + translation};
    }
};

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs of
/// R's diagonal folded into Q.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index dim, Rng& rng) {
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

inline Isometry random_isometry(Eigen::Index dim, Rng& rng, double translation_sd = 1.0) {
    return {random_orthogonal(dim, rng), translation_sd * rng.normal_vector(dim)};
}

inline LatentConfiguration apply_isometry(const LatentConfiguration& z, const Isometry& iso) {
    require(z.cols() == iso.dim(), "apply_isometry: dimension mismatch");
    iso.validate();
    // Rows are positions, so z_i* = R z_i + t becomes Z R^t + 1 t^t.
    LatentConfiguration out = z * iso.rotation.transpose();
    out.rowwise() += iso.translation.transpose();
    return out;
}

struct PathEstimates {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    double c_prime = 0.0;

    double med() const { return a.dot(b); }
};

namespace detail {

inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                     const char* what) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) throw ValidationError(std::string("rank-deficient design in ") + what);
    return qr.solve(response);
}

}  // namespace detail

/// Ordinary least squares for the two mediation regressions: each z_d on (1, x),
/// and y on (1, z, x).
inline PathEstimates refit_paths(const LatentConfiguration& z, std::span<const double> x, std::span<const double> y) {
    const auto n = z.rows();
    const auto dim = z.cols();
    require(static_cast<Eigen::Index>(x.size()) == n && static_cast<Eigen::Index>(y.size()) == n,
            "refit_paths: length mismatch");
    require(n > dim + 2, "refit_paths: need more than D + 2 actors");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    Eigen::MatrixXd mediator_design(n, 2);
    mediator_design.col(0).setOnes();
    mediator_design.col(1) = xv;
    Eigen::MatrixXd outcome_design(n, dim + 2);
    outcome_design.col(0).setOnes();
    outcome_design.middleCols(1, dim) = z;
    outcome_design.col(dim + 1) = xv;

    PathEstimates out;
    out.a.resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d)
        out.a(d) = detail::least_squares(mediator_design, z.col(d), "mediator regression")(1);
    const Eigen::VectorXd coef = detail::least_squares(outcome_design, yv, "outcome regression");
    out.b = coef.segment(1, dim);
    out.c_prime = coef(dim + 1);
    return out;
}

struct InvarianceDelta {
    double med = 0.0;
    double direct = 0.0;
};

/// Change in the refitted mediation and direct effects when the configuration
/// is moved by `iso`.
inline InvarianceDelta invariance_check(const LatentConfiguration& z, std::span<const double> x,
                                        std::span<const double> y, const Isometry& iso) {
    const auto before = refit_paths(z, x, y);
    const auto after = refit_paths(apply_isometry(z, iso), x, y);
    return {std::abs(after.med() - before.med()), std::abs(after.c_prime - before.c_prime)};
}

struct InvarianceSweep {
    double max_delta_med = 0.0;
    double max_delta_direct = 0.0;
    long checks = 0;
};

/// Random (z, x, y) instances, each moved by random isometries (Haar rotation or
/// reflection plus a Gaussian translation); reports the largest effect changes.
inline InvarianceSweep invariance_sweep(int instances, int isometries_per_instance, Eigen::Index n, Eigen::Index dim,
                                        std::uint64_t seed, double translation_sd = 5.0) {
    require(instances >= 1 && isometries_per_instance >= 1, "invariance sweep needs at least one check");
    Rng rng(seed, 0x1503);
    InvarianceSweep out;
    for (int k = 0; k < instances; ++k) {
        LatentConfiguration z(n, dim);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index d = 0; d < dim; ++d) z(i, d) = rng.normal();
        std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        const Eigen::VectorXd b = rng.normal_vector(dim);
        const double c = rng.normal();
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = rng.normal();
            z.row(i) += 0.5 * x[i] * Eigen::RowVectorXd::Ones(dim);
            y[i] = z.row(i).dot(b) + c * x[i] + rng.normal();
        }
        for (int r = 0; r < isometries_per_instance; ++r) {
            const auto delta = invariance_check(z, x, y, random_isometry(dim, rng, translation_sd));
            out.max_delta_med = std::max(out.max_delta_med, delta.med);
            out.max_delta_direct = std::max(out.max_delta_direct, delta.direct);
            ++out.checks;
        }
    }
    return out;
}

}  // namespace netmed
