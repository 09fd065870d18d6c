#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "netmed/lsm.hpp"
#include "netmed/netcore.hpp"

namespace netmed {

/// All-pairs hop counts by breadth-first search. Pairs in different components
/// get (largest finite distance + 1).
inline Eigen::MatrixXd geodesic_distances(const AdjacencyMatrix& net) {
    const auto n = static_cast<Eigen::Index>(net.n_actors());
    constexpr double unreached = -1.0;
    Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, unreached);
    std::vector<std::vector<Eigen::Index>> neighbours(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (net.edge(i, j)) neighbours[i].push_back(j);

    double max_finite = 0.0;
    std::queue<Eigen::Index> frontier;
    for (Eigen::Index s = 0; s < n; ++s) {
        dist(s, s) = 0.0;
        frontier.push(s);
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            for (auto v : neighbours[u]) {
                if (dist(s, v) != unreached) continue;
                dist(s, v) = dist(s, u) + 1.0;
                max_finite = std::max(max_finite, dist(s, v));
                frontier.push(v);
            }
        }
    }
    const double fill = max_finite + 1.0;
    dist = dist.unaryExpr([fill](double v) { return v == unreached ? fill : v; });
    return dist;
}

/// Classical (Torgerson) scaling: top `dim` eigenpairs of the double-centred
/// squared-distance matrix. Negative eigenvalues are truncated to zero.
inline LatentConfiguration classical_mds(const Eigen::MatrixXd& distances, Eigen::Index dim) {
    const auto n = distances.rows();
    const Eigen::MatrixXd sq = distances.array().square();
    const Eigen::MatrixXd centring =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    const Eigen::MatrixXd gram = -0.5 * centring * sq * centring;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    // Eigenvalues come in increasing order.
    LatentConfiguration z(n, dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        const auto k = n - 1 - d;
        z.col(d) = eig.eigenvectors().col(k) * std::sqrt(std::max(eig.eigenvalues()(k), 0.0));
    }
    return z;
}

struct ScaledStart {
    LatentConfiguration z;
    double alpha = 0.0;
    double log_likelihood = 0.0;
};

namespace detail {

/// Maximizes the dyad log-likelihood over alpha for fixed distances (concave, Newton).
inline double profile_alpha(const AdjacencyMatrix& net, const std::vector<double>& dists, double alpha,
                            double* log_lik) {
    const auto n = static_cast<Eigen::Index>(net.n_actors());
    for (int iter = 0; iter < 30; ++iter) {
        double grad = 0.0, hess = 0.0;
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
                const double p = inv_logit(alpha - dists[k]);
                grad += (net.edge(i, j) ? 1.0 : 0.0) - p;
                hess += p * (1.0 - p);
            }
        }
        const double step = grad / std::max(hess, 1e-12);
        alpha += std::clamp(step, -5.0, 5.0);
        if (std::abs(step) < 1e-8) break;
    }
    double ll = 0.0;
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j, ++k) ll += dyad_log_likelihood(net.edge(i, j), alpha - dists[k]);
    *log_lik = ll;
    return alpha;
}

}  // namespace detail

/// MDS of geodesic distances, rescaled so that (scale, alpha) maximize the
/// latent space likelihood. The scale search is a log-spaced grid refined by
/// golden section.
inline ScaledStart mds_start(const AdjacencyMatrix& net, Eigen::Index dim) {
    LatentConfiguration base = classical_mds(geodesic_distances(net), dim);
    base.rowwise() -= base.colwise().mean();
    const auto n = base.rows();
    std::vector<double> unit;
    unit.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) unit.push_back(row_distance(base, i, j));

    const double dens = std::clamp(density(net), 1e-3, 1.0 - 1e-3);
    double alpha_guess = std::log(dens / (1.0 - dens));
    auto evaluate = [&](double log_scale, double* alpha_out) {
        const double s = std::exp(log_scale);
        std::vector<double> scaled(unit.size());
        std::transform(unit.begin(), unit.end(), scaled.begin(), [s](double d) { return s * d; });
        double ll = 0.0;
        *alpha_out = detail::profile_alpha(net, scaled, alpha_guess, &ll);
        return ll;
    };

    constexpr int grid = 21;
    const double lo = std::log(0.05), hi = std::log(20.0);
    double best_ls = lo, best_ll = -std::numeric_limits<double>::infinity(), best_alpha = alpha_guess;
    for (int g = 0; g < grid; ++g) {
        const double ls = lo + (hi - lo) * g / (grid - 1);
        double a = 0.0;
        const double ll = evaluate(ls, &a);
        if (ll > best_ll) {
            best_ll = ll;
            best_ls = ls;
            best_alpha = a;
        }
    }
    alpha_guess = best_alpha;
    const double h = (hi - lo) / (grid - 1);
    double left = best_ls - h, right = best_ls + h;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 20; ++it) {
        const double m1 = right - phi * (right - left);
        const double m2 = left + phi * (right - left);
        double a1 = 0.0, a2 = 0.0;
        if (evaluate(m1, &a1) > evaluate(m2, &a2)) right = m2;
        else left = m1;
    }
    const double ls = 0.5 * (left + right);
    ScaledStart out;
    out.log_likelihood = evaluate(ls, &out.alpha);
    if (out.log_likelihood < best_ll) {
        out.log_likelihood = evaluate(best_ls, &out.alpha);
        out.z = std::exp(best_ls) * base;
    } else {
        out.z = std::exp(ls) * base;
    }
    return out;
}

}  // namespace netmed
