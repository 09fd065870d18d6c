#pragma once

#include <cmath>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "netmed/error.hpp"
#include "netmed/netcore.hpp"

namespace netmed {

/// N x D matrix of actor positions, one row per actor.
using LatentConfiguration = Eigen::MatrixXd;

inline void validate_configuration(const LatentConfiguration& z) {
    require(z.cols() >= 1, "latent configuration needs at least one dimension");
    require(z.cols() < z.rows(), "latent dimension must be smaller than the number of actors");
    require(z.allFinite(), "latent configuration has non-finite entries");
}

inline double euclidean_distance(std::span<const double> zi, std::span<const double> zj) {
    require(zi.size() == zj.size(), "euclidean_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t d = 0; d < zi.size(); ++d) {
        const double diff = zi[d] - zj[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline double row_distance(const LatentConfiguration& z, Eigen::Index i, Eigen::Index j) {
    return (z.row(i) - z.row(j)).norm();
}

/// log(1 + exp(t)) without overflow.
inline double log1p_exp(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// Logistic function without overflow.
inline double inv_logit(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double edge_probability(double alpha, double dist) {
    require(dist >= 0.0, "edge_probability: distance must be nonnegative");
    return inv_logit(alpha - dist);
}

/// Bernoulli log-pmf of one dyad with logit t = alpha - distance.
inline double dyad_log_likelihood(bool tie, double t) {
    return (tie ? t : 0.0) - log1p_exp(t);
}

/// Sum of dyad log-likelihoods over the upper triangle.
inline double network_log_likelihood(const AdjacencyMatrix& net, const LatentConfiguration& z, double alpha) {
    require(static_cast<std::size_t>(z.rows()) == net.n_actors(),
            "configuration has " + std::to_string(z.rows()) + " rows for " + std::to_string(net.n_actors()) +
                " actors");
    const auto n = static_cast<Eigen::Index>(net.n_actors());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            ll += dyad_log_likelihood(net.edge(i, j), alpha - row_distance(z, i, j));
    return ll;
}

/// In-sample classification rates. fpr/fnr are empty when the network has no
/// non-edges/edges respectively.
struct PredictionRates {
    std::optional<double> fpr;
    std::optional<double> fnr;
    double correct = 0.0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t n_dyads = 0;
};

inline PredictionRates prediction_rates(const AdjacencyMatrix& net, const LatentConfiguration& z, double alpha,
                                        double threshold = 0.5) {
    require(static_cast<std::size_t>(z.rows()) == net.n_actors(), "prediction_rates: dimension mismatch");
    const auto n = static_cast<Eigen::Index>(net.n_actors());
    std::size_t fp = 0, fn = 0, edges = 0, non_edges = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const bool predicted = edge_probability(alpha, row_distance(z, i, j)) > threshold;
            if (net.edge(i, j)) {
                ++edges;
                fn += !predicted;
            } else {
                ++non_edges;
                fp += predicted;
            }
        }
    }
    PredictionRates out;
    out.false_positives = fp;
    out.false_negatives = fn;
    out.n_dyads = edges + non_edges;
    if (non_edges > 0) out.fpr = static_cast<double>(fp) / static_cast<double>(non_edges);
    if (edges > 0) out.fnr = static_cast<double>(fn) / static_cast<double>(edges);
    out.correct = 1.0 - static_cast<double>(fp + fn) / static_cast<double>(out.n_dyads);
    return out;
}

struct LsmFit {
    LatentConfiguration config;
    double alpha = 0.0;
    double log_likelihood = 0.0;
    double bic = 0.0;
};

/// Free parameters of a D-dimensional fit: N*D positions plus the intercept.
inline double lsm_parameter_count(std::size_t n_actors, std::size_t dim) {
    return static_cast<double>(n_actors * dim + 1);
}

inline double bic(double log_likelihood, std::size_t n_actors, std::size_t dim) {
    const double n_dyads = static_cast<double>(n_actors * (n_actors - 1) / 2);
    return -2.0 * log_likelihood + lsm_parameter_count(n_actors, dim) * std::log(n_dyads);
}

inline double bic(const LsmFit& fit, const AdjacencyMatrix& net) {
    return bic(fit.log_likelihood, net.n_actors(), static_cast<std::size_t>(fit.config.cols()));
}

}  // namespace netmed
