#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "netmed/lsm.hpp"
#include "netmed/sampler.hpp"

namespace netmed {

/// Rotation/reflection R minimizing ||z R - reference|| for column-centred inputs.
inline Eigen::MatrixXd procrustes_rotation(const LatentConfiguration& z, const LatentConfiguration& reference) {
    const Eigen::MatrixXd cross = z.transpose() * reference;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

inline LatentConfiguration centred(const LatentConfiguration& z) {
    LatentConfiguration out = z;
    out.rowwise() -= z.colwise().mean();
    return out;
}

/// One row of the dimension sweep. Rates are in-sample.
struct DimensionFit {
    int dim = 0;
    bool ok = false;
    std::string error;
    PredictionRates rates;
    LsmFit fit;
};

struct DimensionSelection {
    std::optional<int> best_dim;
    std::vector<DimensionFit> table;
};

/// Fits the latent space model alone for one dimension and evaluates it at the
/// posterior mean configuration. Draws are Procrustes-aligned to the first
/// retained configuration before averaging, since positions are only defined up
/// to rotation, reflection and translation.
inline DimensionFit fit_dimension(const AdjacencyMatrix& net, int dim, const ChainConfig& cfg_in) {
    DimensionFit row;
    row.dim = dim;
    ChainConfig cfg = cfg_in;
    cfg.outcome = OutcomeModel::NetworkOnly;
    try {
        LatentConfiguration reference, sum;
        long count = 0;
        auto accumulate = [&](const ChainState& s) {
            LatentConfiguration zc = centred(s.z);
            if (count == 0) {
                reference = zc;
                sum = LatentConfiguration::Zero(zc.rows(), zc.cols());
            }
            sum += zc * procrustes_rotation(zc, reference);
            ++count;
        };
        const auto result = run_chain(net, ActorData{}, dim, cfg, PriorSpec{}, accumulate);
        row.fit.config = sum / static_cast<double>(count);
        row.fit.alpha = result.summary["alpha"].mean;
        row.fit.log_likelihood = network_log_likelihood(net, row.fit.config, row.fit.alpha);
        row.fit.bic = bic(row.fit, net);
        row.rates = prediction_rates(net, row.fit.config, row.fit.alpha);
        row.ok = true;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

/// Sweeps the candidate dimensions and returns the BIC minimizer (ties go to
/// the smaller dimension). A failing candidate is reported in its row and does
/// not stop the sweep.
inline DimensionSelection select_dimension(const AdjacencyMatrix& net, const std::vector<int>& candidates,
                                           const ChainConfig& cfg) {
    require(!candidates.empty(), "select_dimension: no candidate dimensions");
    for (int d : candidates)
        require(d >= 1 && static_cast<std::size_t>(d) < net.n_actors(),
                "candidate dimension " + std::to_string(d) + " must satisfy 1 <= D < N");
    DimensionSelection out;
    double best = std::numeric_limits<double>::infinity();
    for (int d : candidates) {
        out.table.push_back(fit_dimension(net, d, cfg));
        const auto& row = out.table.back();
        if (!row.ok) continue;
        if (row.fit.bic < best || (row.fit.bic == best && out.best_dim && d < *out.best_dim)) {
            best = row.fit.bic;
            out.best_dim = d;
        }
    }
    return out;
}

}  // namespace netmed
