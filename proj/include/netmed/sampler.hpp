#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "netmed/error.hpp"
#include "netmed/lsm.hpp"
#include "netmed/mds.hpp"
#include "netmed/mediation.hpp"
#include "netmed/netcore.hpp"
#include "netmed/random.hpp"
#include "netmed/summary.hpp"

namespace netmed {

enum class OutcomeModel {
    Continuous,   ///< Gaussian outcome regression.
    Binary,       ///< Probit outcome through a latent Gaussian y* with unit variance.
    NetworkOnly,  ///< Latent space model alone; positions get a standard normal prior.
};

inline const char* to_string(OutcomeModel m) {
    switch (m) {
        case OutcomeModel::Continuous: return "continuous";
        case OutcomeModel::Binary: return "binary";
        case OutcomeModel::NetworkOnly: return "network-only";
    }
    return "?";
}

/// Normal(0, coef_sd^2) on every coefficient and intercept (alpha included);
/// inverse-gamma(ig_shape, ig_rate) on every residual variance.
struct PriorSpec {
    double coef_sd = 1000.0;
    double ig_shape = 0.001;
    double ig_rate = 0.001;

    void validate() const {
        require(coef_sd > 0.0 && ig_shape > 0.0 && ig_rate > 0.0, "prior hyperparameters must be positive");
    }
};

struct ChainConfig {
    int n_iter = 20000;
    int burn_in = 6000;
    int thin = 1;
    std::uint64_t seed = 42;
    OutcomeModel outcome = OutcomeModel::Continuous;

    double z_step = 0.5;      ///< Initial random-walk scale for every actor's position.
    double alpha_step = 0.1;  ///< Initial random-walk scale for alpha.
    bool adapt = true;
    int adapt_window = 50;
    double z_target = 0.30;
    double alpha_target = 0.44;

    /// Disables step 1 so positions stay at their initial values.
    bool update_positions = true;
    std::optional<LatentConfiguration> initial_positions;
    std::optional<MediationParams> initial_params;

    void validate() const {
        require(n_iter > 0 && burn_in > 0 && thin > 0, "chain lengths must be positive");
        require(burn_in < n_iter, "burn-in must be shorter than the chain");
        require(z_step > 0.0 && alpha_step > 0.0, "proposal scales must be positive");
        require(adapt_window > 0, "adaptation window must be positive");
        require(z_target > 0.0 && z_target < 1.0 && alpha_target > 0.0 && alpha_target < 1.0,
                "acceptance targets must lie in (0, 1)");
    }
};

/// Observed data in the layout the updates use.
struct Model {
    const AdjacencyMatrix* net = nullptr;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    OutcomeModel outcome = OutcomeModel::Continuous;
    PriorSpec priors;

    Model(const AdjacencyMatrix& network, const ActorData& data, OutcomeModel model, PriorSpec prior = {})
        : net(&network), outcome(model), priors(prior) {
        priors.validate();
        const auto n = network.n_actors();
        if (model == OutcomeModel::NetworkOnly && data.size() == 0) {
            x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            y = x;
            return;
        }
        data.validate(n, model == OutcomeModel::Binary);
        x = Eigen::Map<const Eigen::VectorXd>(data.x.data(), static_cast<Eigen::Index>(n));
        y = Eigen::Map<const Eigen::VectorXd>(data.y.data(), static_cast<Eigen::Index>(n));
        if (has_mediation()) {
            const double mean = x.mean();
            require((x.array() - mean).square().sum() > 0.0, "covariate X has zero variance");
        }
    }

    Eigen::Index n() const { return static_cast<Eigen::Index>(net->n_actors()); }
    bool has_mediation() const { return outcome != OutcomeModel::NetworkOnly; }
};

struct AcceptanceCounter {
    long accepted = 0;
    long proposed = 0;
    long window_accepted = 0;
    long window_proposed = 0;

    void record(bool ok) {
        ++proposed;
        ++window_proposed;
        accepted += ok;
        window_accepted += ok;
    }
    double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
    double window_rate() const {
        return window_proposed ? static_cast<double>(window_accepted) / static_cast<double>(window_proposed) : 0.0;
    }
    void reset_window() { window_accepted = window_proposed = 0; }
    void reset() { *this = {}; }
};

/// Everything that changes from one iteration to the next. `dist` and `dyad_ll`
/// cache pairwise distances and dyad log-likelihoods for the current z and
/// alpha; call refresh_cache after editing either directly.
struct ChainState {
    MediationParams params;
    LatentConfiguration z;
    Eigen::VectorXd y_star;
    long iteration = 0;

    Eigen::VectorXd z_scale;
    double alpha_scale = 0.1;
    std::vector<AcceptanceCounter> z_acceptance;
    AcceptanceCounter alpha_acceptance;

    Eigen::MatrixXd dist;
    Eigen::MatrixXd dyad_ll;

    void refresh_cache(const AdjacencyMatrix& net) {
        const auto n = z.rows();
        dist.setZero(n, n);
        dyad_ll.setZero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double d = row_distance(z, i, j);
                dist(i, j) = dist(j, i) = d;
                dyad_ll(i, j) = dyad_ll(j, i) = dyad_log_likelihood(net.edge(i, j), params.alpha - d);
            }
        }
    }

    double network_log_likelihood() const { return 0.5 * dyad_ll.sum(); }
};

namespace detail {

/// The response of the outcome regression: y, or y* in probit mode.
inline const Eigen::VectorXd& response(const ChainState& s, const Model& m) {
    return m.outcome == OutcomeModel::Binary ? s.y_star : m.y;
}

inline double prior_precision(const Model& m) { return 1.0 / (m.priors.coef_sd * m.priors.coef_sd); }

/// Draw from N(mean, 1/precision) for a scalar conjugate block with
/// likelihood precision `data_prec` and precision-weighted sum `data_sum`.
inline double conjugate_normal(double data_prec, double data_sum, const Model& m, Rng& rng) {
    const double prec = data_prec + prior_precision(m);
    return data_sum / prec + rng.normal() / std::sqrt(prec);
}

inline double actor_log_posterior(const ChainState& s, const Model& m, Eigen::Index i, const Eigen::RowVectorXd& zi,
                                  double network_part) {
    double lp = network_part;
    const auto& p = s.params;
    for (Eigen::Index d = 0; d < zi.size(); ++d) {
        const double r = zi(d) - p.i1(d) - p.a(d) * m.x(i);
        lp -= 0.5 * r * r / p.sigma1_sq(d);
    }
    if (m.has_mediation()) {
        const double r = response(s, m)(i) - p.i2 - zi.dot(p.b) - p.c_prime * m.x(i);
        lp -= 0.5 * r * r / p.sigma2_sq;
    }
    return lp;
}

}  // namespace detail

/// Random-walk Metropolis update of one actor's position.
inline bool update_actor_position(ChainState& s, const Model& m, Eigen::Index i, Rng& rng) {
    const auto n = m.n();
    const auto dim = s.z.cols();
    Eigen::RowVectorXd proposal = s.z.row(i);
    for (Eigen::Index d = 0; d < dim; ++d) proposal(d) += s.z_scale(i) * rng.normal();

    thread_local Eigen::VectorXd new_dist, new_ll;
    new_dist.resize(n);
    new_ll.resize(n);
    double net_new = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
            new_dist(j) = 0.0;
            new_ll(j) = 0.0;
            continue;
        }
        const double dd = (proposal - s.z.row(j)).norm();
        new_dist(j) = dd;
        new_ll(j) = dyad_log_likelihood(m.net->edge(i, j), s.params.alpha - dd);
        net_new += new_ll(j);
    }
    const double net_old = s.dyad_ll.col(i).sum();
    const double lp_new = detail::actor_log_posterior(s, m, i, proposal, net_new);
    const double lp_old = detail::actor_log_posterior(s, m, i, s.z.row(i), net_old);
    if (!std::isfinite(lp_old)) {
        throw NumericalError("non-finite log-posterior for actor " + std::to_string(i + 1) + " at iteration " +
                             std::to_string(s.iteration));
    }
    const double log_ratio = lp_new - lp_old;
    const bool accept = std::isfinite(log_ratio) && (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio);
    s.z_acceptance[static_cast<std::size_t>(i)].record(accept);
    if (accept) {
        s.z.row(i) = proposal;
        s.dist.row(i) = new_dist.transpose();
        s.dist.col(i) = new_dist;
        s.dyad_ll.row(i) = new_ll.transpose();
        s.dyad_ll.col(i) = new_ll;
    }
    return accept;
}

/// Step 1: one Metropolis update per actor, in index order.
inline void update_positions(ChainState& s, const Model& m, Rng& rng) {
    for (Eigen::Index i = 0; i < m.n(); ++i) update_actor_position(s, m, i, rng);
}

/// Step 2: mediator intercepts i1_d.
inline void update_mediator_intercepts(ChainState& s, const Model& m, Rng& rng) {
    auto& p = s.params;
    for (Eigen::Index d = 0; d < p.dim(); ++d) {
        const double v = p.sigma1_sq(d);
        const double sum = (s.z.col(d) - p.a(d) * m.x).sum();
        p.i1(d) = detail::conjugate_normal(static_cast<double>(m.n()) / v, sum / v, m, rng);
    }
}

/// Step 3: outcome intercept i2.
inline void update_outcome_intercept(ChainState& s, const Model& m, Rng& rng) {
    auto& p = s.params;
    const Eigen::VectorXd r = detail::response(s, m) - s.z * p.b - p.c_prime * m.x;
    p.i2 = detail::conjugate_normal(static_cast<double>(m.n()) / p.sigma2_sq, r.sum() / p.sigma2_sq, m, rng);
}

/// Step 4: random-walk Metropolis on alpha over all dyads.
inline bool update_alpha(ChainState& s, const Model& m, Rng& rng) {
    const auto n = m.n();
    const double proposal = s.params.alpha + s.alpha_scale * rng.normal();
    thread_local Eigen::MatrixXd scratch;
    scratch.setZero(n, n);
    double ll_new = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            const double v = dyad_log_likelihood(m.net->edge(i, j), proposal - s.dist(i, j));
            scratch(i, j) = v;
            ll_new += v;
        }
    }
    const double prec = detail::prior_precision(m);
    const double log_ratio = ll_new - s.network_log_likelihood() -
                             0.5 * prec * (proposal * proposal - s.params.alpha * s.params.alpha);
    const bool accept = std::isfinite(log_ratio) && (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio);
    s.alpha_acceptance.record(accept);
    if (accept) {
        s.params.alpha = proposal;
        s.dyad_ll = scratch.triangularView<Eigen::StrictlyUpper>();
        s.dyad_ll.triangularView<Eigen::StrictlyLower>() = scratch.transpose();
    }
    return accept;
}

/// Step 5: mediator slopes a_d.
inline void update_mediator_slopes(ChainState& s, const Model& m, Rng& rng) {
    auto& p = s.params;
    const double sxx = m.x.squaredNorm();
    for (Eigen::Index d = 0; d < p.dim(); ++d) {
        const double v = p.sigma1_sq(d);
        const double sxz = m.x.dot((s.z.col(d).array() - p.i1(d)).matrix());
        p.a(d) = detail::conjugate_normal(sxx / v, sxz / v, m, rng);
    }
}

/// Step 6: outcome slopes b, drawn jointly from their multivariate normal conditional.
inline void update_outcome_slopes(ChainState& s, const Model& m, Rng& rng) {
    auto& p = s.params;
    const auto dim = p.dim();
    const Eigen::VectorXd r = (detail::response(s, m).array() - p.i2).matrix() - p.c_prime * m.x;
    Eigen::MatrixXd prec = s.z.transpose() * s.z / p.sigma2_sq;
    prec.diagonal().array() += detail::prior_precision(m);
    const Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericalError("outcome slope precision is not positive definite");
    const Eigen::VectorXd mean = llt.solve(s.z.transpose() * r / p.sigma2_sq);
    // prec = L L^t, so L^{-t} e has covariance prec^{-1}.
    const Eigen::VectorXd e = rng.normal_vector(dim);
    p.b = mean + llt.matrixU().solve(e);
}

/// Step 7: direct effect c'.
inline void update_direct_effect(ChainState& s, const Model& m, Rng& rng) {
    auto& p = s.params;
    const Eigen::VectorXd r = (detail::response(s, m).array() - p.i2).matrix() - s.z * p.b;
    p.c_prime = detail::conjugate_normal(m.x.squaredNorm() / p.sigma2_sq, m.x.dot(r) / p.sigma2_sq, m, rng);
}

/// Steps 2, 3, 5, 6, 7 in order: the conjugate normal blocks given z and the variances.
inline void update_regression_blocks(ChainState& s, const Model& m, Rng& rng) {
    update_mediator_intercepts(s, m, rng);
    update_outcome_intercept(s, m, rng);
    update_mediator_slopes(s, m, rng);
    update_outcome_slopes(s, m, rng);
    update_direct_effect(s, m, rng);
}

/// Step 8: inverse-gamma draws for each mediator residual variance.
inline void update_mediator_variances(ChainState& s, const Model& m, Rng& rng) {
    auto& p = s.params;
    const double shape = m.priors.ig_shape + 0.5 * static_cast<double>(m.n());
    for (Eigen::Index d = 0; d < p.dim(); ++d) {
        const double ssr = ((s.z.col(d).array() - p.i1(d)) - p.a(d) * m.x.array()).square().sum();
        p.sigma1_sq(d) = rng.inverse_gamma(shape, m.priors.ig_rate + 0.5 * ssr);
    }
}

/// Step 9: inverse-gamma draw for the outcome residual variance. Skipped in
/// probit mode, where the variance is fixed at 1.
inline void update_outcome_variance(ChainState& s, const Model& m, Rng& rng) {
    if (m.outcome != OutcomeModel::Continuous) return;
    auto& p = s.params;
    const double shape = m.priors.ig_shape + 0.5 * static_cast<double>(m.n());
    const double ssr = ((detail::response(s, m) - s.z * p.b - p.c_prime * m.x).array() - p.i2).square().sum();
    p.sigma2_sq = rng.inverse_gamma(shape, m.priors.ig_rate + 0.5 * ssr);
}

inline void update_variances(ChainState& s, const Model& m, Rng& rng) {
    update_mediator_variances(s, m, rng);
    update_outcome_variance(s, m, rng);
}

/// Probit augmentation: y*_i ~ N(linear predictor, 1) truncated to the side of
/// zero given by y_i.
inline void update_latent_outcomes(ChainState& s, const Model& m, Rng& rng) {
    require(m.outcome == OutcomeModel::Binary, "latent outcomes exist only for binary outcomes");
    const auto& p = s.params;
    for (Eigen::Index i = 0; i < m.n(); ++i) {
        const double mean = p.i2 + s.z.row(i).dot(p.b) + p.c_prime * m.x(i);
        s.y_star(i) = rng.unit_normal_truncated_at_zero(mean, m.y(i) == 1.0);
    }
}

/// Moves each proposal scale toward its acceptance target using the rate over
/// the window just finished: scale *= exp(rate - target).
inline void adapt_step_sizes(ChainState& s, double z_target, double alpha_target) {
    for (std::size_t i = 0; i < s.z_acceptance.size(); ++i) {
        auto& c = s.z_acceptance[i];
        if (c.window_proposed > 0) s.z_scale(static_cast<Eigen::Index>(i)) *= std::exp(c.window_rate() - z_target);
        c.reset_window();
    }
    if (s.alpha_acceptance.window_proposed > 0)
        s.alpha_scale *= std::exp(s.alpha_acceptance.window_rate() - alpha_target);
    s.alpha_acceptance.reset_window();
}

/// Builds the starting state: positions by scaled classical MDS of geodesic
/// distances (unless given), alpha by maximum likelihood given those positions,
/// regression blocks by least squares, variances by residual variances.
inline ChainState initialize_chain(const Model& m, Eigen::Index dim, const ChainConfig& cfg) {
    const auto n = m.n();
    require(dim >= 1 && dim < n, "latent dimension must satisfy 1 <= D < N (got D=" + std::to_string(dim) +
                                     ", N=" + std::to_string(n) + ")");
    ChainState s;
    if (cfg.initial_positions) {
        require(cfg.initial_positions->rows() == n && cfg.initial_positions->cols() == dim,
                "initial positions have the wrong shape");
        s.z = *cfg.initial_positions;
        std::vector<double> dists;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back(row_distance(s.z, i, j));
        double ll = 0.0;
        s.params.alpha = detail::profile_alpha(*m.net, dists, 0.0, &ll);
    } else {
        auto start = mds_start(*m.net, dim);
        s.z = std::move(start.z);
        s.params.alpha = start.alpha;
    }
    validate_configuration(s.z);

    const double alpha = s.params.alpha;
    s.params = MediationParams::zeros(dim);
    s.params.alpha = alpha;
    s.y_star = Eigen::VectorXd::Zero(n);
    if (m.outcome == OutcomeModel::Binary) s.y_star = (m.y.array() * 2.0 - 1.0) * 0.5;

    if (cfg.initial_params) {
        s.params = *cfg.initial_params;
        s.params.validate();
        require(s.params.dim() == dim, "initial parameters have the wrong dimension");
        if (!m.has_mediation()) {
            s.params.i1.setZero();
            s.params.a.setZero();
            s.params.b.setZero();
            s.params.sigma1_sq.setOnes();
        }
    } else if (m.has_mediation()) {
        Eigen::MatrixXd med_design(n, 2);
        med_design.col(0).setOnes();
        med_design.col(1) = m.x;
        const Eigen::MatrixXd med_coef = med_design.colPivHouseholderQr().solve(s.z);
        const Eigen::MatrixXd med_resid = s.z - med_design * med_coef;
        for (Eigen::Index d = 0; d < dim; ++d) {
            s.params.i1(d) = med_coef(0, d);
            s.params.a(d) = med_coef(1, d);
            s.params.sigma1_sq(d) = std::max(med_resid.col(d).squaredNorm() / static_cast<double>(n), 1e-3);
        }
        Eigen::MatrixXd out_design(n, dim + 2);
        out_design.col(0).setOnes();
        out_design.middleCols(1, dim) = s.z;
        out_design.col(dim + 1) = m.x;
        const Eigen::VectorXd& resp = detail::response(s, m);
        const Eigen::VectorXd coef = out_design.colPivHouseholderQr().solve(resp);
        s.params.i2 = coef(0);
        s.params.b = coef.segment(1, dim);
        s.params.c_prime = coef(dim + 1);
        if (m.outcome == OutcomeModel::Continuous)
            s.params.sigma2_sq = std::max((resp - out_design * coef).squaredNorm() / static_cast<double>(n), 1e-3);
    }
    if (m.outcome != OutcomeModel::Continuous) s.params.sigma2_sq = 1.0;
    if (!s.params.i1.allFinite() || !s.params.a.allFinite() || !s.params.b.allFinite() ||
        !std::isfinite(s.params.i2) || !std::isfinite(s.params.c_prime)) {
        throw NumericalError("non-finite starting values");
    }

    s.z_scale = Eigen::VectorXd::Constant(n, cfg.z_step);
    s.alpha_scale = cfg.alpha_step;
    s.z_acceptance.assign(static_cast<std::size_t>(n), {});
    s.refresh_cache(*m.net);
    return s;
}

/// One full iteration in the fixed order: positions, i1, i2, alpha, a, b, c',
/// mediator variances, outcome variance. In probit mode the latent outcomes are
/// refreshed first.
inline void gibbs_sweep(ChainState& s, const Model& m, bool move_positions, Rng& rng) {
    if (m.outcome == OutcomeModel::Binary) update_latent_outcomes(s, m, rng);
    if (move_positions) update_positions(s, m, rng);
    if (m.has_mediation()) {
        update_mediator_intercepts(s, m, rng);
        update_outcome_intercept(s, m, rng);
    }
    update_alpha(s, m, rng);
    if (m.has_mediation()) {
        update_mediator_slopes(s, m, rng);
        update_outcome_slopes(s, m, rng);
        update_direct_effect(s, m, rng);
        update_variances(s, m, rng);
    }
    ++s.iteration;
}

inline std::vector<std::string> trace_columns(Eigen::Index dim) {
    std::vector<std::string> names;
    auto indexed = [&](const char* base) {
        for (Eigen::Index d = 1; d <= dim; ++d) names.push_back(std::string(base) + "_" + std::to_string(d));
    };
    indexed("i1");
    names.push_back("i2");
    indexed("a");
    indexed("b");
    names.push_back("c_prime");
    names.push_back("alpha");
    indexed("sigma1_sq");
    names.push_back("sigma2_sq");
    names.push_back("med");
    names.push_back("tot");
    names.push_back("loglik_net");
    return names;
}

template <typename Row>
void record_row(const ChainState& s, Row&& row) {
    const auto& p = s.params;
    const auto dim = p.dim();
    Eigen::Index c = 0;
    for (Eigen::Index d = 0; d < dim; ++d) row(c++) = p.i1(d);
    row(c++) = p.i2;
    for (Eigen::Index d = 0; d < dim; ++d) row(c++) = p.a(d);
    for (Eigen::Index d = 0; d < dim; ++d) row(c++) = p.b(d);
    row(c++) = p.c_prime;
    row(c++) = p.alpha;
    for (Eigen::Index d = 0; d < dim; ++d) row(c++) = p.sigma1_sq(d);
    row(c++) = p.sigma2_sq;
    const double med = mediation_effect(p.a, p.b);
    row(c++) = med;
    row(c++) = total_effect(med, p.c_prime);
    row(c++) = s.network_log_likelihood();
}

struct ChainDiagnostics {
    double z_acceptance_mean = 0.0;  ///< Mean over actors, retained iterations only.
    double z_acceptance_min = 0.0;
    double alpha_acceptance = 0.0;
    Eigen::VectorXd z_scale;  ///< Frozen scales used after burn-in.
    double alpha_scale = 0.0;
    std::vector<std::string> warnings;
};

struct ChainResult {
    Trace trace;  ///< Every iteration, burn-in included.
    PosteriorSummary summary;
    ChainDiagnostics diagnostics;
    ChainState final_state;
    int burn_in = 0;
    int thin = 1;
};

/// Called after every retained (post burn-in, thinned) iteration.
using IterationCallback = std::function<void(const ChainState&)>;

inline constexpr const char* kMonitoredParams[] = {"med", "c_prime", "tot", "alpha", "loglik_net"};

inline ChainResult run_chain(const AdjacencyMatrix& net, const ActorData& data, Eigen::Index dim,
                             const ChainConfig& cfg, const PriorSpec& priors = {},
                             const IterationCallback& on_retained = {}) {
    cfg.validate();
    const Model model(net, data, cfg.outcome, priors);
    Rng rng(cfg.seed, 0x5eed);
    ChainState s = initialize_chain(model, dim, cfg);

    ChainResult result;
    result.burn_in = cfg.burn_in;
    result.thin = cfg.thin;
    result.trace.names = trace_columns(dim);
    result.trace.values.resize(cfg.n_iter, static_cast<Eigen::Index>(result.trace.names.size()));

    for (int it = 0; it < cfg.n_iter; ++it) {
        gibbs_sweep(s, model, cfg.update_positions, rng);
        auto row = result.trace.values.row(it);
        record_row(s, row);
        if (!row.allFinite() || (s.params.sigma1_sq.array() <= 0.0).any() || !(s.params.sigma2_sq > 0.0)) {
            throw NumericalError("invalid parameter values at iteration " + std::to_string(it + 1));
        }
        if (it < cfg.burn_in) {
            if (cfg.adapt && (it + 1) % cfg.adapt_window == 0) adapt_step_sizes(s, cfg.z_target, cfg.alpha_target);
            if (it + 1 == cfg.burn_in) {
                for (auto& c : s.z_acceptance) c.reset();
                s.alpha_acceptance.reset();
                result.diagnostics.z_scale = s.z_scale;
                result.diagnostics.alpha_scale = s.alpha_scale;
            }
        } else if (on_retained && (it - cfg.burn_in) % cfg.thin == 0) {
            on_retained(s);
        }
    }

    result.summary = summarize(result.trace, cfg.burn_in, 0.95, cfg.thin);
    auto& diag = result.diagnostics;
    diag.alpha_acceptance = s.alpha_acceptance.rate();
    if (cfg.update_positions) {
        double total = 0.0, lowest = 1.0;
        for (const auto& c : s.z_acceptance) {
            total += c.rate();
            lowest = std::min(lowest, c.rate());
        }
        diag.z_acceptance_mean = total / static_cast<double>(s.z_acceptance.size());
        diag.z_acceptance_min = lowest;
        if (lowest == 0.0) diag.warnings.push_back("some actor position blocks accepted no proposals after burn-in");
    }
    if (diag.alpha_acceptance == 0.0) diag.warnings.push_back("alpha block accepted no proposals after burn-in");
    for (const char* name : kMonitoredParams) {
        const auto& ps = result.summary[name];
        if (ps.rhat > 1.1) diag.warnings.push_back(std::string("split R-hat for ") + name + " is " + std::to_string(ps.rhat));
    }
    result.final_state = std::move(s);
    return result;
}

}  // namespace netmed
