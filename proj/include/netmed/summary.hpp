#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netmed/error.hpp"

namespace netmed {

/// Per-iteration parameter records, one row per iteration, named columns.
struct Trace {
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    Eigen::Index rows() const { return values.rows(); }

    Eigen::Index column(const std::string& name) const {
        const auto it = std::find(names.begin(), names.end(), name);
        require(it != names.end(), "trace has no column '" + name + "'");
        return static_cast<Eigen::Index>(it - names.begin());
    }

    bool has(const std::string& name) const { return std::find(names.begin(), names.end(), name) != names.end(); }

    /// Rows burn_in, burn_in + thin, ... of one column.
    std::vector<double> retained(const std::string& name, Eigen::Index burn_in = 0, Eigen::Index thin = 1) const {
        const auto c = column(name);
        std::vector<double> out;
        for (Eigen::Index r = burn_in; r < rows(); r += thin) out.push_back(values(r, c));
        return out;
    }
};

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> draws, double p) {
    require(!draws.empty(), "quantile of an empty sample");
    std::sort(draws.begin(), draws.end());
    const double h = (static_cast<double>(draws.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, draws.size() - 1);
    return draws[lo] + (h - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// Monte Carlo standard error of the mean by non-overlapping batch means
/// (about sqrt(n) batches).
inline double batch_means_mcse(std::span<const double> v) {
    const auto n = v.size();
    if (n < 4) return 0.0;
    const auto batch = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const auto n_batches = n / batch;
    std::vector<double> means(n_batches);
    for (std::size_t k = 0; k < n_batches; ++k) means[k] = mean_of(v.subspan(k * batch, batch));
    return std::sqrt(variance_of(means) / static_cast<double>(n_batches));
}

inline double effective_sample_size(std::span<const double> v) {
    const double mcse = batch_means_mcse(v);
    const double var = variance_of(v);
    if (mcse <= 0.0 || var <= 0.0) return static_cast<double>(v.size());
    return std::min(static_cast<double>(v.size()), var / (mcse * mcse));
}

/// Split-chain potential scale reduction: the draws are cut into two halves
/// treated as separate chains. Constant chains report 1.
inline double split_rhat(std::span<const double> v) {
    const auto half = v.size() / 2;
    if (half < 2) return 1.0;
    const auto first = v.subspan(0, half);
    const auto second = v.subspan(v.size() - half, half);
    const double w = 0.5 * (variance_of(first) + variance_of(second));
    if (w <= 0.0) return 1.0;
    const double m1 = mean_of(first), m2 = mean_of(second), m = 0.5 * (m1 + m2);
    const double n = static_cast<double>(half);
    const double b = n * ((m1 - m) * (m1 - m) + (m2 - m) * (m2 - m));
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

struct ParamSummary {
    double mean = 0.0;
    double sd = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double mcse = 0.0;
    double rhat = 1.0;
};

inline constexpr std::size_t kMinRetainedDraws = 100;

inline ParamSummary summarize_draws(const std::vector<double>& draws, double level = 0.95) {
    require(draws.size() >= kMinRetainedDraws,
            "insufficient retained draws: " + std::to_string(draws.size()) + " < " + std::to_string(kMinRetainedDraws));
    require(level > 0.0 && level < 1.0, "credible level must lie in (0, 1)");
    const double tail = 0.5 * (1.0 - level);
    ParamSummary s;
    s.mean = mean_of(draws);
    s.sd = std::sqrt(variance_of(draws));
    s.ci_lower = quantile(draws, tail);
    s.ci_upper = quantile(draws, 1.0 - tail);
    s.mcse = batch_means_mcse(draws);
    s.rhat = split_rhat(draws);
    return s;
}

struct PosteriorSummary {
    double level = 0.95;
    std::size_t n_retained = 0;
    std::vector<std::string> names;
    std::map<std::string, ParamSummary> params;

    const ParamSummary& operator[](const std::string& name) const {
        const auto it = params.find(name);
        require(it != params.end(), "summary has no parameter '" + name + "'");
        return it->second;
    }
};

/// Posterior mean and equal-tail interval of every column after discarding
/// `burn_in` rows.
inline PosteriorSummary summarize(const Trace& trace, Eigen::Index burn_in, double level = 0.95, Eigen::Index thin = 1) {
    require(burn_in >= 0 && thin >= 1, "summarize: invalid burn-in or thinning");
    require(trace.rows() > burn_in, "summarize: trace is not longer than the burn-in");
    PosteriorSummary out;
    out.level = level;
    out.names = trace.names;
    for (const auto& name : trace.names) {
        const auto draws = trace.retained(name, burn_in, thin);
        out.n_retained = draws.size();
        out.params[name] = summarize_draws(draws, level);
    }
    return out;
}

}  // namespace netmed
