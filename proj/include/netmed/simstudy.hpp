#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "netmed/format.hpp"
#include "netmed/lsm.hpp"
#include "netmed/mediation.hpp"
#include "netmed/netcore.hpp"
#include "netmed/random.hpp"
#include "netmed/sampler.hpp"

namespace netmed {

/// One cell of the simulation design. The population paths are
/// a_d = b_d = sqrt(med_level / D), so a'b = med_level for every D.
struct SimCondition {
    int dim = 2;
    int n = 100;
    double med_level = 0.0;
    double c_prime = 0.0;
    int n_reps = 50;
    std::uint64_t base_seed = 1;

    double path_coefficient() const { return std::sqrt(med_level / static_cast<double>(dim)); }

    /// Generating parameters: zero intercepts and alpha, unit-variance mediators and outcome.
    MediationParams truth() const {
        require(dim >= 1, "condition dimension must be positive");
        require(med_level >= 0.0, "population mediation effect must be nonnegative");
        auto p = MediationParams::zeros(dim);
        p.a.setConstant(path_coefficient());
        p.b.setConstant(path_coefficient());
        p.c_prime = c_prime;
        for (Eigen::Index d = 0; d < dim; ++d) p.sigma1_sq(d) = mediator_residual_variance(p.a(d));
        p.sigma2_sq = outcome_residual_variance(p.a, p.b, c_prime);
        return p;
    }

    EffectEstimates true_effects() const { return effects(truth()); }

    std::string key() const {
        return "D=" + std::to_string(dim) + ",n=" + std::to_string(n) + ",med=" + format_double(med_level) +
               ",c_prime=" + format_double(c_prime);
    }
};

/// The 2 x 6 x 4 x 2 design over dimension, sample size, mediation effect and direct effect.
inline std::vector<SimCondition> full_design_grid(int n_reps = 500, std::uint64_t base_seed = 1) {
    std::vector<SimCondition> grid;
    for (int dim : {2, 3})
        for (int n : {50, 100, 150, 200, 250, 300})
            for (double med : {0.0, 0.0196, 0.1521, 0.3481})
                for (double cp : {0.0, 0.14}) {
                    SimCondition c{dim, n, med, cp, n_reps, base_seed};
                    (void)c.truth();  // throws on an infeasible cell
                    grid.push_back(c);
                }
    return grid;
}

inline constexpr std::uint64_t kGeneratorStream = 1;

struct SimDataset {
    AdjacencyMatrix net;
    ActorData data;
    MediationParams truth;
    LatentConfiguration z;
};

inline AdjacencyMatrix sample_network(const LatentConfiguration& z, double alpha, Rng& rng) {
    const auto n = static_cast<std::size_t>(z.rows());
    std::vector<std::uint8_t> entries(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool tie = rng.bernoulli(edge_probability(alpha, row_distance(z, i, j)));
            entries[i * n + j] = entries[j * n + i] = tie ? 1 : 0;
        }
    }
    return {n, std::move(entries)};
}

/// Draws X ~ N(0,1), then z and Y from the mediation equations; no network.
inline SimDataset generate_actors(const SimCondition& cond, Rng& rng) {
    require(cond.n >= 2, "condition sample size must be at least 2");
    const auto truth = cond.truth();
    const auto n = static_cast<Eigen::Index>(cond.n);
    const auto dim = truth.dim();

    SimDataset out;
    out.truth = truth;
    out.data.x.resize(n);
    out.data.y.resize(n);
    out.data.actor_ids = AdjacencyMatrix::default_labels(static_cast<std::size_t>(n));
    out.z.resize(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = rng.normal();
        out.data.x[i] = x;
        for (Eigen::Index d = 0; d < dim; ++d)
            out.z(i, d) = truth.i1(d) + truth.a(d) * x + std::sqrt(truth.sigma1_sq(d)) * rng.normal();
    }
    for (Eigen::Index i = 0; i < n; ++i)
        out.data.y[i] = truth.i2 + out.z.row(i).dot(truth.b) + truth.c_prime * out.data.x[i] +
                        std::sqrt(truth.sigma2_sq) * rng.normal();
    return out;
}

/// Full data set: actors as in generate_actors, ties from the latent space model.
inline SimDataset generate_dataset(const SimCondition& cond, std::uint64_t seed) {
    Rng rng(seed, kGeneratorStream);
    auto out = generate_actors(cond, rng);
    out.net = sample_network(out.z, out.truth.alpha, rng);
    return out;
}

/// Settings of the synthetic stand-in for the 162-student friendship data:
/// binary covariate, binary (probit) outcome, D = 5, alpha tuned to a target density.
struct ReplicaSpec {
    int n = 162;
    int dim = 5;
    int n_covariate_one = 72;
    double target_density = 0.162;
    double path_a = 0.3;
    double path_b = -0.3;
    double c_prime = -0.5;
    double outcome_intercept = -0.63;
};

/// Expected density of the latent space model for fixed positions.
inline double expected_density(const LatentConfiguration& z, double alpha) {
    const auto n = z.rows();
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) s += edge_probability(alpha, row_distance(z, i, j));
    return s / static_cast<double>(n * (n - 1) / 2);
}

inline SimDataset generate_replica(const ReplicaSpec& spec, std::uint64_t seed) {
    Rng rng(seed, kGeneratorStream);
    const auto n = static_cast<Eigen::Index>(spec.n);
    auto truth = MediationParams::zeros(spec.dim);
    truth.a.setConstant(spec.path_a);
    truth.b.setConstant(spec.path_b);
    truth.c_prime = spec.c_prime;
    truth.i2 = spec.outcome_intercept;
    truth.sigma2_sq = 1.0;

    SimDataset out;
    out.data.actor_ids = AdjacencyMatrix::default_labels(static_cast<std::size_t>(n));
    out.data.x.assign(n, 0.0);
    for (Eigen::Index i = 0; i < spec.n_covariate_one; ++i) out.data.x[i] = 1.0;
    std::shuffle(out.data.x.begin(), out.data.x.end(), rng.engine());
    out.z.resize(n, spec.dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < spec.dim; ++d)
            out.z(i, d) = truth.a(d) * out.data.x[i] + std::sqrt(truth.sigma1_sq(d)) * rng.normal();
    out.data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double latent = truth.i2 + out.z.row(i).dot(truth.b) + truth.c_prime * out.data.x[i] + rng.normal();
        out.data.y[i] = latent >= 0.0 ? 1.0 : 0.0;
    }
    double lo = -20.0, hi = 20.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected_density(out.z, mid) < spec.target_density ? lo : hi) = mid;
    }
    truth.alpha = 0.5 * (lo + hi);
    out.truth = truth;
    out.net = sample_network(out.z, truth.alpha, rng);
    return out;
}

inline double relative_bias(double mean_estimate, double truth) {
    if (truth != 0.0) return (mean_estimate - truth) / std::abs(truth) * 100.0;
    return (mean_estimate - truth) * 100.0;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline double coverage_rate(const std::vector<Interval>& intervals, double truth) {
    require(!intervals.empty(), "coverage_rate: no intervals");
    const auto covered = std::count_if(intervals.begin(), intervals.end(),
                                       [truth](const Interval& iv) { return iv.lo <= truth && truth <= iv.hi; });
    return 100.0 * static_cast<double>(covered) / static_cast<double>(intervals.size());
}

enum class Target { Med, Direct, Total };
inline constexpr Target kTargets[] = {Target::Med, Target::Direct, Target::Total};

inline const char* target_name(Target t) {
    switch (t) {
        case Target::Med: return "med";
        case Target::Direct: return "direct";
        case Target::Total: return "total";
    }
    return "?";
}

inline const char* trace_column(Target t) {
    switch (t) {
        case Target::Med: return "med";
        case Target::Direct: return "c_prime";
        case Target::Total: return "tot";
    }
    return "?";
}

inline double effect_of(const EffectEstimates& e, Target t) {
    switch (t) {
        case Target::Med: return e.med;
        case Target::Direct: return e.direct;
        case Target::Total: return e.total;
    }
    return 0.0;
}

struct ReplicationResult {
    int rep = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    ParamSummary estimates[3];  ///< Indexed by Target.
    double max_rhat = 1.0;
};

struct TargetAggregate {
    double mean_estimate = 0.0;
    double relative_bias_percent = 0.0;
    double coverage_percent = 0.0;
    double mean_ci_width = 0.0;
};

struct SimReport {
    SimCondition condition;
    EffectEstimates truth;
    std::vector<ReplicationResult> replications;
    TargetAggregate targets[3];
    int n_failed = 0;
};

inline ReplicationResult run_replication(const SimCondition& cond, int rep, const ChainConfig& chain_cfg) {
    ReplicationResult out;
    out.rep = rep;
    out.seed = cond.base_seed + static_cast<std::uint64_t>(rep);
    try {
        const auto ds = generate_dataset(cond, out.seed);
        ChainConfig cfg = chain_cfg;
        cfg.outcome = OutcomeModel::Continuous;
        // The chain draws from its own stream of the same seed (see Rng).
        cfg.seed = out.seed;
        const auto chain = run_chain(ds.net, ds.data, cond.dim, cfg);
        for (auto t : kTargets) out.estimates[static_cast<int>(t)] = chain.summary[trace_column(t)];
        for (const char* name : kMonitoredParams) out.max_rhat = std::max(out.max_rhat, chain.summary[name].rhat);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

/// Runs `count` independent jobs on up to `threads` workers. Results land in
/// index order whatever the completion order.
template <typename Result, typename Job>
std::vector<Result> parallel_map(int count, int threads, Job job) {
    std::vector<Result> results(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) results[static_cast<std::size_t>(i)] = job(i);
    };
    const int workers = std::clamp(threads, 1, std::max(count, 1));
    if (workers == 1) {
        worker();
        return results;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

inline SimReport aggregate(const SimCondition& cond, std::vector<ReplicationResult> reps) {
    SimReport report;
    report.condition = cond;
    report.truth = cond.true_effects();
    report.replications = std::move(reps);
    for (auto t : kTargets) {
        const double truth = effect_of(report.truth, t);
        std::vector<Interval> intervals;
        double sum = 0.0, width = 0.0;
        for (const auto& r : report.replications) {
            if (!r.ok) continue;
            const auto& e = r.estimates[static_cast<int>(t)];
            sum += e.mean;
            width += e.ci_upper - e.ci_lower;
            intervals.push_back({e.ci_lower, e.ci_upper});
        }
        auto& agg = report.targets[static_cast<int>(t)];
        if (intervals.empty()) {
            agg = {std::nan(""), std::nan(""), std::nan(""), std::nan("")};
            continue;
        }
        const double k = static_cast<double>(intervals.size());
        agg.mean_estimate = sum / k;
        agg.relative_bias_percent = relative_bias(agg.mean_estimate, truth);
        agg.coverage_percent = coverage_rate(intervals, truth);
        agg.mean_ci_width = width / k;
    }
    report.n_failed = static_cast<int>(
        std::count_if(report.replications.begin(), report.replications.end(), [](const auto& r) { return !r.ok; }));
    return report;
}

using ProgressCallback = std::function<void(const SimCondition&, int done)>;

inline SimReport run_condition(const SimCondition& cond, const ChainConfig& chain_cfg, int threads = 1,
                               const ProgressCallback& progress = {}) {
    require(cond.n_reps >= 1, "condition needs at least one replication");
    (void)cond.truth();
    std::mutex progress_mutex;
    std::atomic<int> done{0};
    auto reps = parallel_map<ReplicationResult>(cond.n_reps, threads, [&](int r) {
        auto res = run_replication(cond, r, chain_cfg);
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(cond, ++done);
        }
        return res;
    });
    return aggregate(cond, std::move(reps));
}

inline std::vector<SimReport> run_grid(const std::vector<SimCondition>& grid, const ChainConfig& chain_cfg,
                                       int threads = 1, const ProgressCallback& progress = {}) {
    require(!grid.empty(), "simulation grid is empty");
    std::vector<SimReport> out;
    out.reserve(grid.size());
    for (const auto& cond : grid) {
        try {
            out.push_back(run_condition(cond, chain_cfg, threads, progress));
        } catch (const std::exception& e) {
            // An invalid condition is reported as all replications failed.
            std::vector<ReplicationResult> failed(static_cast<std::size_t>(std::max(cond.n_reps, 0)));
            for (int r = 0; r < cond.n_reps; ++r) {
                failed[r].rep = r;
                failed[r].seed = cond.base_seed + static_cast<std::uint64_t>(r);
                failed[r].error = e.what();
            }
            SimReport report;
            report.condition = cond;
            report.replications = std::move(failed);
            report.n_failed = cond.n_reps;
            for (auto& agg : report.targets) agg = {std::nan(""), std::nan(""), std::nan(""), std::nan("")};
            out.push_back(std::move(report));
        }
    }
    return out;
}

/// Rough single-thread cost: one unit per dyad evaluation, ~1.5 N^2 per iteration.
inline double estimated_seconds(const std::vector<SimCondition>& grid, const ChainConfig& cfg, int threads,
                                double seconds_per_dyad_eval = 3.5e-8) {
    double evals = 0.0;
    for (const auto& c : grid)
        evals += static_cast<double>(c.n_reps) * cfg.n_iter * 1.5 * c.n * c.n * (1.0 + 0.1 * c.dim);
    return evals * seconds_per_dyad_eval / std::max(threads, 1);
}

namespace detail {

inline std::string condition_prefix(const SimCondition& c) {
    return std::to_string(c.dim) + "," + std::to_string(c.n) + "," + format_double(c.med_level) + "," +
           format_double(c.c_prime);
}

inline std::string csv_field(std::string s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else if (ch == '\n') out += ' ';
        else out += ch;
    }
    return out + "\"";
}

}  // namespace detail

inline std::string replications_csv(const std::vector<SimReport>& reports) {
    std::ostringstream out;
    out << csv_schema_line()
        << "D,n,med_true,c_prime,rep,seed,status,med_mean,med_lo,med_hi,direct_mean,direct_lo,direct_hi,"
           "total_mean,total_lo,total_hi,max_rhat,error\n";
    for (const auto& rep : reports) {
        for (const auto& r : rep.replications) {
            out << detail::condition_prefix(rep.condition) << ',' << r.rep << ',' << r.seed << ','
                << (r.ok ? "ok" : "failed");
            for (auto t : kTargets) {
                const auto& e = r.estimates[static_cast<int>(t)];
                if (r.ok) out << ',' << format_double(e.mean) << ',' << format_double(e.ci_lower) << ','
                              << format_double(e.ci_upper);
                else out << ",NA,NA,NA";
            }
            out << ',' << (r.ok ? format_double(r.max_rhat) : "NA") << ',' << detail::csv_field(r.error) << '\n';
        }
    }
    return out.str();
}

/// Long format, one row per (condition, target). With `clip`, relative bias is
/// clamped to +/-`clip` percent for plotting.
inline std::string aggregate_csv(const std::vector<SimReport>& reports, std::optional<double> clip = std::nullopt) {
    std::ostringstream out;
    out << csv_schema_line() << "D,n,med_true,c_prime,target,rel_bias,coverage,mean_ci_width,n_failed\n";
    for (const auto& rep : reports) {
        for (auto t : kTargets) {
            const auto& agg = rep.targets[static_cast<int>(t)];
            double bias = agg.relative_bias_percent;
            if (clip && std::isfinite(bias)) bias = std::clamp(bias, -*clip, *clip);
            out << detail::condition_prefix(rep.condition) << ',' << target_name(t) << ',' << format_double(bias)
                << ',' << format_double(agg.coverage_percent) << ',' << format_double(agg.mean_ci_width) << ','
                << rep.n_failed << '\n';
        }
    }
    return out.str();
}

}  // namespace netmed
