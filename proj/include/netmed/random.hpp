#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace netmed {

/// Thin wrapper over a 64-bit Mersenne twister with the draws the samplers need.
///
/// Streams are derived from (seed, stream) pairs through std::seed_seq so that
/// e.g. the data generator and the MCMC chain of one replication never share
/// a sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x6e65746du};
        engine_.seed(seq);
    }

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    /// Gamma(shape, rate).
    double gamma(double shape, double rate) {
        std::gamma_distribution<double> g(shape, 1.0 / rate);
        return g(engine_);
    }

    /// Inverse-gamma(shape, rate): 1/X with X ~ Gamma(shape, rate).
    double inverse_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Standard normal conditioned on x >= lower.
    double std_normal_above(double lower) {
        if (lower <= 0.45) {
            for (;;) {
                const double x = normal();
                if (x >= lower) return x;
            }
        }
        // Exponential proposal with the optimal rate for the tail.
        const double lambda = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
        for (;;) {
            const double x = lower + exponential(lambda);
            const double u = uniform();
            if (u <= std::exp(-0.5 * (x - lambda) * (x - lambda))) return x;
        }
    }

    /// N(mean, 1) truncated to [0, inf) when positive, else (-inf, 0).
    double unit_normal_truncated_at_zero(double mean, bool positive) {
        if (positive) return mean + std_normal_above(-mean);
        return mean - std_normal_above(mean);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace netmed
