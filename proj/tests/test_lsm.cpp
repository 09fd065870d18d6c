#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "netmed/dimension.hpp"
#include "netmed/lsm.hpp"
#include "netmed/random.hpp"
#include "netmed/simstudy.hpp"
#include "netmed/transforms.hpp"

using namespace netmed;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LatentConfiguration random_config(Eigen::Index n, Eigen::Index dim, Rng& rng) {
    LatentConfiguration z(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < dim; ++d) z(i, d) = rng.normal();
    return z;
}

AdjacencyMatrix random_network(std::size_t n, double p, Rng& rng) {
    std::vector<std::uint8_t> e(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) e[i * n + j] = e[j * n + i] = rng.bernoulli(p) ? 1 : 0;
    return {n, std::move(e)};
}

// Four tight clusters on the corners of a square: structure a line cannot hold.
// Six tight clusters of 20 on a circle of radius 3. Neighbouring clusters are
// tied often, including across the wrap-around, so no line layout reproduces
// the network. A looser two-dimensional picture (four clusters on a square) can
// be laid out on a line almost as well, which the N*D penalty then rewards.
AdjacencyMatrix planted_ring(std::uint64_t seed) {
    Rng rng(seed, 77);
    const int clusters = 6, per = 20;
    LatentConfiguration z(clusters * per, 2);
    for (int c = 0; c < clusters; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / clusters;
        for (int k = 0; k < per; ++k) {
            z(c * per + k, 0) = 3.0 * std::cos(angle) + 0.4 * rng.normal();
            z(c * per + k, 1) = 3.0 * std::sin(angle) + 0.4 * rng.normal();
        }
    }
    return sample_network(z, 2.0, rng);
}

}  // namespace

TEST_CASE("euclidean distance", "[lsm]") {
    const std::vector<double> origin{0.0, 0.0}, p{3.0, 4.0};
    CHECK(euclidean_distance(origin, origin) == 0.0);
    CHECK(euclidean_distance(origin, p) == 5.0);

    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> u(5), v(5);
        double ss = 0.0;
        for (int d = 0; d < 5; ++d) {
            u[d] = rng.normal();
            v[d] = rng.normal();
            ss += (u[d] - v[d]) * (u[d] - v[d]);
        }
        CHECK_THAT(euclidean_distance(u, v), WithinAbs(std::sqrt(ss), 1e-12));
    }
    CHECK_THROWS_AS(euclidean_distance(origin, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("edge probability", "[lsm]") {
    CHECK(edge_probability(0.0, 0.0) == 0.5);
    CHECK(edge_probability(2.0, 2.0) == 0.5);
    CHECK_THAT(edge_probability(0.0, std::log(3.0)), WithinAbs(0.25, 1e-15));
    CHECK_THROWS_AS(edge_probability(0.0, -1.0), ValidationError);
    // Stable far into both tails.
    CHECK(edge_probability(800.0, 0.0) == 1.0);
    CHECK(edge_probability(-800.0, 0.0) == 0.0);
}

TEST_CASE("edge probability is monotone in distance and alpha", "[lsm][property]") {
    Rng rng(3);
    for (int rep = 0; rep < 1000; ++rep) {
        const double alpha = rng.normal(0.0, 3.0);
        const double d = std::abs(rng.normal(0.0, 3.0));
        const double step = 1e-3 + rng.uniform();
        CHECK(edge_probability(alpha, d + step) < edge_probability(alpha, d));
        CHECK(edge_probability(alpha + step, d) > edge_probability(alpha, d));
    }
}

TEST_CASE("network log-likelihood", "[lsm]") {
    SECTION("single dyad at the midpoint") {
        const AdjacencyMatrix net(2, {0, 1, 1, 0});
        const LatentConfiguration z = LatentConfiguration::Zero(2, 1);
        CHECK_THAT(network_log_likelihood(net, z, 0.0), WithinAbs(std::log(0.5), 1e-15));
    }
    SECTION("saturation on an empty graph") {
        const AdjacencyMatrix net(3, std::vector<std::uint8_t>(9, 0));
        Rng rng(4);
        const double ll = network_log_likelihood(net, random_config(3, 2, rng), -30.0);
        CHECK(ll <= 0.0);
        CHECK(ll > -1e-9);
    }
    SECTION("brute force over all fifteen dyads") {
        Rng rng(6);
        for (int rep = 0; rep < 20; ++rep) {
            const auto net = random_network(6, 0.5, rng);
            const auto z = random_config(6, 2, rng);
            const double alpha = rng.normal();
            double oracle = 0.0;
            for (int i = 0; i < 6; ++i) {
                for (int j = i + 1; j < 6; ++j) {
                    const double dx = z(i, 0) - z(j, 0), dy = z(i, 1) - z(j, 1);
                    const double p = 1.0 / (1.0 + std::exp(-(alpha - std::sqrt(dx * dx + dy * dy))));
                    oracle += net.edge(i, j) ? std::log(p) : std::log(1.0 - p);
                }
            }
            CHECK_THAT(network_log_likelihood(net, z, alpha), WithinAbs(oracle, 1e-10));
        }
    }
}

TEST_CASE("log-likelihood is invariant under isometries", "[lsm][property]") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index dim = 1 + rep % 4;
        const auto net = random_network(15, 0.3, rng);
        const auto z = random_config(15, dim, rng);
        const double ll = network_log_likelihood(net, z, 0.5);
        const auto moved = apply_isometry(z, random_isometry(dim, rng, 5.0));
        CHECK_THAT(network_log_likelihood(net, moved, 0.5), WithinAbs(ll, 1e-10));
    }
}

TEST_CASE("prediction rates", "[lsm]") {
    SECTION("perfect separation") {
        // Two pairs far apart; ties only within pairs.
        const AdjacencyMatrix net(4, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
        LatentConfiguration z(4, 1);
        z << 0.0, 0.0, 100.0, 100.0;
        const double alpha = std::log(99.0);  // p = 0.99 at distance 0, ~0 across
        const auto r = prediction_rates(net, z, alpha);
        CHECK(*r.fpr == 0.0);
        CHECK(*r.fnr == 0.0);
        CHECK(r.correct == 1.0);
    }
    SECTION("everything below the threshold") {
        const AdjacencyMatrix net(3, {0, 1, 0, 1, 0, 1, 0, 1, 0});
        const LatentConfiguration z = LatentConfiguration::Zero(3, 2);
        const auto r = prediction_rates(net, z, std::log(0.4 / 0.6));
        CHECK(*r.fpr == 0.0);
        CHECK(*r.fnr == 1.0);
    }
    SECTION("a graph with no edges or no non-edges has no rate for that class") {
        const AdjacencyMatrix empty(3, std::vector<std::uint8_t>(9, 0));
        const auto z = LatentConfiguration::Zero(3, 1);
        CHECK_FALSE(prediction_rates(empty, z, 0.0).fnr.has_value());
        CHECK_FALSE(prediction_rates(empty.complement(), z, 0.0).fpr.has_value());
    }
}

TEST_CASE("prediction rates against an exhaustive confusion matrix", "[lsm][property]") {
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const auto net = random_network(8, 0.4, rng);
        const auto z = random_config(8, 2, rng);
        const double alpha = rng.normal(1.0, 1.0);
        int tp = 0, fp = 0, tn = 0, fn = 0;
        for (int i = 0; i < 8; ++i) {
            for (int j = i + 1; j < 8; ++j) {
                const double p = 1.0 / (1.0 + std::exp(-(alpha - (z.row(i) - z.row(j)).norm())));
                const bool pred = p > 0.5;
                const bool obs = net.edge(i, j);
                tp += obs && pred;
                fn += obs && !pred;
                fp += !obs && pred;
                tn += !obs && !pred;
            }
        }
        const auto r = prediction_rates(net, z, alpha);
        REQUIRE(r.n_dyads == 28);
        CHECK(r.false_positives == static_cast<std::size_t>(fp));
        CHECK(r.false_negatives == static_cast<std::size_t>(fn));
        if (fp + tn > 0) CHECK_THAT(*r.fpr, WithinAbs(static_cast<double>(fp) / (fp + tn), 1e-15));
        if (tp + fn > 0) CHECK_THAT(*r.fnr, WithinAbs(static_cast<double>(fn) / (tp + fn), 1e-15));
        CHECK_THAT(r.correct, WithinAbs(static_cast<double>(tp + tn) / 28.0, 1e-15));
        CHECK(r.correct == 1.0 - static_cast<double>(r.false_positives + r.false_negatives) / 28.0);
    }
}

TEST_CASE("BIC arithmetic", "[lsm]") {
    CHECK_THAT(bic(-10.0, 5, 1), WithinAbs(20.0 + 6.0 * std::log(10.0), 1e-12));
    CHECK_THAT(bic(-10.0, 5, 1), WithinAbs(33.8155, 1e-4));
    CHECK_THAT(bic(-10.0, 5, 2), WithinAbs(45.329, 1e-3));
    LsmFit fit;
    fit.config = LatentConfiguration::Zero(5, 2);
    fit.log_likelihood = -10.0;
    CHECK(bic(fit, AdjacencyMatrix(5, std::vector<std::uint8_t>(25, 0))) == bic(-10.0, 5, 2));
}

TEST_CASE("dimension selection with a single candidate", "[lsm][dimension]") {
    Rng rng(21);
    const auto net = random_network(20, 0.2, rng);
    ChainConfig cfg;
    cfg.n_iter = 600;
    cfg.burn_in = 200;
    const auto sel = select_dimension(net, {1}, cfg);
    REQUIRE(sel.best_dim);
    CHECK(*sel.best_dim == 1);
    REQUIRE(sel.table.size() == 1);
    CHECK(sel.table[0].ok);
    CHECK_THROWS_AS(select_dimension(net, {20}, cfg), ValidationError);
}

TEST_CASE("BIC recovers a planted two-dimensional structure", "[lsm][dimension][slow]") {
    ChainConfig cfg;
    cfg.n_iter = 3000;
    cfg.burn_in = 1000;
    int hits = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        cfg.seed = 100 + rep;
        const auto sel = select_dimension(planted_ring(rep), {1, 2, 3}, cfg);
        REQUIRE(sel.best_dim);
        hits += *sel.best_dim == 2;
    }
    INFO("argmin BIC = 2 in " << hits << " of 20");
    CHECK(hits >= 16);
}
