// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all ten
//   acceptance --only 4   run one

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "netmed/netmed.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace netmed;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

ChainConfig desk_chain() {
    ChainConfig cfg;
    cfg.n_iter = 5000;
    cfg.burn_in = 2000;
    return cfg;
}

SimReport run_desk_condition(const SimCondition& cond) {
    auto progress = [](const SimCondition& c, int done) {
        if (done % 10 == 0 || done == c.n_reps) std::cerr << "    " << c.key() << ": " << done << "/" << c.n_reps << "\n";
    };
    return run_condition(cond, desk_chain(), worker_count(), progress);
}

std::string describe(const SimReport& r, Target t) {
    const auto& agg = r.targets[static_cast<int>(t)];
    std::ostringstream s;
    s << target_name(t) << ": mean " << agg.mean_estimate << " (truth " << effect_of(r.truth, t) << "), rel bias "
      << agg.relative_bias_percent << "%, coverage " << agg.coverage_percent << "%, mean CI width "
      << agg.mean_ci_width;
    return s.str();
}

std::string failures(const SimReport& r) { return "failed replications " + std::to_string(r.n_failed); }

Outcome invariance() {
    const auto sweep = invariance_sweep(20, 1000, 50, 3, 1);
    std::ostringstream s;
    s << sweep.checks << " refits, max |dmed| " << sweep.max_delta_med << ", max |dc'| " << sweep.max_delta_direct;
    return {sweep.checks == 20000 && sweep.max_delta_med <= 1e-9 && sweep.max_delta_direct <= 1e-9, s.str()};
}

Outcome conjugate_oracle() {
    const auto rows = oracles::conjugate_check(2024);
    bool pass = true;
    std::ostringstream s;
    for (const auto& c : rows) {
        const bool required = c.name == "a_1" || c.name == "i1_1" || c.name == "sigma1_sq_1";
        if (required) pass = pass && c.standard_errors() <= 3.0;
        s << c.name << " " << c.sampled_mean << " vs " << c.oracle_mean << " (" << c.standard_errors() << " mcse"
          << (required ? "" : ", informational") << "); ";
    }
    return {pass, s.str()};
}

Outcome toy_posterior() {
    const auto t = oracles::toy_position_check(1000000, 100000, 17);
    std::ostringstream s;
    s << "TV " << t.total_variation << " over 100 bins; grid mean " << t.grid_mean << ", chain mean "
      << t.short_mean << " +/- " << t.short_mcse;
    return {t.total_variation <= 0.02, s.str()};
}

Outcome bias_reproduction() {
    const auto r = run_desk_condition({2, 300, 0.3481, 0.14, 50, 1});
    const double med = r.targets[static_cast<int>(Target::Med)].relative_bias_percent;
    const double tot = r.targets[static_cast<int>(Target::Total)].relative_bias_percent;
    return {std::abs(med) <= 10.0 && std::abs(tot) <= 10.0,
            describe(r, Target::Med) + "; " + describe(r, Target::Total) + "; " + failures(r)};
}

Outcome coverage_reproduction() {
    const auto r = run_desk_condition({2, 200, 0.1521, 0.14, 100, 1});
    const double cov = r.targets[static_cast<int>(Target::Med)].coverage_percent;
    return {cov >= 88.0 && cov <= 99.0, describe(r, Target::Med) + "; " + failures(r)};
}

Outcome null_coverage() {
    const auto r = run_desk_condition({2, 250, 0.0, 0.0, 50, 1});
    const double cov = r.targets[static_cast<int>(Target::Med)].coverage_percent;
    return {cov >= 96.0, describe(r, Target::Med) + "; " + failures(r)};
}

Outcome generator_geometry() {
    std::map<int, double> msd, dens;
    for (int dim : {2, 3}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto ds = generate_dataset({dim, 300, 0.1521, 0.14, 1, seed}, seed);
            double s = 0.0;
            const auto n = ds.z.rows();
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = i + 1; j < n; ++j) s += (ds.z.row(i) - ds.z.row(j)).squaredNorm();
            msd[dim] += s / static_cast<double>(n * (n - 1) / 2) / 20.0;
            dens[dim] += density(ds.net) / 20.0;
        }
    }
    const bool pass = std::abs(msd[2] / 4.0 - 1.0) <= 0.05 && std::abs(msd[3] / 6.0 - 1.0) <= 0.05 && dens[3] < dens[2];
    std::ostringstream s;
    s << "mean squared distance " << msd[2] << " (D=2, target 4), " << msd[3] << " (D=3, target 6); density "
      << dens[2] << " (D=2) > " << dens[3] << " (D=3)";
    return {pass, s.str()};
}

Outcome small_sample_direction() {
    const auto small = run_desk_condition({2, 50, 0.1521, 0.14, 30, 1});
    const auto large = run_desk_condition({2, 100, 0.1521, 0.14, 30, 1});
    const auto& s = small.targets[static_cast<int>(Target::Med)];
    const auto& l = large.targets[static_cast<int>(Target::Med)];
    std::ostringstream d;
    d << "N=50 width " << s.mean_ci_width << ", |bias| " << std::abs(s.relative_bias_percent) << "%; N=100 width "
      << l.mean_ci_width << ", |bias| " << std::abs(l.relative_bias_percent) << "%; failures "
      << small.n_failed << "/" << large.n_failed;
    return {s.mean_ci_width > l.mean_ci_width && std::abs(s.relative_bias_percent) > std::abs(l.relative_bias_percent),
            d.str()};
}

Outcome empirical_layout() {
    test_support::TempDir dir("replica");
    auto gen = test_support::run_cli({"generate", "--replica", "--seed", "162", "--quiet", "--out", dir.path().string()});
    if (gen.code != 0) return {false, "generate --replica failed: " + gen.err};
    const auto truth = Json::parse(read_file(dir.path() / "truth.json"));
    auto fit = test_support::run_cli({"fit", "--network", dir / "net.csv", "--actors", dir / "actors.csv", "--dim", "5",
                                      "--outcome", "binary", "--seed", "42", "--out", dir / "fit/fit.json"});
    if (fit.code != 0) return {false, "fit exited " + std::to_string(fit.code) + ": " + fit.err};
    const auto report = Json::parse(read_file(dir.path() / "fit/fit.json"));
    bool pass = true;
    std::ostringstream s;
    s << "density " << truth["density"].get<double>() << "; par est 2.5% 97.5%:";
    for (const char* p : {"c_prime", "med", "tot"}) {
        const double m = report[p]["mean"], lo = report[p]["ci_lower"], hi = report[p]["ci_upper"];
        pass = pass && std::isfinite(m) && std::isfinite(lo) && std::isfinite(hi) && lo <= m && m <= hi;
        s << " " << p << " " << m << " " << lo << " " << hi << ";";
    }
    pass = pass && std::abs(truth["density"].get<double>() - 0.162) < 0.02;
    return {pass, s.str()};
}

// Every command twice with the same arguments and output paths. All bytes
// must agree apart from the manifest's wall-clock duration. The second pass
// runs the simulation on two workers instead of one.
Outcome determinism() {
    namespace fs = std::filesystem;
    test_support::TempDir root("determinism");
    const auto base = root.path() / "run";
    auto snapshot = [&]() {
        std::map<std::string, std::string> out;
        for (const auto& e : fs::recursive_directory_iterator(base)) {
            if (!e.is_regular_file()) continue;
            auto text = read_file(e.path());
            if (e.path().filename() == "manifest.json") {
                auto j = Json::parse(text);
                j.erase("duration_seconds");
                text = j.dump();
            }
            out[fs::relative(e.path(), base).string()] = text;
        }
        return out;
    };
    auto run_all = [&](const std::string& threads) -> std::string {
        const auto dir = [&](const std::string& sub) { return (base / sub).string(); };
        std::vector<std::vector<std::string>> commands{
            {"generate", "--n", "60", "--med", ".1521", "--cprime", ".14", "--seed", "3", "--out", dir("gen")},
            {"fit", "--network", dir("gen") + "/net.csv", "--actors", dir("gen") + "/actors.csv", "--iters", "1500",
             "--burnin", "500", "--seed", "4", "--out", dir("fit") + "/fit.json", "--draws", dir("fit") + "/draws.csv"},
            {"summarize", "--draws", dir("fit") + "/draws.csv", "--level", "0.9", "--out", dir("sum") + "/summary.json"},
            {"select-dim", "--network", dir("gen") + "/net.csv", "--max-dim", "3", "--iters", "800", "--burnin", "300",
             "--seed", "5", "--out", dir("sel")},
            {"simulate", "--grid", root / "grid.json", "--reps", "4", "--iters", "500", "--burnin", "200", "--seed", "6",
             "--threads", threads, "--plot-data", "--out", dir("sim")},
            {"check-invariance", "--k", "200", "--instances", "4", "--seed", "7", "--out", dir("inv")},
        };
        for (auto& c : commands) {
            c.push_back("--quiet");
            const auto r = test_support::run_cli(c);
            if (r.code != 0) return c.front() + " exited " + std::to_string(r.code) + ": " + r.err;
        }
        return "";
    };
    write_file(root.path() / "grid.json", R"([{"D": 2, "n": 40, "med": 0.1521, "c_prime": 0.14}])");
    if (auto err = run_all("1"); !err.empty()) return {false, err};
    const auto first = snapshot();
    if (auto err = run_all("2"); !err.empty()) return {false, err};
    const auto second = snapshot();

    std::vector<std::string> differing;
    for (const auto& [name, text] : first)
        if (!second.count(name) || second.at(name) != text) differing.push_back(name);
    std::ostringstream s;
    s << first.size() << " files compared across reruns";
    if (!differing.empty()) {
        s << "; differing:";
        for (const auto& d : differing) s << " " << d;
    }
    return {differing.empty() && first.size() == second.size() && !first.empty(), s.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netmed acceptance suite"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"effect invariance under isometries", invariance},
        {"fixed-z conjugate oracle", conjugate_oracle},
        {"two-actor toy posterior", toy_posterior},
        {"bias at D=2, N=300, med=.3481", bias_reproduction},
        {"coverage at D=2, N=200, med=.1521", coverage_reproduction},
        {"null-mediation coverage at N=250", null_coverage},
        {"generator geometry", generator_geometry},
        {"small-N width and bias direction", small_sample_direction},
        {"162-actor binary replica report", empirical_layout},
        {"byte-identical reruns", determinism},
    };

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (only && id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d %s: %s [%.1f s] %s\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first, secs,
                    o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
