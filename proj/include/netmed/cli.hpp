#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netmed/dimension.hpp"
#include "netmed/error.hpp"
#include "netmed/io.hpp"
#include "netmed/netcore.hpp"
#include "netmed/sampler.hpp"
#include "netmed/simstudy.hpp"
#include "netmed/transforms.hpp"

namespace netmed::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kThreshold = 3 };

struct GlobalOptions {
    std::uint64_t seed = 42;
    std::string out;
    int threads = 0;
    bool quiet = false;

    int worker_count() const {
        if (threads > 0) return threads;
        return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct GenerateOptions {
    int dim = 2;
    int n = 100;
    double med = 0.0;
    double c_prime = 0.0;
    bool replica = false;
};

inline int cmd_generate(const GenerateOptions& o, const GlobalOptions& g, std::ostream& log) {
    Stopwatch clock;
    require(!g.out.empty(), "generate: --out directory is required");
    const fs::path dir = g.out;
    SimDataset ds;
    Json condition;
    if (o.replica) {
        ReplicaSpec spec;
        ds = generate_replica(spec, g.seed);
        condition = {{"replica", true}, {"n", spec.n}, {"D", spec.dim}, {"target_density", spec.target_density}};
    } else {
        SimCondition cond{o.dim, o.n, o.med, o.c_prime, 1, g.seed};
        ds = generate_dataset(cond, g.seed);
        condition = {{"D", o.dim}, {"n", o.n}, {"med", o.med}, {"c_prime", o.c_prime}};
    }
    write_file(dir / "net.csv", write_matrix(ds.net));
    write_file(dir / "actors.csv", write_actors(ds.data));
    Json truth{{"schema_version", kSchemaVersion},
               {"condition", condition},
               {"params", params_to_json(ds.truth)},
               {"effects", effects_to_json(effects(ds.truth))},
               {"density", density(ds.net)}};
    write_file(dir / "truth.json", truth.dump(2) + "\n");
    RunManifest manifest{"generate", condition, g.seed, {}, clock.seconds()};
    manifest.write(dir);
    if (!g.quiet) log << "wrote " << (dir / "net.csv").string() << ", actors.csv, truth.json (density " << density(ds.net) << ")\n";
    return kOk;
}

struct NetworkInput {
    std::string path;
    std::string format = "auto";
    std::string symmetrize;
};

inline std::optional<SymmetrizeRule> parse_symmetrize(const std::string& rule) {
    if (rule.empty()) return std::nullopt;
    if (rule == "max") return SymmetrizeRule::Max;
    if (rule == "min") return SymmetrizeRule::Min;
    throw ValidationError("--symmetrize must be max or min");
}

inline NetworkFormat parse_format(const std::string& f) {
    if (f == "auto") return NetworkFormat::Auto;
    if (f == "matrix") return NetworkFormat::Matrix;
    if (f == "edgelist") return NetworkFormat::EdgeList;
    throw ValidationError("--format must be auto, matrix or edgelist");
}

inline AdjacencyMatrix read_network(const NetworkInput& in, std::vector<std::string> labels = {}) {
    return load_network(read_file(in.path), parse_format(in.format), parse_symmetrize(in.symmetrize), std::move(labels));
}

struct FitOptions {
    NetworkInput network;
    std::string actors;
    int dim = 2;
    int iters = 20000;
    int burnin = 6000;
    int thin = 1;
    std::string outcome = "continuous";
    std::string draws;
    bool no_adapt = false;
};

inline int cmd_fit(const FitOptions& o, const GlobalOptions& g, std::ostream& log) {
    Stopwatch clock;
    require(!g.out.empty(), "fit: --out file is required");
    const auto actors = parse_actors(read_file(o.actors));
    const auto net = read_network(o.network, actors.actor_ids);
    ChainConfig cfg;
    cfg.n_iter = o.iters;
    cfg.burn_in = o.burnin;
    cfg.thin = o.thin;
    cfg.seed = g.seed;
    cfg.adapt = !o.no_adapt;
    if (o.outcome == "continuous") cfg.outcome = OutcomeModel::Continuous;
    else if (o.outcome == "binary") cfg.outcome = OutcomeModel::Binary;
    else throw ValidationError("--outcome must be binary or continuous");
    require(o.dim >= 1 && static_cast<std::size_t>(o.dim) < net.n_actors(),
            "--dim " + std::to_string(o.dim) + " must be smaller than the number of actors (" +
                std::to_string(net.n_actors()) + ")");
    const PriorSpec priors;
    const auto result = run_chain(net, actors, o.dim, cfg, priors);
    const fs::path out = g.out;
    write_file(out, fit_to_json(result, o.dim, cfg, priors).dump(2) + "\n");
    if (!o.draws.empty()) write_file(o.draws, draws_csv(result.trace, cfg.burn_in, cfg.thin));

    RunManifest manifest{"fit", to_json(cfg, priors), g.seed, {}, 0.0};
    manifest.config["dim"] = o.dim;
    manifest.add_input(o.network.path);
    manifest.add_input(o.actors);
    manifest.duration_seconds = clock.seconds();
    manifest.write(out.has_parent_path() ? out.parent_path() : fs::path("."));

    if (!g.quiet) {
        const auto& s = result.summary;
        log << "D=" << o.dim << "  par  est  2.5%  97.5%\n";
        for (const char* p : {"c_prime", "med", "tot"})
            log << "  " << p << "  " << s[p].mean << "  " << s[p].ci_lower << "  " << s[p].ci_upper << "\n";
        for (const auto& w : result.diagnostics.warnings) log << "warning: " << w << "\n";
    }
    return kOk;
}

struct SelectDimOptions {
    NetworkInput network;
    std::vector<int> candidates;
    int max_dim = 0;
    int iters = 3000;
    int burnin = 1000;
};

inline std::string select_dim_csv(const DimensionSelection& sel) {
    std::string out = csv_schema_line() + "D,fpr,fnr,correct,bic\n";
    for (const auto& row : sel.table) {
        auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
        out += std::to_string(row.dim) + ",";
        if (row.ok) {
            out += opt(row.rates.fpr) + "," + opt(row.rates.fnr) + "," + format_double(row.rates.correct) + "," +
                   format_double(row.fit.bic) + "\n";
        } else {
            out += "NA,NA,NA,NA\n";
        }
    }
    return out;
}

inline int cmd_select_dim(const SelectDimOptions& o, const GlobalOptions& g, std::ostream& log) {
    Stopwatch clock;
    require(!g.out.empty(), "select-dim: --out directory is required");
    const auto net = read_network(o.network);
    std::vector<int> candidates = o.candidates;
    if (candidates.empty()) {
        require(o.max_dim >= 1, "select-dim: give --candidates or --max-dim");
        for (int d = 1; d <= o.max_dim; ++d) candidates.push_back(d);
    }
    ChainConfig cfg;
    cfg.n_iter = o.iters;
    cfg.burn_in = o.burnin;
    cfg.seed = g.seed;
    const auto sel = select_dimension(net, candidates, cfg);
    const fs::path dir = g.out;
    write_file(dir / "select_dim.csv", select_dim_csv(sel));
    Json errors = Json::object();
    for (const auto& row : sel.table)
        if (!row.ok) errors[std::to_string(row.dim)] = row.error;
    Json best{{"schema_version", kSchemaVersion},
              {"best_d", sel.best_dim ? Json(*sel.best_dim) : Json(nullptr)},
              {"criterion", "bic"},
              {"rates", "in-sample"},
              {"candidates", candidates},
              {"errors", errors}};
    write_file(dir / "best_d.json", best.dump(2) + "\n");
    RunManifest manifest{"select-dim", to_json(cfg, PriorSpec{}), g.seed, {}, 0.0};
    manifest.config["candidates"] = candidates;
    manifest.add_input(o.network.path);
    manifest.duration_seconds = clock.seconds();
    manifest.write(dir);
    if (!g.quiet) log << "best D by BIC: " << (sel.best_dim ? std::to_string(*sel.best_dim) : "none") << "\n";
    return sel.best_dim ? kOk : kNumerical;
}

struct SimulateOptions {
    std::string grid;
    int reps = 50;
    int iters = 5000;
    int burnin = 2000;
    bool plot_data = false;
    bool full_scale = false;
};

inline std::vector<SimCondition> parse_grid(const Json& j, int reps, std::uint64_t seed) {
    require(j.is_array() && !j.empty(), "grid must be a non-empty JSON list");
    std::vector<SimCondition> grid;
    for (const auto& c : j) {
        require(c.contains("D") && c.contains("n") && c.contains("med") && c.contains("c_prime"),
                "grid entries need D, n, med and c_prime");
        grid.push_back({c["D"].get<int>(), c["n"].get<int>(), c["med"].get<double>(), c["c_prime"].get<double>(), reps,
                        seed});
    }
    return grid;
}

inline int cmd_simulate(const SimulateOptions& o, const GlobalOptions& g, std::ostream& log) {
    Stopwatch clock;
    require(!g.out.empty(), "simulate: --out directory is required");
    int reps = o.reps, iters = o.iters, burnin = o.burnin;
    if (o.full_scale) {
        reps = 500;
        iters = 20000;
        burnin = 6000;
    }
    std::vector<SimCondition> grid;
    RunManifest manifest{"simulate", {}, g.seed, {}, 0.0};
    if (o.grid == "full") {
        grid = full_design_grid(reps, g.seed);
    } else {
        grid = parse_grid(Json::parse(read_file(o.grid)), reps, g.seed);
        manifest.add_input(o.grid);
    }
    ChainConfig cfg;
    cfg.n_iter = iters;
    cfg.burn_in = burnin;
    const int threads = g.worker_count();
    if (!g.quiet) {
        log << "simulating " << grid.size() << " condition(s) x " << reps << " replications; estimated runtime "
            << static_cast<long>(estimated_seconds(grid, cfg, threads)) << " s on " << threads << " thread(s)\n";
    }
    ProgressCallback progress;
    if (!g.quiet) {
        progress = [&log](const SimCondition& c, int done) {
            if (done == c.n_reps || done % 10 == 0) log << "  " << c.key() << ": " << done << "/" << c.n_reps << "\n";
        };
    }
    const auto reports = run_grid(grid, cfg, threads, progress);
    const fs::path dir = g.out;
    write_file(dir / "replications.csv", replications_csv(reports));
    write_file(dir / "aggregate.csv", aggregate_csv(reports));
    if (o.plot_data) write_file(dir / "plot_data.csv", aggregate_csv(reports, 20.0));
    manifest.config = to_json(cfg, PriorSpec{});
    manifest.config["reps"] = reps;
    manifest.config["grid"] = o.grid;
    manifest.duration_seconds = clock.seconds();
    manifest.write(dir);
    int failed = 0;
    for (const auto& r : reports) failed += r.n_failed;
    if (!g.quiet) log << "done; " << failed << " failed replication(s)\n";
    return kOk;
}

struct CheckInvarianceOptions {
    int k = 1000;
    int instances = 20;
    int n = 30;
    int dim = 3;
    double tolerance = 1e-9;
};

inline int cmd_check_invariance(const CheckInvarianceOptions& o, const GlobalOptions& g, std::ostream& out) {
    const int per_instance = std::max(1, o.k / std::max(1, o.instances));
    const auto sweep = invariance_sweep(o.instances, per_instance, o.n, o.dim, g.seed);
    out << "checks: " << sweep.checks << "\n"
        << "max |delta_med|: " << sweep.max_delta_med << "\n"
        << "max |delta_direct|: " << sweep.max_delta_direct << "\n";
    const bool pass = sweep.max_delta_med <= o.tolerance && sweep.max_delta_direct <= o.tolerance;
    out << (pass ? "PASS" : "FAIL") << " (tolerance " << o.tolerance << ")\n";
    if (!g.out.empty()) {
        Json j{{"schema_version", kSchemaVersion},
               {"checks", sweep.checks},
               {"max_delta_med", sweep.max_delta_med},
               {"max_delta_direct", sweep.max_delta_direct},
               {"tolerance", o.tolerance},
               {"pass", pass}};
        write_file(fs::path(g.out) / "invariance.json", j.dump(2) + "\n");
        RunManifest{"check-invariance", {{"k", o.k}, {"instances", o.instances}, {"n", o.n}, {"D", o.dim}}, g.seed, {}, 0.0}
            .write(g.out);
    }
    return pass ? kOk : kThreshold;
}

struct SummarizeOptions {
    std::string draws;
    double level = 0.95;
};

inline int cmd_summarize(const SummarizeOptions& o, const GlobalOptions& g, std::ostream& out) {
    const auto trace = parse_draws_csv(read_file(o.draws));
    const auto summary = summarize(trace, 0, o.level);
    const auto text = summary_to_json(summary).dump(2) + "\n";
    if (g.out.empty()) out << text;
    else write_file(g.out, text);
    return kOk;
}

/// Parses argv and dispatches. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Latent-space network mediation analysis"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic network mediation data set");
    generate->add_option("--dim", gen.dim, "Latent dimension D");
    generate->add_option("--n", gen.n, "Number of actors");
    generate->add_option("--med", gen.med, "Population mediation effect a'b");
    generate->add_option("--cprime", gen.c_prime, "Direct effect c'");
    generate->add_flag("--replica", gen.replica, "Binary-outcome 162-actor replica tuned to density 0.162");

    FitOptions fit;
    auto add_network = [](CLI::App* cmd, NetworkInput& in) {
        cmd->add_option("--network", in.path, "Network file (0/1 matrix or edge list)")->required();
        cmd->add_option("--format", in.format, "auto, matrix or edgelist");
        cmd->add_option("--symmetrize", in.symmetrize, "Symmetrize a directed input: max or min");
    };
    auto* fitcmd = app.add_subcommand("fit", "Fit the network mediation model by MCMC");
    add_network(fitcmd, fit.network);
    fitcmd->add_option("--actors", fit.actors, "Actor CSV with id,x,y")->required();
    fitcmd->add_option("--dim", fit.dim, "Latent dimension D");
    fitcmd->add_option("--iters", fit.iters, "Total iterations");
    fitcmd->add_option("--burnin", fit.burnin, "Burn-in iterations");
    fitcmd->add_option("--thin", fit.thin, "Keep every k-th retained draw");
    fitcmd->add_option("--outcome", fit.outcome, "binary or continuous");
    fitcmd->add_option("--draws", fit.draws, "Write retained draws to this CSV");
    fitcmd->add_flag("--no-adapt", fit.no_adapt, "Keep proposal scales fixed during burn-in");

    SelectDimOptions sel;
    auto* selcmd = app.add_subcommand("select-dim", "Choose the latent dimension by BIC");
    add_network(selcmd, sel.network);
    selcmd->add_option("--candidates", sel.candidates, "Candidate dimensions")->delimiter(',');
    selcmd->add_option("--max-dim", sel.max_dim, "Try D = 1..max-dim");
    selcmd->add_option("--iters", sel.iters, "Iterations per candidate");
    selcmd->add_option("--burnin", sel.burnin, "Burn-in per candidate");

    SimulateOptions sim;
    auto* simcmd = app.add_subcommand("simulate", "Run the Monte Carlo simulation study");
    simcmd->add_option("--grid", sim.grid, "Grid JSON file, or 'full' for the 96-cell design")->required();
    simcmd->add_option("--reps", sim.reps, "Replications per condition");
    simcmd->add_option("--iters", sim.iters, "Iterations per chain");
    simcmd->add_option("--burnin", sim.burnin, "Burn-in per chain");
    simcmd->add_flag("--plot-data", sim.plot_data, "Also write bias clipped to +/-20% for plotting");
    simcmd->add_flag("--full-scale", sim.full_scale, "500 replications of 20000/6000 chains");

    CheckInvarianceOptions inv;
    auto* invcmd = app.add_subcommand("check-invariance", "Verify isometry invariance of the effects");
    invcmd->add_option("--k", inv.k, "Total number of random isometries");
    invcmd->add_option("--instances", inv.instances, "Number of random data sets");
    invcmd->add_option("--n", inv.n, "Actors per data set");
    invcmd->add_option("--dim", inv.dim, "Latent dimension");
    invcmd->add_option("--tolerance", inv.tolerance, "Largest acceptable change");

    SummarizeOptions sum;
    auto* sumcmd = app.add_subcommand("summarize", "Re-summarize a draws CSV");
    sumcmd->add_option("--draws", sum.draws, "Draws CSV written by fit")->required();
    sumcmd->add_option("--level", sum.level, "Credible level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*generate) return cmd_generate(gen, g, err);
        if (*fitcmd) return cmd_fit(fit, g, err);
        if (*selcmd) return cmd_select_dim(sel, g, err);
        if (*simcmd) return cmd_simulate(sim, g, err);
        if (*invcmd) return cmd_check_invariance(inv, g, out);
        if (*sumcmd) return cmd_summarize(sum, g, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kValidation;
}

}  // namespace netmed::cli
