#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "netmed/error.hpp"
#include "netmed/format.hpp"
#include "netmed/netcore.hpp"
#include "netmed/sampler.hpp"
#include "netmed/summary.hpp"

namespace netmed {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot write " + path.string());
    out << content;
}

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

inline Json to_json(const ParamSummary& s) {
    return Json{{"mean", s.mean}, {"ci_lower", s.ci_lower}, {"ci_upper", s.ci_upper}, {"sd", s.sd},
                {"mcse", s.mcse}, {"rhat", s.rhat}};
}

inline Json to_json(const ChainConfig& cfg, const PriorSpec& priors) {
    return Json{{"n_iter", cfg.n_iter},
                {"burn_in", cfg.burn_in},
                {"thin", cfg.thin},
                {"seed", cfg.seed},
                {"outcome", to_string(cfg.outcome)},
                {"adapt", cfg.adapt},
                {"adapt_window", cfg.adapt_window},
                {"z_target", cfg.z_target},
                {"alpha_target", cfg.alpha_target},
                {"priors", {{"coef_sd", priors.coef_sd}, {"ig_shape", priors.ig_shape}, {"ig_rate", priors.ig_rate}}}};
}

/// Sum of the mediator residual variances, summarized as its own draws.
inline std::vector<double> sigma1_total_draws(const Trace& trace, Eigen::Index dim, Eigen::Index burn_in,
                                              Eigen::Index thin) {
    std::vector<double> total;
    for (Eigen::Index d = 1; d <= dim; ++d) {
        const auto col = trace.retained("sigma1_sq_" + std::to_string(d), burn_in, thin);
        if (total.empty()) total.assign(col.size(), 0.0);
        for (std::size_t k = 0; k < col.size(); ++k) total[k] += col[k];
    }
    return total;
}

/// Fit report. Only quantities that do not depend on the arbitrary orientation
/// of the latent space are reported: c', med, tot, alpha, the outcome variance,
/// the total mediator variance and the network log-likelihood.
inline Json fit_to_json(const ChainResult& res, Eigen::Index dim, const ChainConfig& cfg, const PriorSpec& priors) {
    const auto& s = res.summary;
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["dim"] = dim;
    j["level"] = s.level;
    j["n_retained"] = s.n_retained;
    j["c_prime"] = to_json(s["c_prime"]);
    j["med"] = to_json(s["med"]);
    j["tot"] = to_json(s["tot"]);
    Json params;
    params["alpha"] = to_json(s["alpha"]);
    if (cfg.outcome == OutcomeModel::Continuous) params["sigma2_sq"] = to_json(s["sigma2_sq"]);
    params["sigma1_sq_total"] = to_json(summarize_draws(sigma1_total_draws(res.trace, dim, res.burn_in, res.thin), s.level));
    params["loglik_net"] = to_json(s["loglik_net"]);
    j["parameters"] = params;
    Json diag;
    diag["z_acceptance_mean"] = res.diagnostics.z_acceptance_mean;
    diag["z_acceptance_min"] = res.diagnostics.z_acceptance_min;
    diag["alpha_acceptance"] = res.diagnostics.alpha_acceptance;
    diag["alpha_step"] = res.diagnostics.alpha_scale;
    diag["z_step_mean"] = res.diagnostics.z_scale.size() ? res.diagnostics.z_scale.mean() : 0.0;
    Json rhat;
    for (const char* name : kMonitoredParams) rhat[name] = s[name].rhat;
    diag["split_rhat"] = rhat;
    diag["effective_sample_size_med"] = effective_sample_size(res.trace.retained("med", res.burn_in, res.thin));
    diag["warnings"] = res.diagnostics.warnings;
    j["diagnostics"] = diag;
    j["config"] = to_json(cfg, priors);
    return j;
}

/// Retained draws, one row per kept iteration.
inline std::string draws_csv(const Trace& trace, Eigen::Index burn_in, Eigen::Index thin) {
    std::string out = csv_schema_line();
    for (std::size_t c = 0; c < trace.names.size(); ++c) {
        if (c) out += ',';
        out += trace.names[c];
    }
    out += '\n';
    for (Eigen::Index r = burn_in; r < trace.rows(); r += thin) {
        for (Eigen::Index c = 0; c < trace.values.cols(); ++c) {
            if (c) out += ',';
            out += format_double(trace.values(r, c));
        }
        out += '\n';
    }
    return out;
}

inline Trace parse_draws_csv(std::string_view text) {
    const auto lines = detail::split_lines(text);
    require(!lines.empty(), "draws file is empty");
    Trace trace;
    trace.names = detail::split_fields(lines.front(), false);
    const auto cols = static_cast<Eigen::Index>(trace.names.size());
    trace.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = detail::split_fields(lines[r], false);
        require(static_cast<Eigen::Index>(fields.size()) == cols, "draws row " + std::to_string(r) + " is ragged");
        for (Eigen::Index c = 0; c < cols; ++c)
            trace.values(static_cast<Eigen::Index>(r - 1), c) =
                detail::parse_double(fields[static_cast<std::size_t>(c)], "draws row " + std::to_string(r));
    }
    return trace;
}

/// Re-summary of every column of a draws file at a given credible level.
inline Json summary_to_json(const PosteriorSummary& s) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["level"] = s.level;
    j["n_retained"] = s.n_retained;
    Json params;
    for (const auto& name : s.names) params[name] = to_json(s[name]);
    j["parameters"] = params;
    return j;
}

inline Json effects_to_json(const EffectEstimates& e) {
    return Json{{"med", e.med}, {"direct", e.direct}, {"total", e.total}};
}

inline Json params_to_json(const MediationParams& p) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return Json{{"i1", vec(p.i1)},
                {"i2", p.i2},
                {"a", vec(p.a)},
                {"b", vec(p.b)},
                {"c_prime", p.c_prime},
                {"alpha", p.alpha},
                {"sigma1_sq", vec(p.sigma1_sq)},
                {"sigma2_sq", p.sigma2_sq}};
}

/// Records how an output directory was produced. `duration_seconds` is the only
/// field that varies between otherwise identical runs.
struct RunManifest {
    std::string command;
    Json config;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  ///< (path, sha256)
    double duration_seconds = 0.0;

    void add_input(const std::filesystem::path& path) { inputs.emplace_back(path.string(), sha256_hex(read_file(path))); }

    Json to_json() const {
        Json digests = Json::object();
        for (const auto& [path, digest] : inputs) digests[path] = digest;
        return Json{{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"command", command},
                    {"seed", seed},                      {"config", config},               {"input_digests", digests},
                    {"duration_seconds", duration_seconds}};
    }

    void write(const std::filesystem::path& dir) const { write_file(dir / "manifest.json", to_json().dump(2) + "\n"); }
};

}  // namespace netmed
