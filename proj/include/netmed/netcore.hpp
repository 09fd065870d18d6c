#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "netmed/error.hpp"

namespace netmed {

enum class SymmetrizeRule { Max, Min };

/// Symmetric 0/1 adjacency matrix with zero diagonal and per-actor labels.
///
/// Storage is dense row-major; the networks this library targets have at most
/// a few hundred actors.
class AdjacencyMatrix {
public:
    AdjacencyMatrix() = default;

    /// Validates symmetry, the zero diagonal, and 0/1 entries.
    AdjacencyMatrix(std::size_t n, std::vector<std::uint8_t> entries, std::vector<std::string> labels = {})
        : n_(n), entries_(std::move(entries)), labels_(std::move(labels)) {
        require(n_ >= 2, "network needs at least 2 actors");
        require(entries_.size() == n_ * n_, "adjacency entries do not form an N x N matrix");
        if (labels_.empty()) labels_ = default_labels(n_);
        require(labels_.size() == n_, "label count does not match actor count");
        for (std::size_t i = 0; i < n_; ++i) {
            require((*this)(i, i) == 0, "self-loop at actor " + labels_[i]);
            for (std::size_t j = 0; j < n_; ++j) {
                const auto v = (*this)(i, j);
                require(v <= 1, "adjacency entries must be 0 or 1");
                require(v == (*this)(j, i), "adjacency matrix is not symmetric at (" + labels_[i] + ", " +
                                                labels_[j] + "); pass a symmetrize rule");
            }
        }
    }

    static std::vector<std::string> default_labels(std::size_t n) {
        std::vector<std::string> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i + 1);
        return out;
    }

    std::size_t n_actors() const { return n_; }
    std::uint8_t operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    bool edge(std::size_t i, std::size_t j) const { return (*this)(i, j) != 0; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::uint8_t>& entries() const { return entries_; }

    std::size_t n_dyads() const { return n_ * (n_ - 1) / 2; }

    std::size_t n_edges() const {
        std::size_t count = 0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) count += (*this)(i, j);
        return count;
    }

    std::size_t degree(std::size_t i) const {
        std::size_t d = 0;
        for (std::size_t j = 0; j < n_; ++j) d += (*this)(i, j);
        return d;
    }

    AdjacencyMatrix complement() const {
        std::vector<std::uint8_t> out(n_ * n_, 0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (i != j) out[i * n_ + j] = 1 - (*this)(i, j);
        return {n_, std::move(out), labels_};
    }

    bool operator==(const AdjacencyMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> entries_;
    std::vector<std::string> labels_;
};

/// Per-actor covariate and outcome, aligned with the network's actor order.
struct ActorData {
    std::vector<std::string> actor_ids;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }

    bool y_is_binary() const {
        return std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0 || v == 1.0; });
    }

    void validate(std::size_t n_actors, bool binary_outcome) const {
        require(x.size() == n_actors && y.size() == n_actors,
                "actor data has " + std::to_string(x.size()) + " rows but the network has " +
                    std::to_string(n_actors) + " actors");
        require(actor_ids.empty() || actor_ids.size() == n_actors, "actor id count mismatch");
        for (std::size_t i = 0; i < n_actors; ++i)
            require(std::isfinite(x[i]) && std::isfinite(y[i]), "non-finite actor value in row " + std::to_string(i + 1));
        if (binary_outcome) require(y_is_binary(), "binary outcome requires y in {0,1}");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(start, end - start));
        if (!line.empty() && line.front() != '#') lines.emplace_back(line);
        start = end + 1;
    }
    return lines;
}

inline std::vector<std::string> split_fields(std::string_view line, bool allow_whitespace) {
    std::vector<std::string> out;
    if (allow_whitespace) {
        std::string normalized(line);
        std::replace(normalized.begin(), normalized.end(), ',', ' ');
        std::istringstream in(normalized);
        for (std::string token; in >> token;) out.push_back(token);
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        const auto end = line.find(',', start);
        out.emplace_back(trim(line.substr(start, end == std::string_view::npos ? line.size() - start : end - start)));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

inline double parse_double(const std::string& token, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        require(used == token.size(), "");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse '" + token + "' as a number in " + context);
    }
}

}  // namespace detail

/// Symmetrizes a square 0/1 matrix with zero diagonal; Max keeps a tie reported by
/// either actor, Min keeps only mutual ties.
inline AdjacencyMatrix symmetrize(std::size_t n, const std::vector<std::uint8_t>& raw, SymmetrizeRule rule,
                                  std::vector<std::string> labels = {}) {
    require(raw.size() == n * n, "symmetrize requires a square matrix");
    std::vector<std::uint8_t> out(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto u = raw[i * n + j];
            const auto v = raw[j * n + i];
            require(u <= 1 && v <= 1, "adjacency entries must be 0 or 1");
            if (i == j) {
                require(u == 0, "self-loop at row " + std::to_string(i + 1));
                continue;
            }
            out[i * n + j] = rule == SymmetrizeRule::Max ? std::max(u, v) : std::min(u, v);
        }
    }
    return {n, std::move(out), std::move(labels)};
}

inline AdjacencyMatrix symmetrize(const AdjacencyMatrix& net, SymmetrizeRule rule) {
    return symmetrize(net.n_actors(), net.entries(), rule, net.labels());
}

enum class NetworkFormat { Auto, Matrix, EdgeList };

/// Parses the comma-separated 0/1 matrix format (one row per line, no header).
inline AdjacencyMatrix parse_matrix(std::string_view text, std::optional<SymmetrizeRule> rule = std::nullopt,
                                    std::vector<std::string> labels = {}) {
    const auto lines = detail::split_lines(text);
    const std::size_t n = lines.size();
    require(n >= 2, "network needs at least 2 actors");
    std::vector<std::uint8_t> raw;
    raw.reserve(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto fields = detail::split_fields(lines[r], false);
        require(fields.size() == n, "ragged matrix: row " + std::to_string(r + 1) + " has " +
                                        std::to_string(fields.size()) + " entries, expected " + std::to_string(n));
        for (const auto& f : fields) {
            require(f == "0" || f == "1", "matrix entry '" + f + "' in row " + std::to_string(r + 1) + " is not 0 or 1");
            raw.push_back(f == "1" ? 1 : 0);
        }
    }
    if (rule) return symmetrize(n, raw, *rule, std::move(labels));
    return {n, std::move(raw), std::move(labels)};
}

/// Parses a two-column edge list of actor labels. When `labels` is given it fixes
/// the actor order (and admits isolated actors); otherwise actors are ordered by
/// first appearance.
inline AdjacencyMatrix parse_edge_list(std::string_view text, std::optional<SymmetrizeRule> rule = std::nullopt,
                                       std::vector<std::string> labels = {}) {
    auto lines = detail::split_lines(text);
    if (!lines.empty()) {
        auto header = detail::split_fields(lines.front(), true);
        if (header.size() == 2 && header[0] == "from" && header[1] == "to") lines.erase(lines.begin());
    }
    std::map<std::string, std::size_t> index;
    const bool fixed = !labels.empty();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(index.emplace(labels[i], i).second, "duplicate actor label '" + labels[i] + "'");
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    auto lookup = [&](const std::string& label) {
        auto it = index.find(label);
        if (it != index.end()) return it->second;
        require(!fixed, "edge list references unknown actor '" + label + "'");
        labels.push_back(label);
        index.emplace(label, labels.size() - 1);
        return labels.size() - 1;
    };
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto fields = detail::split_fields(lines[r], true);
        require(fields.size() == 2, "edge list line " + std::to_string(r + 1) + " does not have two columns");
        require(fields[0] != fields[1], "self-loop on actor '" + fields[0] + "'");
        const auto from = lookup(fields[0]);
        const auto to = lookup(fields[1]);
        edges.emplace_back(from, to);
    }
    const std::size_t n = labels.size();
    require(n >= 2, "network needs at least 2 actors");
    std::vector<std::uint8_t> raw(n * n, 0);
    for (auto [i, j] : edges) raw[i * n + j] = 1;
    // An edge list names undirected ties: each listed pair is a tie in both directions
    // unless the caller asks for directed semantics through a symmetrize rule.
    if (rule) return symmetrize(n, raw, *rule, std::move(labels));
    for (auto [i, j] : edges) raw[j * n + i] = 1;
    return {n, std::move(raw), std::move(labels)};
}

inline bool looks_like_matrix(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.size() < 2) return false;
    for (const auto& line : lines) {
        const auto fields = detail::split_fields(line, false);
        if (fields.size() != lines.size()) return false;
        for (const auto& f : fields)
            if (f != "0" && f != "1") return false;
    }
    return true;
}

inline AdjacencyMatrix load_network(std::string_view text, NetworkFormat format = NetworkFormat::Auto,
                                    std::optional<SymmetrizeRule> rule = std::nullopt,
                                    std::vector<std::string> labels = {}) {
    if (format == NetworkFormat::Auto) format = looks_like_matrix(text) ? NetworkFormat::Matrix : NetworkFormat::EdgeList;
    if (format == NetworkFormat::Matrix) return parse_matrix(text, rule, std::move(labels));
    return parse_edge_list(text, rule, std::move(labels));
}

inline std::string write_matrix(const AdjacencyMatrix& net) {
    std::string out;
    const auto n = net.n_actors();
    out.reserve(n * n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) out.push_back(',');
            out.push_back(net(i, j) ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

inline std::string write_edge_list(const AdjacencyMatrix& net) {
    std::string out = "from,to\n";
    const auto& labels = net.labels();
    for (std::size_t i = 0; i < net.n_actors(); ++i)
        for (std::size_t j = i + 1; j < net.n_actors(); ++j)
            if (net(i, j)) out += labels[i] + "," + labels[j] + "\n";
    return out;
}

/// Parses `id,x,y` actor CSV (header required).
inline ActorData parse_actors(std::string_view text) {
    const auto lines = detail::split_lines(text);
    require(!lines.empty(), "actor file is empty");
    const auto header = detail::split_fields(lines.front(), false);
    require(header.size() == 3 && header[0] == "id" && header[1] == "x" && header[2] == "y",
            "actor file header must be id,x,y");
    ActorData data;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = detail::split_fields(lines[r], false);
        const std::string where = "actor file row " + std::to_string(r);
        require(fields.size() == 3, where + " does not have 3 columns");
        data.actor_ids.push_back(fields[0]);
        data.x.push_back(detail::parse_double(fields[1], where));
        data.y.push_back(detail::parse_double(fields[2], where));
    }
    return data;
}

inline std::string write_actors(const ActorData& data) {
    std::ostringstream out;
    out.precision(17);
    out << "id,x,y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto id = data.actor_ids.empty() ? std::to_string(i + 1) : data.actor_ids[i];
        out << id << ',' << data.x[i] << ',' << data.y[i] << '\n';
    }
    return out.str();
}

/// Proportion of ties over all possible ties.
inline double density(const AdjacencyMatrix& net) {
    return static_cast<double>(net.n_edges()) / static_cast<double>(net.n_dyads());
}

struct Correlation {
    double r;
    double p_value;
};

/// Point-biserial correlation (Pearson correlation against a 0/1 indicator)
/// with its two-sided t-test p-value on n-2 degrees of freedom.
inline Correlation point_biserial(const std::vector<double>& continuous, const std::vector<double>& binary) {
    const std::size_t n = continuous.size();
    require(n == binary.size(), "point_biserial: length mismatch");
    require(n >= 3, "point_biserial: need at least 3 observations");
    std::size_t n1 = 0;
    double sum0 = 0.0, sum1 = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        require(binary[i] == 0.0 || binary[i] == 1.0, "point_biserial: indicator must be 0/1");
        mean += continuous[i];
        if (binary[i] == 1.0) {
            ++n1;
            sum1 += continuous[i];
        } else {
            sum0 += continuous[i];
        }
    }
    require(n1 > 0 && n1 < n, "point_biserial: indicator is constant");
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : continuous) ss += (v - mean) * (v - mean);
    require(ss > 0.0, "point_biserial: continuous variable is constant");
    const double nd = static_cast<double>(n);
    const double p = static_cast<double>(n1) / nd;
    const double m1 = sum1 / static_cast<double>(n1);
    const double m0 = sum0 / static_cast<double>(n - n1);
    const double s = std::sqrt(ss / nd);
    const double r = std::clamp((m1 - m0) / s * std::sqrt(p * (1.0 - p)), -1.0, 1.0);

    const double df = nd - 2.0;
    double p_value = 0.0;
    if (std::abs(r) < 1.0 && df > 0.0) {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        boost::math::students_t dist(df);
        p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return {r, std::clamp(p_value, 0.0, 1.0)};
}

}  // namespace netmed
