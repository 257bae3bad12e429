// Independent brute-force oracles. These recompute everything the library
// maintains incrementally, straight from first principles, and must not
// share code with the implementation under test.
#ifndef NETEVO_TESTS_BRUTE_HPP
#define NETEVO_TESTS_BRUTE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "netevo/graph.hpp"
#include "netevo/model.hpp"

namespace brute {

using netevo::Component;
using netevo::ComponentKind;
using netevo::Graph;
using netevo::ModelSpec;
using netevo::NodeId;

inline std::uint64_t triangle_count(const Graph& g, NodeId node) {
    auto nb = g.neighbors(node);
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
            if (g.has_edge(nb[i], nb[j])) ++count;
        }
    }
    return count;
}

inline std::set<NodeId> recent_set(const Graph& g, std::size_t window) {
    const auto& log = g.selection_log();
    std::set<NodeId> out;
    std::size_t take = std::min(window, log.size());
    for (std::size_t i = 0; i < take; ++i) out.insert(log[log.size() - 1 - i]);
    return out;
}

inline double weight(const Component& c, NodeId node, const Graph& g) {
    double d = static_cast<double>(g.degree(node));
    switch (c.kind) {
        case ComponentKind::Null:
            return 1.0;
        case ComponentKind::Degree:
            return d;
        case ComponentKind::Triangle:
            return static_cast<double>(triangle_count(g, node));
        case ComponentKind::Singleton:
            return d == 1.0 ? 1.0 : 0.0;
        case ComponentKind::Doubleton:
            return d == 2.0 ? 1.0 : 0.0;
        case ComponentKind::Recent:
            return recent_set(g, c.window).count(node) ? 1.0 : 0.0;
        case ComponentKind::Pfp:
            if (d == 0.0) return 0.0;
            return std::pow(d, 1.0 + c.delta * std::log10(d));
    }
    return 0.0;
}

// Mixture probability with drop-and-renormalize semantics over the choice
// set (all nodes minus excluded); uniform fallback when everything is
// empty.
inline double node_probability(const ModelSpec& spec, NodeId node, const Graph& g,
                               const std::vector<NodeId>& excluded) {
    auto is_excluded = [&](NodeId n) {
        return std::find(excluded.begin(), excluded.end(), n) != excluded.end();
    };
    double active_beta = 0.0;
    double mass = 0.0;
    for (const auto& term : spec.terms) {
        double z = 0.0;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (!is_excluded(v)) z += weight(term.component, v, g);
        }
        if (z <= 0.0) continue;
        active_beta += term.beta;
        mass += term.beta * weight(term.component, node, g) / z;
    }
    std::size_t choice_set = g.node_count() - excluded.size();
    if (active_beta <= 0.0) return 1.0 / static_cast<double>(choice_set);
    return mass / active_beta;
}

// Two sequential draws summed over both orders; the first draw excludes
// nodes adjacent to everything else.
inline double edge_probability(const ModelSpec& spec, NodeId a, NodeId b,
                               const Graph& g) {
    std::vector<NodeId> dead;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (g.degree(v) + 1 == g.node_count()) dead.push_back(v);
    }
    auto ordered = [&](NodeId first, NodeId second) {
        double p1 = node_probability(spec, first, g, dead);
        std::vector<NodeId> excluded{first};
        auto nb = g.neighbors(first);
        excluded.insert(excluded.end(), nb.begin(), nb.end());
        return p1 * node_probability(spec, second, g, excluded);
    };
    return ordered(a, b) + ordered(b, a);
}

struct Stats {
    double d1, d2, mean_sq, mean, clustering, assortativity;
    std::uint32_t max_degree;
};

inline Stats stats(const Graph& g) {
    Stats s{};
    double n = static_cast<double>(g.node_count());
    std::uint64_t d1 = 0, d2 = 0, sq = 0, sum = 0;
    std::uint32_t maxd = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        std::uint32_t d = g.degree(v);
        d1 += d == 1;
        d2 += d == 2;
        sq += static_cast<std::uint64_t>(d) * d;
        sum += d;
        maxd = std::max(maxd, d);
    }
    s.d1 = d1 / n;
    s.d2 = d2 / n;
    s.mean_sq = static_cast<double>(sq) / n;
    s.mean = static_cast<double>(sum) / n;
    s.max_degree = maxd;

    // global transitivity: 3 * triangles / paths of length 2
    std::uint64_t tri3 = 0;  // counts each triangle three times
    std::uint64_t paths = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        tri3 += triangle_count(g, v);
        std::uint64_t d = g.degree(v);
        paths += d * (d - 1) / 2;
    }
    s.clustering = paths == 0 ? 0.0 : static_cast<double>(tri3) / paths;

    // Pearson correlation of endpoint degrees over the edge list
    std::vector<std::pair<double, double>> endpoints;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        for (NodeId w : g.neighbors(v)) {
            if (v < w) {
                endpoints.emplace_back(g.degree(v), g.degree(w));
            }
        }
    }
    if (endpoints.empty()) {
        s.assortativity = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double m = static_cast<double>(endpoints.size());
    double sum_xy = 0, sum_half = 0, sum_sq2 = 0;
    for (auto [x, y] : endpoints) {
        sum_xy += x * y;
        sum_half += 0.5 * (x + y);
        sum_sq2 += 0.5 * (x * x + y * y);
    }
    double mean = sum_half / m;
    double den = sum_sq2 / m - mean * mean;
    s.assortativity = den <= 1e-12
                          ? std::numeric_limits<double>::quiet_NaN()
                          : (sum_xy / m - mean * mean) / den;
    return s;
}

}  // namespace brute

#endif  // NETEVO_TESTS_BRUTE_HPP
