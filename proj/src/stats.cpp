#include "netevo/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace netevo {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double edge_degree_correlation(const Graph& g) {
    // Newman's r over the edge list: per edge with endpoint degrees x, y
    //   r = [ <xy> - <(x+y)/2>^2 ] / [ <(x^2+y^2)/2> - <(x+y)/2>^2 ]
    if (g.edge_count() == 0) return std::numeric_limits<double>::quiet_NaN();
    std::uint64_t sum_prod = 0, sum_half = 0, sum_sq = 0;
    std::uint32_t lo = std::numeric_limits<std::uint32_t>::max(), hi = 0;
    for (NodeId a = 0; a < g.node_count(); ++a) {
        std::uint64_t da = g.degree(a);
        for (NodeId b : g.neighbors(a)) {
            if (b < a) continue;  // each edge once
            std::uint64_t db = g.degree(b);
            sum_prod += da * db;
            sum_half += da + db;
            sum_sq += da * da + db * db;
            lo = std::min<std::uint32_t>(lo, std::min<std::uint64_t>(da, db));
            hi = std::max<std::uint32_t>(hi, std::max<std::uint64_t>(da, db));
        }
    }
    if (lo == hi) return std::numeric_limits<double>::quiet_NaN();  // regular
    double m = static_cast<double>(g.edge_count());
    double mean = static_cast<double>(sum_half) / (2.0 * m);
    double num = static_cast<double>(sum_prod) / m - mean * mean;
    double den = static_cast<double>(sum_sq) / (2.0 * m) - mean * mean;
    if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return num / den;
}

}  // namespace

StatsSnapshot snapshot(const Graph& g) {
    if (g.node_count() == 0) throw Error("cannot take statistics of an empty graph");
    StatsSnapshot s;
    s.n_nodes = g.node_count();
    s.n_edges = g.edge_count();
    double n = static_cast<double>(s.n_nodes);
    s.d1_fraction = static_cast<double>(g.singleton_count()) / n;
    s.d2_fraction = static_cast<double>(g.doubleton_count()) / n;
    s.max_degree = g.max_degree();
    s.mean_sq_degree = static_cast<double>(g.degree_square_sum()) / n;
    s.mean_degree = static_cast<double>(g.degree_sum()) / n;

    // paths of length two = sum over nodes of C(d, 2)
    std::uint64_t paths2 = (g.degree_square_sum() - g.degree_sum()) / 2;
    s.clustering = paths2 == 0 ? 0.0
                               : static_cast<double>(g.triangle_sum()) /
                                     static_cast<double>(paths2);
    s.assortativity = edge_degree_correlation(g);
    return s;
}

std::vector<std::pair<std::uint64_t, StatsSnapshot>> trajectory(
    const Graph& g0, std::span<const EdgeEvent> events,
    std::span<const std::uint64_t> checkpoints) {
    for (std::size_t i = 1; i < checkpoints.size(); ++i) {
        if (checkpoints[i] <= checkpoints[i - 1]) {
            throw ConfigError("checkpoints must be strictly increasing");
        }
    }
    std::vector<std::pair<std::uint64_t, StatsSnapshot>> out;
    Graph g = g0;
    std::size_t next = 0;
    auto emit_due = [&] {
        while (next < checkpoints.size() && g.edge_count() >= checkpoints[next]) {
            out.emplace_back(g.edge_count(), snapshot(g));
            ++next;
        }
    };
    emit_due();
    for (const EdgeEvent& ev : events) {
        if (next == checkpoints.size()) break;
        apply_event(g, ev);
        emit_due();
    }
    return out;
}

std::string stats_csv_header() {
    return "edges,nodes,d1,d2,maxd,meansqd,clustering,assortativity,meand";
}

std::string stats_csv_row(const StatsSnapshot& s) {
    std::ostringstream out;
    out << s.n_edges << ',' << s.n_nodes << ',' << fmt(s.d1_fraction) << ','
        << fmt(s.d2_fraction) << ',' << s.max_degree << ','
        << fmt(s.mean_sq_degree) << ',' << fmt(s.clustering) << ','
        << fmt(s.assortativity) << ',' << fmt(s.mean_degree);
    return out.str();
}

}  // namespace netevo
