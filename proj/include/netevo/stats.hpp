#ifndef NETEVO_STATS_HPP
#define NETEVO_STATS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netevo/events.hpp"
#include "netevo/graph.hpp"

namespace netevo {

/// Comparison statistics of one graph state.
///
/// clustering is the global transitivity ratio (three times the triangle
/// count over the number of length-2 paths), 0 for graphs with no such
/// paths. assortativity is the Pearson correlation of degrees across edge
/// endpoints; NaN when every endpoint degree is equal (zero variance).
/// mean_degree is fixed by the outer model and carried only as a sanity
/// column, not a comparison statistic.
struct StatsSnapshot {
    std::uint64_t n_nodes = 0;
    std::uint64_t n_edges = 0;
    double d1_fraction = 0.0;
    double d2_fraction = 0.0;
    std::uint32_t max_degree = 0;
    double mean_sq_degree = 0.0;
    double clustering = 0.0;
    double assortativity = 0.0;
    double mean_degree = 0.0;
};

/// Statistics of the current state. Throws Error on an empty graph.
StatsSnapshot snapshot(const Graph& g);

/// Replays the stream from g0, emitting a snapshot each time the edge
/// count reaches the next checkpoint (which must be increasing). Labels
/// are the actual edge counts at emission.
std::vector<std::pair<std::uint64_t, StatsSnapshot>> trajectory(
    const Graph& g0, std::span<const EdgeEvent> events,
    std::span<const std::uint64_t> checkpoints);

std::string stats_csv_header();
std::string stats_csv_row(const StatsSnapshot& s);

}  // namespace netevo

#endif  // NETEVO_STATS_HPP
