#ifndef NETEVO_EVENTS_HPP
#define NETEVO_EVENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netevo/graph.hpp"
#include "netevo/model.hpp"

namespace netevo {

/// One step of the observed evolution.
///
/// NewNode: a node arrives (its id is implied: the next consecutive one)
/// and connects to `targets` in order; all targets pre-exist and are
/// distinct. InternalEdge: an edge between two existing nodes; `targets`
/// holds exactly {a, b}.
struct EdgeEvent {
    enum class Kind : std::uint8_t { NewNode, InternalEdge };

    Kind kind = Kind::NewNode;
    std::vector<NodeId> targets;
    std::int64_t original_index = -1;

    static EdgeEvent new_node(std::vector<NodeId> targets, std::int64_t index = -1) {
        return EdgeEvent{Kind::NewNode, std::move(targets), index};
    }
    static EdgeEvent internal_edge(NodeId a, NodeId b, std::int64_t index = -1) {
        return EdgeEvent{Kind::InternalEdge, {a, b}, index};
    }

    NodeId a() const { return targets[0]; }
    NodeId b() const { return targets[1]; }

    /// Number of inner-model choices this event represents: one per target
    /// for an arrival, one for an internal edge.
    std::size_t choices() const {
        return kind == Kind::NewNode ? targets.size() : 1;
    }
};

/// A self-contained evolution: the starting graph (as an explicit edge
/// list over dense pre-assigned node ids) plus the ordered events.
struct EventStream {
    std::vector<std::pair<NodeId, NodeId>> seed_edges;
    std::vector<EdgeEvent> events;
    std::vector<std::string> header;  // comment lines carried through save()

    /// Builds the starting graph from seed_edges. Throws StreamError if the
    /// seed is not connected.
    Graph seed_graph() const;

    /// FNV-1a hash over the seed edges and every event, identifying the
    /// (G0, stream) pair for report comparability.
    std::uint64_t hash() const;
};

/// Validates `ev` against `g` and applies it: adds the node/edges and
/// records every chosen node in the selection log, in choice order.
/// `evaluators` are notified of each edge before it lands so their running
/// sums stay in sync. Throws StreamError on malformed events.
void apply_event(Graph& g, const EdgeEvent& ev,
                 std::span<ModelEvaluator* const> evaluators = {});

/// apply_event without the validity check, for callers that already ran
/// validate_event against the same state.
void apply_event_prechecked(Graph& g, const EdgeEvent& ev,
                            std::span<ModelEvaluator* const> evaluators = {});

/// Throws StreamError unless `ev` can be applied to `g` as-is.
void validate_event(const Graph& g, const EdgeEvent& ev);

// Canonical event file format. Line oriented:
//   # comment
//   G a b        edge of the starting graph (node ids dense from 0)
//   N t1 .. tk   node arrival targeting t1..tk (new id is implied)
//   I a b        internal edge
EventStream load_events(std::istream& in);
EventStream load_events_file(const std::string& path);
void save_events(const EventStream& s, std::ostream& out);
void save_events_file(const EventStream& s, const std::string& path);

}  // namespace netevo

#endif  // NETEVO_EVENTS_HPP
