#ifndef NETEVO_GRAPH_HPP
#define NETEVO_GRAPH_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "netevo/errors.hpp"

namespace netevo {

/// Dense node identifier, assigned consecutively from 0 in arrival order.
using NodeId = std::uint32_t;

/// Simple undirected graph that only ever grows.
///
/// Every quantity the selection models need is maintained incrementally:
/// per-node degree and triangle count, the counts of degree-1 and degree-2
/// nodes, the degree square sum, the total triangle participation
/// sum (sum of T_i over nodes, i.e. three times the triangle count of the
/// graph), and an append-only log of node selections for recency queries.
///
/// Single writer; readers may query freely between mutations.
class Graph {
public:
    Graph() = default;

    /// Adds an isolated node and returns its id (== previous node_count()).
    /// The caller is expected to wire it up before the enclosing event is
    /// considered applied; connectivity is only meaningful between events.
    NodeId add_node();

    /// Adds the undirected edge {a, b}.
    /// Throws SelfLoopError, DuplicateEdgeError or UnknownNodeError; on
    /// error the graph is unchanged.
    void add_edge(NodeId a, NodeId b);

    /// Appends a node to the selection log.
    void record_selection(NodeId n);

    /// Distinct nodes among the last `window` selections, most recent
    /// first. A window larger than the log returns all logged nodes.
    std::vector<NodeId> recent_set(std::size_t window) const;

    /// True iff all nodes of positive degree lie in one component.
    /// Isolated nodes (degree 0) are ignored; the empty graph is
    /// vacuously connected.
    bool is_connected() const;

    bool has_node(NodeId n) const { return n < degree_.size(); }
    bool has_edge(NodeId a, NodeId b) const;

    std::size_t node_count() const { return degree_.size(); }
    std::uint64_t edge_count() const { return edge_count_; }

    std::uint32_t degree(NodeId n) const {
        check_node(n);
        return degree_[n];
    }
    std::uint64_t triangles(NodeId n) const {
        check_node(n);
        if (!triangles_live_) recount_triangles();
        return triangles_[n];
    }
    std::span<const NodeId> neighbors(NodeId n) const {
        check_node(n);
        return adj_[n];
    }

    /// Nodes adjacent to both a and b. Cost O(min(deg a, deg b)).
    std::vector<NodeId> common_neighbors(NodeId a, NodeId b) const;

    // Running aggregates, all O(1) (triangle queries trigger a one-time
    // recount if none has happened yet; see below).
    std::uint64_t degree_sum() const { return 2 * edge_count_; }
    std::uint64_t degree_square_sum() const { return degree_square_sum_; }
    std::uint64_t triangle_sum() const {
        if (!triangles_live_) recount_triangles();
        return triangle_sum_;
    }
    std::uint64_t singleton_count() const { return singleton_count_; }
    std::uint64_t doubleton_count() const { return doubleton_count_; }
    std::uint32_t max_degree() const { return max_degree_; }

    std::size_t selection_count() const { return recency_.size(); }
    const std::vector<NodeId>& selection_log() const { return recency_; }

    /// Order-independent hash of the node count plus sorted edge list.
    std::uint64_t adjacency_hash() const;

private:
    // Open-addressing presence set over packed (min, max) node pairs.
    // Grow-only, slot 0 is never a valid edge key (endpoints differ), so 0
    // marks an empty slot.
    class EdgeSet {
    public:
        bool contains(std::uint64_t key) const;
        void insert(std::uint64_t key);

    private:
        void grow();
        std::vector<std::uint64_t> slots_;
        std::size_t used_ = 0;
        std::size_t mask_ = 0;
    };

    static std::uint64_t edge_key(NodeId a, NodeId b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    void check_node(NodeId n) const {
        if (!has_node(n)) throw_unknown_node(n);
    }
    [[noreturn]] void throw_unknown_node(NodeId n) const;
    void bump_degree(NodeId n);

    // Triangle counts are maintained lazily: edges added before the first
    // triangle query skip the common-neighbor pass, the first query
    // recounts from the adjacency, and every edge after that updates
    // incrementally. Queries always see exact counts.
    void recount_triangles() const;

    std::vector<std::vector<NodeId>> adj_;  // iteration order = insertion
    EdgeSet edges_;
    std::vector<std::uint32_t> degree_;
    mutable std::vector<std::uint64_t> triangles_;
    std::vector<NodeId> recency_;
    mutable bool triangles_live_ = false;  // first query triggers a recount
    std::uint64_t edge_count_ = 0;
    mutable std::uint64_t triangle_sum_ = 0;
    std::uint64_t degree_square_sum_ = 0;
    std::uint64_t singleton_count_ = 0;
    std::uint64_t doubleton_count_ = 0;
    std::uint32_t max_degree_ = 0;
};

}  // namespace netevo

#endif  // NETEVO_GRAPH_HPP
