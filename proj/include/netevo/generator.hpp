#ifndef NETEVO_GENERATOR_HPP
#define NETEVO_GENERATOR_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "netevo/events.hpp"
#include "netevo/fenwick.hpp"
#include "netevo/graph.hpp"
#include "netevo/model.hpp"

namespace netevo {

/// Chooses which structural operation happens next.
///
/// Replay re-issues the observed operation skeleton (kinds and arities,
/// observed choices stripped). Empirical alternates a node arrival with a
/// sampled number of internal edges, drawing the arrival's target count
/// and the internal-edge count from two empirical distributions.
struct OuterModel {
    enum class Kind : std::uint8_t { Replay, Empirical };

    struct Op {
        EdgeEvent::Kind kind = EdgeEvent::Kind::NewNode;
        std::uint32_t arity = 1;  // target count for arrivals
    };

    Kind kind = Kind::Empirical;
    std::vector<Op> skeleton;                                      // Replay
    std::vector<std::pair<std::uint32_t, double>> targets_per_new_node;
    std::vector<std::pair<std::uint32_t, double>> internal_edges_per_arrival;

    void validate() const;

    /// Skeleton of the observed stream with the node choices discarded.
    static OuterModel replay_of(std::span<const EdgeEvent> events);
};

/// Histograms of (1) targets per arrival and (2) internal edges between
/// consecutive arrivals, normalized. Internal edges before the first
/// arrival are not attributed to any arrival and are ignored.
/// Throws StreamError when the stream contains no arrival.
OuterModel empirical_outer_from(std::span<const EdgeEvent> events);

struct GrowthResult {
    Graph graph;
    std::vector<EdgeEvent> events;
    std::uint64_t rng_seed = 0;
    std::uint64_t skipped_internal = 0;  // internal ops with no legal edge
};

/// Draws nodes with probability exactly node_probability(spec, ., g,
/// excluded): a component is picked with its (renormalized) weight, then a
/// node is drawn inside it — by Fenwick inverse-CDF for weighted
/// components, uniformly over the maintained support for indicator ones —
/// rejecting excluded nodes. Must be kept in sync with the graph through
/// note_edge/note_node.
class NodeSampler {
public:
    NodeSampler(const ModelSpec& spec, const Graph& g);

    /// Call immediately before g.add_edge(a, b).
    void note_edge(NodeId a, NodeId b);
    /// Call after every g.add_node().
    void note_node();

    NodeId sample(std::span<const NodeId> excluded, std::mt19937_64& rng) const;

    const ModelEvaluator& evaluator() const { return eval_; }

private:
    struct Bucket {  // O(1) membership list for one degree class
        std::vector<NodeId> items;
        std::vector<std::uint32_t> pos;  // node -> index + 1, 0 = absent
        void add(NodeId n);
        void remove(NodeId n);
    };

    NodeId sample_term(std::size_t term, std::span<const NodeId> excluded,
                       std::mt19937_64& rng) const;
    NodeId exhaustive_term_draw(std::size_t term,
                                std::span<const NodeId> excluded,
                                std::mt19937_64& rng) const;
    NodeId uniform_choice_set_draw(std::span<const NodeId> excluded,
                                   std::mt19937_64& rng) const;

    const Graph& graph_;
    ModelEvaluator eval_;
    std::vector<FenwickTree> weights_;  // per weighted term
    Bucket singles_;
    Bucket doubles_;
    bool need_singles_ = false;
    bool need_doubles_ = false;
};

/// Grows the graph from g0 until it has at least target_edges edges,
/// drawing operations from the outer model and node choices from the
/// specs. Deterministic given the seed. Internal-edge operations with no
/// legal edge (complete graph) are skipped and counted. Throws
/// ExhaustedError when a replay skeleton runs out first.
GrowthResult grow(const Graph& g0, const OuterModel& outer,
                  const ModelSpec& new_spec, const ModelSpec& internal_spec,
                  std::uint64_t target_edges, std::uint64_t seed);

/// One-shot draw consistent with node_probability; builds a sampler
/// internally, so prefer NodeSampler for repeated draws.
NodeId sample_node(const ModelSpec& spec, const Graph& g,
                   std::span<const NodeId> excluded, std::mt19937_64& rng);

}  // namespace netevo

#endif  // NETEVO_GENERATOR_HPP
