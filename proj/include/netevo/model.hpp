#ifndef NETEVO_MODEL_HPP
#define NETEVO_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "netevo/graph.hpp"

namespace netevo {

enum class ComponentKind : std::uint8_t {
    Null,       // every eligible node equally likely
    Degree,     // weight d_i (preferential attachment)
    Triangle,   // weight T_i
    Singleton,  // uniform over degree-1 nodes
    Doubleton,  // uniform over degree-2 nodes
    Recent,     // uniform over nodes selected in the last `window` selections
    Pfp,        // weight d_i^(1 + delta * log10(d_i))
};

/// One selection-model component. `delta` is meaningful for Pfp, `window`
/// for Recent; both are zero otherwise.
struct Component {
    ComponentKind kind = ComponentKind::Null;
    double delta = 0.0;
    std::uint32_t window = 0;

    static Component null() { return {ComponentKind::Null, 0.0, 0}; }
    static Component degree() { return {ComponentKind::Degree, 0.0, 0}; }
    static Component triangle() { return {ComponentKind::Triangle, 0.0, 0}; }
    static Component singleton() { return {ComponentKind::Singleton, 0.0, 0}; }
    static Component doubleton() { return {ComponentKind::Doubleton, 0.0, 0}; }
    static Component recent(std::uint32_t window) { return {ComponentKind::Recent, 0.0, window}; }
    static Component pfp(double delta) { return {ComponentKind::Pfp, delta, 0}; }

    bool operator==(const Component& o) const = default;
    std::string str() const;

    /// Unnormalized weight of `node` under this component. Recency weights
    /// need the caller to pass the current recent set (see recent_set()).
    double weight(NodeId node, const Graph& g,
                  std::span<const NodeId> recent) const;

    /// Full normalizer over all nodes, from the graph's running aggregates.
    double normalizer(const Graph& g, std::span<const NodeId> recent) const;
};

/// A convex combination of components: sum of beta_i * component_i with
/// beta_i in [0,1] summing to one.
struct ModelSpec {
    struct Term {
        double beta = 1.0;
        Component component;
    };
    std::vector<Term> terms;

    /// Throws SpecError unless the weights lie on the simplex (within
    /// 1e-9) and no component appears twice.
    void validate() const;

    /// Parses the textual form, e.g.
    ///   0.5*degree + 0.4*pfp(0.05) + 0.1*singleton
    /// A bare component name gets weight 1. Whitespace-insensitive.
    static ModelSpec parse(std::string_view text);

    std::string str() const;

    static ModelSpec pure(Component c) { return ModelSpec{{Term{1.0, c}}}; }

    bool operator==(const ModelSpec& o) const;
};

/// A model spec bound to a graph, with per-component normalizers kept in
/// sync as the graph grows. Pfp normalizers are updated incrementally from
/// degree changes (note_edge must be called before every Graph::add_edge)
/// and recomputed exactly every 2^16 updates to bound float drift.
///
/// Queries are read-only and safe to run concurrently between mutations.
class ModelEvaluator {
public:
    ModelEvaluator(ModelSpec spec, const Graph& g);

    const ModelSpec& spec() const { return spec_; }
    const Graph& graph() const { return graph_; }

    /// Must be called immediately before g.add_edge(a, b) so Pfp sums can
    /// see the old degrees. No-op for specs without Pfp terms.
    void note_edge(NodeId a, NodeId b);

    /// Probability that the mixture selects `node` when the choice set is
    /// every current node minus `excluded` (distinct, valid ids).
    /// Components whose support inside the choice set is empty are dropped
    /// and the remaining betas renormalized; if every component is empty
    /// the null model over the choice set is used.
    /// Throws EmptyChoiceSetError when the choice set is empty.
    double node_probability(NodeId node, std::span<const NodeId> excluded) const;

    /// Probability of selecting the absent internal edge {a, b} as two
    /// sequential node draws, summed over both orders. The first draw
    /// excludes nodes with no legal partner (degree == node_count - 1) so
    /// the distribution normalizes to one over all legal absent edges.
    double edge_probability(NodeId a, NodeId b) const;

    /// Ordered variant: probability of drawing `a` first, then `b`.
    double edge_probability_ordered(NodeId a, NodeId b) const;

    /// Nodes adjacent to everything else; they cannot start an internal
    /// edge. Empty unless max_degree == node_count - 1.
    std::vector<NodeId> dead_end_nodes() const;

    /// Normalizer of one term over the choice set (running sum minus the
    /// excluded nodes' weights) plus an exact emptiness flag. Exposed for
    /// weight fitting and sampling, which need per-component views.
    struct TermView {
        double normalizer = 0.0;
        bool empty = false;
    };
    TermView term_view(std::size_t term, std::span<const NodeId> excluded) const;

    /// Unnormalized weight of `node` under one term.
    double term_weight(std::size_t term, NodeId node) const;

private:
    struct PfpState {
        double delta = 0.0;
        double sum = 0.0;
        std::uint64_t updates_since_rebuild = 0;
        mutable std::vector<double> weight_table;  // by degree, [0] = 0

        double weight_of_degree(std::uint32_t d) const {
            return d < weight_table.size() ? weight_table[d] : extend_table(d);
        }
        double extend_table(std::uint32_t d) const;  // cold path
        void rebuild(const Graph& g);
    };

    const std::vector<NodeId>& recent_for(std::size_t i) const;
    double ordered_pair_probability(NodeId first, NodeId second,
                                    std::span<const NodeId> dead_ends) const;
    // Shared core: the excluded set is `excluded`, optionally preceded by
    // `first` (the second-draw case, where it is {first} + neighbors).
    // Scans the exclusions once for all terms.
    double mixture_probability(NodeId node, std::span<const NodeId> excluded,
                               NodeId first, bool with_first) const;
    double mixture_probability_generic(NodeId node,
                                       std::span<const NodeId> excluded) const;

    ModelSpec spec_;
    const Graph& graph_;
    std::vector<PfpState> pfp_;          // parallel to spec_.terms (unused slots inert)
    std::vector<std::size_t> pfp_slots_; // indices of Pfp terms
    std::vector<std::size_t> recent_slots_;
    bool need_degree_ = false;  // which exclusion sums the terms require
    bool need_triangle_ = false;
    bool need_d1_ = false;
    bool need_d2_ = false;

    // Recent-set cache, rebuilt when the selection log grows.
    struct RecentCache {
        std::size_t log_size = static_cast<std::size_t>(-1);
        std::vector<NodeId> set;
        std::unordered_set<NodeId> members;
    };
    mutable std::vector<RecentCache> recent_;
};

/// One-shot conveniences; build a temporary evaluator internally.
double node_probability(const ModelSpec& spec, NodeId node, const Graph& g,
                        std::span<const NodeId> excluded);
double edge_probability(const ModelSpec& spec, NodeId a, NodeId b, const Graph& g);

}  // namespace netevo

#endif  // NETEVO_MODEL_HPP
