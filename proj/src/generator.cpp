#include "netevo/generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace netevo {

namespace {

constexpr int kRejectionCap = 256;
constexpr std::uint64_t kSkipGuard = 1000000;

// Membership test over the excluded span; switches to a hash set when the
// span is large enough that linear probing would dominate.
class ExclusionCheck {
public:
    explicit ExclusionCheck(std::span<const NodeId> excluded) : span_(excluded) {
        if (span_.size() > 16) {
            set_.insert(span_.begin(), span_.end());
            use_set_ = true;
        }
    }
    bool contains(NodeId n) const {
        if (use_set_) return set_.contains(n);
        return std::find(span_.begin(), span_.end(), n) != span_.end();
    }

private:
    std::span<const NodeId> span_;
    std::unordered_set<NodeId> set_;
    bool use_set_ = false;
};

double uniform_unit(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::uint32_t draw_from_distribution(
    const std::vector<std::pair<std::uint32_t, double>>& dist,
    std::mt19937_64& rng) {
    double r = uniform_unit(rng);
    double acc = 0.0;
    for (const auto& [value, p] : dist) {
        acc += p;
        if (r < acc) return value;
    }
    return dist.back().first;
}

void validate_distribution(
    const std::vector<std::pair<std::uint32_t, double>>& dist,
    std::uint32_t min_value, const char* what) {
    if (dist.empty()) throw ConfigError(std::string(what) + " distribution is empty");
    double sum = 0.0;
    for (const auto& [value, p] : dist) {
        if (value < min_value) {
            throw ConfigError(std::string(what) + " distribution has value below " +
                              std::to_string(min_value));
        }
        if (p < 0.0) throw ConfigError(std::string(what) + " distribution has negative mass");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError(std::string(what) + " distribution sums to " +
                          std::to_string(sum));
    }
}

}  // namespace

void OuterModel::validate() const {
    if (kind == Kind::Replay) {
        for (const Op& op : skeleton) {
            if (op.kind == EdgeEvent::Kind::NewNode && op.arity < 1) {
                throw ConfigError("replay skeleton has an arrival with no targets");
            }
        }
    } else {
        validate_distribution(targets_per_new_node, 1, "targets-per-arrival");
        validate_distribution(internal_edges_per_arrival, 0, "internal-edges");
    }
}

OuterModel OuterModel::replay_of(std::span<const EdgeEvent> events) {
    OuterModel outer;
    outer.kind = Kind::Replay;
    outer.skeleton.reserve(events.size());
    for (const EdgeEvent& ev : events) {
        outer.skeleton.push_back(
            Op{ev.kind, static_cast<std::uint32_t>(
                            ev.kind == EdgeEvent::Kind::NewNode ? ev.targets.size() : 2)});
    }
    return outer;
}

OuterModel empirical_outer_from(std::span<const EdgeEvent> events) {
    std::vector<std::pair<std::uint32_t, std::uint64_t>> target_counts;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> internal_counts;
    auto bump = [](std::vector<std::pair<std::uint32_t, std::uint64_t>>& hist,
                   std::uint32_t value) {
        for (auto& [v, n] : hist) {
            if (v == value) {
                ++n;
                return;
            }
        }
        hist.emplace_back(value, 1);
    };

    bool seen_arrival = false;
    std::uint32_t run = 0;
    std::uint64_t arrivals = 0;
    for (const EdgeEvent& ev : events) {
        if (ev.kind == EdgeEvent::Kind::NewNode) {
            if (seen_arrival) bump(internal_counts, run);
            run = 0;
            seen_arrival = true;
            ++arrivals;
            bump(target_counts, static_cast<std::uint32_t>(ev.targets.size()));
        } else if (seen_arrival) {
            ++run;
        }
    }
    if (!seen_arrival) {
        throw StreamError("stream has no node arrivals to build an outer model from",
                          -1);
    }
    bump(internal_counts, run);

    OuterModel outer;
    outer.kind = OuterModel::Kind::Empirical;
    auto normalize = [](const std::vector<std::pair<std::uint32_t, std::uint64_t>>& hist,
                        std::uint64_t total) {
        std::vector<std::pair<std::uint32_t, double>> out;
        out.reserve(hist.size());
        for (const auto& [v, n] : hist) {
            out.emplace_back(v, static_cast<double>(n) / static_cast<double>(total));
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    outer.targets_per_new_node = normalize(target_counts, arrivals);
    outer.internal_edges_per_arrival = normalize(internal_counts, arrivals);
    return outer;
}

// --- NodeSampler -------------------------------------------------------------

void NodeSampler::Bucket::add(NodeId n) {
    if (pos.size() <= n) pos.resize(n + 1, 0);
    items.push_back(n);
    pos[n] = static_cast<std::uint32_t>(items.size());
}

void NodeSampler::Bucket::remove(NodeId n) {
    std::uint32_t at = pos[n];
    NodeId last = items.back();
    items[at - 1] = last;
    pos[last] = at;
    items.pop_back();
    pos[n] = 0;
}

NodeSampler::NodeSampler(const ModelSpec& spec, const Graph& g)
    : graph_(g), eval_(spec, g) {
    const auto& terms = eval_.spec().terms;
    weights_.resize(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        switch (terms[i].component.kind) {
            case ComponentKind::Degree:
            case ComponentKind::Triangle:
            case ComponentKind::Pfp: {
                FenwickTree& fw = weights_[i];
                fw.resize(g.node_count());
                for (NodeId n = 0; n < g.node_count(); ++n) {
                    double w = eval_.term_weight(i, n);
                    if (w != 0.0) fw.add(n, w);
                }
                break;
            }
            case ComponentKind::Singleton:
                need_singles_ = true;
                break;
            case ComponentKind::Doubleton:
                need_doubles_ = true;
                break;
            default:
                break;
        }
    }
    if (need_singles_ || need_doubles_) {
        singles_.pos.resize(g.node_count(), 0);
        doubles_.pos.resize(g.node_count(), 0);
        for (NodeId n = 0; n < g.node_count(); ++n) {
            if (graph_.degree(n) == 1) singles_.add(n);
            if (graph_.degree(n) == 2) doubles_.add(n);
        }
    }
}

void NodeSampler::note_node() {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const ComponentKind kind = eval_.spec().terms[i].component.kind;
        if (kind == ComponentKind::Degree || kind == ComponentKind::Triangle ||
            kind == ComponentKind::Pfp) {
            weights_[i].resize(graph_.node_count());
        }
    }
    if (need_singles_ || need_doubles_) {
        singles_.pos.resize(graph_.node_count(), 0);
        doubles_.pos.resize(graph_.node_count(), 0);
    }
}

void NodeSampler::note_edge(NodeId a, NodeId b) {
    const auto& terms = eval_.spec().terms;

    bool track_triangles = false;
    for (const auto& t : terms) {
        if (t.component.kind == ComponentKind::Triangle) track_triangles = true;
    }
    std::vector<NodeId> common;
    if (track_triangles) common = graph_.common_neighbors(a, b);

    for (std::size_t i = 0; i < terms.size(); ++i) {
        switch (terms[i].component.kind) {
            case ComponentKind::Degree:
                weights_[i].add(a, 1.0);
                weights_[i].add(b, 1.0);
                break;
            case ComponentKind::Triangle: {
                double c = static_cast<double>(common.size());
                if (c > 0.0) {
                    weights_[i].add(a, c);
                    weights_[i].add(b, c);
                    for (NodeId w : common) weights_[i].add(w, 1.0);
                }
                break;
            }
            case ComponentKind::Pfp: {
                // Old degrees; eval_.note_edge below sees the same state.
                for (NodeId n : {a, b}) {
                    std::uint32_t d = graph_.degree(n);
                    double before = eval_.term_weight(i, n);
                    double after =
                        d + 1 == 1
                            ? 1.0
                            : std::pow(static_cast<double>(d + 1),
                                       1.0 + terms[i].component.delta *
                                                 std::log10(static_cast<double>(d + 1)));
                    weights_[i].add(n, after - before);
                }
                break;
            }
            default:
                break;
        }
    }
    if (need_singles_ || need_doubles_) {
        for (NodeId n : {a, b}) {
            std::uint32_t d = graph_.degree(n);
            if (d == 1) singles_.remove(n);
            if (d == 2) doubles_.remove(n);
            if (d + 1 == 1) singles_.add(n);
            if (d + 1 == 2) doubles_.add(n);
        }
    }
    eval_.note_edge(a, b);
}

NodeId NodeSampler::uniform_choice_set_draw(std::span<const NodeId> excluded,
                                            std::mt19937_64& rng) const {
    ExclusionCheck excl(excluded);
    std::size_t n = graph_.node_count();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int tries = 0; tries < kRejectionCap; ++tries) {
        NodeId cand = static_cast<NodeId>(pick(rng));
        if (!excl.contains(cand)) return cand;
    }
    std::vector<NodeId> eligible;
    for (NodeId v = 0; v < n; ++v) {
        if (!excl.contains(v)) eligible.push_back(v);
    }
    if (eligible.empty()) throw EmptyChoiceSetError("choice set is empty");
    return eligible[std::uniform_int_distribution<std::size_t>(
        0, eligible.size() - 1)(rng)];
}

NodeId NodeSampler::exhaustive_term_draw(std::size_t term,
                                         std::span<const NodeId> excluded,
                                         std::mt19937_64& rng) const {
    ExclusionCheck excl(excluded);
    std::vector<NodeId> nodes;
    std::vector<double> cum;
    double total = 0.0;
    for (NodeId v = 0; v < graph_.node_count(); ++v) {
        if (excl.contains(v)) continue;
        double w = eval_.term_weight(term, v);
        if (w > 0.0) {
            total += w;
            nodes.push_back(v);
            cum.push_back(total);
        }
    }
    if (nodes.empty()) {
        throw Error("internal: sampled component has no support");
    }
    double r = uniform_unit(rng) * total;
    std::size_t at = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
    if (at >= nodes.size()) at = nodes.size() - 1;
    return nodes[at];
}

NodeId NodeSampler::sample_term(std::size_t term,
                                std::span<const NodeId> excluded,
                                std::mt19937_64& rng) const {
    const Component& c = eval_.spec().terms[term].component;
    switch (c.kind) {
        case ComponentKind::Null:
            return uniform_choice_set_draw(excluded, rng);
        case ComponentKind::Singleton:
        case ComponentKind::Doubleton: {
            const Bucket& bucket =
                c.kind == ComponentKind::Singleton ? singles_ : doubles_;
            ExclusionCheck excl(excluded);
            std::uniform_int_distribution<std::size_t> pick(0, bucket.items.size() - 1);
            for (int tries = 0; tries < kRejectionCap; ++tries) {
                NodeId cand = bucket.items[pick(rng)];
                if (!excl.contains(cand)) return cand;
            }
            std::vector<NodeId> eligible;
            for (NodeId v : bucket.items) {
                if (!excl.contains(v)) eligible.push_back(v);
            }
            if (eligible.empty()) throw Error("internal: empty bucket support");
            return eligible[std::uniform_int_distribution<std::size_t>(
                0, eligible.size() - 1)(rng)];
        }
        case ComponentKind::Recent: {
            std::vector<NodeId> set = graph_.recent_set(c.window);
            ExclusionCheck excl(excluded);
            std::vector<NodeId> eligible;
            for (NodeId v : set) {
                if (!excl.contains(v)) eligible.push_back(v);
            }
            if (eligible.empty()) throw Error("internal: empty recent support");
            return eligible[std::uniform_int_distribution<std::size_t>(
                0, eligible.size() - 1)(rng)];
        }
        case ComponentKind::Degree:
        case ComponentKind::Triangle:
        case ComponentKind::Pfp: {
            const FenwickTree& fw = weights_[term];
            ExclusionCheck excl(excluded);
            double total = fw.total();
            for (int tries = 0; tries < kRejectionCap; ++tries) {
                double r = uniform_unit(rng) * total;
                std::size_t cand = fw.lower_bound(r);
                if (cand >= graph_.node_count()) continue;
                if (fw.value(cand) <= 0.0) continue;
                if (!excl.contains(static_cast<NodeId>(cand))) {
                    return static_cast<NodeId>(cand);
                }
            }
            return exhaustive_term_draw(term, excluded, rng);
        }
    }
    throw Error("internal: unhandled component kind");
}

NodeId NodeSampler::sample(std::span<const NodeId> excluded,
                           std::mt19937_64& rng) const {
    if (excluded.size() >= graph_.node_count()) {
        throw EmptyChoiceSetError("choice set is empty");
    }
    const auto& terms = eval_.spec().terms;
    double active_beta = 0.0;
    char stack_flags[16];
    std::vector<char> heap_flags;
    char* usable = stack_flags;
    if (terms.size() > 16) {
        heap_flags.assign(terms.size(), 0);
        usable = heap_flags.data();
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        usable[i] = !eval_.term_view(i, excluded).empty;
        if (usable[i]) active_beta += terms[i].beta;
    }
    if (active_beta <= 0.0) {
        return uniform_choice_set_draw(excluded, rng);
    }
    double r = uniform_unit(rng) * active_beta;
    std::size_t chosen = terms.size();
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (!usable[i]) continue;
        if (r < terms[i].beta) {
            chosen = i;
            break;
        }
        r -= terms[i].beta;
        chosen = i;  // rounding guard: fall back to the last usable term
    }
    return sample_term(chosen, excluded, rng);
}

// --- grow --------------------------------------------------------------------

namespace {

void apply_sampled_event(Graph& g, const EdgeEvent& ev, NodeSampler& a,
                         NodeSampler& b) {
    validate_event(g, ev);
    if (ev.kind == EdgeEvent::Kind::NewNode) {
        NodeId fresh = g.add_node();
        a.note_node();
        b.note_node();
        for (NodeId t : ev.targets) {
            a.note_edge(fresh, t);
            b.note_edge(fresh, t);
            g.add_edge(fresh, t);
        }
        for (NodeId t : ev.targets) g.record_selection(t);
    } else {
        a.note_edge(ev.a(), ev.b());
        b.note_edge(ev.a(), ev.b());
        g.add_edge(ev.a(), ev.b());
        g.record_selection(ev.a());
        g.record_selection(ev.b());
    }
}

bool graph_complete(const Graph& g) {
    std::uint64_t n = g.node_count();
    return g.edge_count() * 2 == n * (n - 1);
}

}  // namespace

GrowthResult grow(const Graph& g0, const OuterModel& outer,
                  const ModelSpec& new_spec, const ModelSpec& internal_spec,
                  std::uint64_t target_edges, std::uint64_t seed) {
    if (g0.node_count() == 0) throw ConfigError("starting graph is empty");
    if (!g0.is_connected()) throw ConfigError("starting graph is not connected");
    if (target_edges <= g0.edge_count()) {
        throw ConfigError("target edge count must exceed the starting graph's");
    }
    outer.validate();

    GrowthResult result;
    result.rng_seed = seed;
    result.graph = g0;
    Graph& g = result.graph;
    NodeSampler sampler_new(new_spec, g);
    NodeSampler sampler_int(internal_spec, g);
    std::mt19937_64 rng(seed);

    std::size_t replay_at = 0;
    std::uint32_t pending_internal = 0;
    bool primed = false;  // empirical: first op is an arrival
    std::uint64_t consecutive_skips = 0;

    while (g.edge_count() < target_edges) {
        OuterModel::Op op;
        if (outer.kind == OuterModel::Kind::Replay) {
            if (replay_at == outer.skeleton.size()) {
                throw ExhaustedError(
                    "replay skeleton exhausted at " + std::to_string(g.edge_count()) +
                    " of " + std::to_string(target_edges) + " edges");
            }
            op = outer.skeleton[replay_at++];
        } else {
            if (primed && pending_internal > 0) {
                op = OuterModel::Op{EdgeEvent::Kind::InternalEdge, 2};
                --pending_internal;
            } else {
                op = OuterModel::Op{
                    EdgeEvent::Kind::NewNode,
                    draw_from_distribution(outer.targets_per_new_node, rng)};
            }
        }

        if (op.kind == EdgeEvent::Kind::NewNode) {
            std::uint32_t want = std::min<std::uint64_t>(op.arity, g.node_count());
            std::vector<NodeId> targets;
            targets.reserve(want);
            for (std::uint32_t i = 0; i < want; ++i) {
                targets.push_back(sampler_new.sample(targets, rng));
            }
            EdgeEvent ev = EdgeEvent::new_node(
                std::move(targets), static_cast<std::int64_t>(result.events.size()));
            apply_sampled_event(g, ev, sampler_new, sampler_int);
            result.events.push_back(std::move(ev));
            consecutive_skips = 0;
            if (outer.kind == OuterModel::Kind::Empirical) {
                pending_internal =
                    draw_from_distribution(outer.internal_edges_per_arrival, rng);
                primed = true;
            }
        } else {
            if (graph_complete(g)) {
                ++result.skipped_internal;
                if (++consecutive_skips > kSkipGuard) {
                    throw StuckError("no legal internal edge exists and none can appear");
                }
                continue;
            }
            std::vector<NodeId> dead = sampler_int.evaluator().dead_end_nodes();
            NodeId a = sampler_int.sample(dead, rng);
            std::vector<NodeId> excluded;
            auto nb = g.neighbors(a);
            excluded.reserve(nb.size() + 1);
            excluded.push_back(a);
            excluded.insert(excluded.end(), nb.begin(), nb.end());
            NodeId b = sampler_int.sample(excluded, rng);
            EdgeEvent ev = EdgeEvent::internal_edge(
                a, b, static_cast<std::int64_t>(result.events.size()));
            apply_sampled_event(g, ev, sampler_new, sampler_int);
            result.events.push_back(std::move(ev));
            consecutive_skips = 0;
        }
    }
    return result;
}

NodeId sample_node(const ModelSpec& spec, const Graph& g,
                   std::span<const NodeId> excluded, std::mt19937_64& rng) {
    return NodeSampler(spec, g).sample(excluded, rng);
}

}  // namespace netevo
