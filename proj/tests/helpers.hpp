#ifndef NETEVO_TESTS_HELPERS_HPP
#define NETEVO_TESTS_HELPERS_HPP

#include <algorithm>
#include <random>
#include <vector>

#include "netevo/events.hpp"
#include "netevo/graph.hpp"
#include "netevo/model.hpp"

namespace helpers {

using netevo::Component;
using netevo::EdgeEvent;
using netevo::Graph;
using netevo::ModelSpec;
using netevo::NodeId;

inline Graph seed_pair() {
    Graph g;
    g.add_node();
    g.add_node();
    g.add_edge(0, 1);
    return g;
}

inline Graph star(unsigned leaves) {
    Graph g;
    NodeId center = g.add_node();
    for (unsigned i = 0; i < leaves; ++i) {
        NodeId leaf = g.add_node();
        g.add_edge(center, leaf);
    }
    return g;
}

inline Graph complete(unsigned n) {
    Graph g;
    for (unsigned i = 0; i < n; ++i) g.add_node();
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) g.add_edge(a, b);
    }
    return g;
}

inline Graph path(unsigned n) {
    Graph g;
    g.add_node();
    for (unsigned i = 1; i < n; ++i) {
        g.add_node();
        g.add_edge(i - 1, i);
    }
    return g;
}

inline Graph cycle(unsigned n) {
    Graph g = path(n);
    g.add_edge(0, n - 1);
    return g;
}

/// Random valid event stream grown from a two-node seed. Events are
/// returned unapplied; the accompanying graph is the seed only.
inline std::pair<Graph, std::vector<EdgeEvent>> random_evolution(
    std::mt19937_64& rng, std::size_t max_nodes, std::size_t n_events,
    double internal_fraction = 0.3) {
    Graph sim = seed_pair();
    std::vector<EdgeEvent> events;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (events.size() < n_events) {
        bool want_internal = coin(rng) < internal_fraction || sim.node_count() >= max_nodes;
        if (want_internal) {
            // random absent pair: rejection first, exhaustive when dense
            bool placed = false;
            std::uniform_int_distribution<std::size_t> pick(0, sim.node_count() - 1);
            for (int tries = 0; tries < 40 && !placed; ++tries) {
                NodeId a = static_cast<NodeId>(pick(rng));
                NodeId b = static_cast<NodeId>(pick(rng));
                if (a == b || sim.has_edge(a, b)) continue;
                EdgeEvent ev = EdgeEvent::internal_edge(
                    a, b, static_cast<std::int64_t>(events.size()));
                netevo::apply_event(sim, ev);
                events.push_back(std::move(ev));
                placed = true;
            }
            if (placed) continue;
            std::vector<std::pair<NodeId, NodeId>> absent;
            for (NodeId a = 0; a < sim.node_count(); ++a) {
                for (NodeId b = a + 1; b < sim.node_count(); ++b) {
                    if (!sim.has_edge(a, b)) absent.emplace_back(a, b);
                }
            }
            if (!absent.empty()) {
                auto [a, b] = absent[std::uniform_int_distribution<std::size_t>(
                    0, absent.size() - 1)(rng)];
                EdgeEvent ev = EdgeEvent::internal_edge(
                    a, b, static_cast<std::int64_t>(events.size()));
                netevo::apply_event(sim, ev);
                events.push_back(std::move(ev));
                continue;
            }
            if (sim.node_count() >= max_nodes) break;  // complete graph, full
        }
        std::size_t want = 1 + std::uniform_int_distribution<int>(0, 2)(rng);
        want = std::min(want, sim.node_count());
        std::vector<NodeId> targets;
        while (targets.size() < want) {
            NodeId t = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(
                0, sim.node_count() - 1)(rng));
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
                targets.push_back(t);
            }
        }
        EdgeEvent ev =
            EdgeEvent::new_node(std::move(targets), static_cast<std::int64_t>(events.size()));
        netevo::apply_event(sim, ev);
        events.push_back(std::move(ev));
    }
    return {seed_pair(), std::move(events)};
}

/// Random valid mixture over a random subset of component kinds.
inline ModelSpec random_spec(std::mt19937_64& rng) {
    std::vector<Component> pool = {
        Component::null(),      Component::degree(),
        Component::triangle(),  Component::singleton(),
        Component::doubleton(), Component::recent(1 + rng() % 5),
        Component::pfp(std::uniform_real_distribution<double>(-0.4, 0.4)(rng))};
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t k = 1 + rng() % 3;
    ModelSpec spec;
    std::vector<double> betas;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double b = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
        betas.push_back(b);
        total += b;
    }
    for (std::size_t i = 0; i < k; ++i) {
        spec.terms.push_back(ModelSpec::Term{betas[i] / total, pool[i]});
    }
    // exact simplex
    double sum = 0.0;
    for (auto& t : spec.terms) sum += t.beta;
    spec.terms.back().beta += 1.0 - sum;
    return spec;
}

}  // namespace helpers

#endif  // NETEVO_TESTS_HELPERS_HPP
