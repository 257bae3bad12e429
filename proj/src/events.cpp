#include "netevo/events.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace netevo {

namespace {

void hash_mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
}

}  // namespace

Graph EventStream::seed_graph() const {
    Graph g;
    for (auto [a, b] : seed_edges) {
        while (g.node_count() <= std::max(a, b)) g.add_node();
        g.add_edge(a, b);
    }
    if (!g.is_connected()) {
        throw StreamError("seed graph is not connected", -1);
    }
    return g;
}

std::uint64_t EventStream::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    hash_mix(h, seed_edges.size());
    for (auto [a, b] : seed_edges) {
        hash_mix(h, a);
        hash_mix(h, b);
    }
    hash_mix(h, events.size());
    for (const EdgeEvent& ev : events) {
        hash_mix(h, ev.kind == EdgeEvent::Kind::NewNode ? 1 : 2);
        hash_mix(h, ev.targets.size());
        for (NodeId t : ev.targets) hash_mix(h, t);
    }
    return h;
}

void validate_event(const Graph& g, const EdgeEvent& ev) {
    if (ev.kind == EdgeEvent::Kind::NewNode) {
        if (ev.targets.empty()) {
            throw StreamError("node arrival with no targets", ev.original_index);
        }
        for (std::size_t i = 0; i < ev.targets.size(); ++i) {
            if (!g.has_node(ev.targets[i])) {
                throw StreamError("arrival target " + std::to_string(ev.targets[i]) +
                                      " does not exist",
                                  ev.original_index);
            }
            for (std::size_t j = i + 1; j < ev.targets.size(); ++j) {
                if (ev.targets[i] == ev.targets[j]) {
                    throw StreamError("arrival targets repeat node " +
                                          std::to_string(ev.targets[i]),
                                      ev.original_index);
                }
            }
        }
    } else {
        if (ev.targets.size() != 2) {
            throw StreamError("internal edge needs two endpoints", ev.original_index);
        }
        NodeId a = ev.a(), b = ev.b();
        if (!g.has_node(a) || !g.has_node(b)) {
            throw StreamError("internal edge endpoint does not exist", ev.original_index);
        }
        if (a == b) {
            throw StreamError("internal edge is a self-loop", ev.original_index);
        }
        if (g.has_edge(a, b)) {
            throw StreamError("internal edge {" + std::to_string(a) + "," +
                                  std::to_string(b) + "} already present",
                              ev.original_index);
        }
    }
}

void apply_event(Graph& g, const EdgeEvent& ev,
                 std::span<ModelEvaluator* const> evaluators) {
    validate_event(g, ev);
    apply_event_prechecked(g, ev, evaluators);
}

void apply_event_prechecked(Graph& g, const EdgeEvent& ev,
                            std::span<ModelEvaluator* const> evaluators) {
    if (ev.kind == EdgeEvent::Kind::NewNode) {
        NodeId fresh = g.add_node();
        for (NodeId t : ev.targets) {
            for (ModelEvaluator* e : evaluators) e->note_edge(fresh, t);
            g.add_edge(fresh, t);
        }
        for (NodeId t : ev.targets) g.record_selection(t);
    } else {
        for (ModelEvaluator* e : evaluators) e->note_edge(ev.a(), ev.b());
        g.add_edge(ev.a(), ev.b());
        g.record_selection(ev.a());
        g.record_selection(ev.b());
    }
}

EventStream load_events(std::istream& in) {
    EventStream s;
    std::string line;
    std::size_t line_no = 0;
    bool seen_event = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            s.header.push_back(line);
            continue;
        }
        std::istringstream fields(line);
        std::string tag;
        fields >> tag;
        if (tag == "G") {
            if (seen_event) {
                throw ParseError("seed edge after first event", line_no);
            }
            long long a = -1, b = -1;
            if (!(fields >> a >> b) || a < 0 || b < 0) {
                throw ParseError("bad seed edge", line_no);
            }
            std::string extra;
            if (fields >> extra) throw ParseError("trailing fields on G line", line_no);
            s.seed_edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
        } else if (tag == "N") {
            std::vector<NodeId> targets;
            long long t;
            while (fields >> t) {
                if (t < 0) throw ParseError("negative node id", line_no);
                targets.push_back(static_cast<NodeId>(t));
            }
            if (!fields.eof()) {
                fields.clear();
                std::string junk;
                fields >> junk;
                throw ParseError("bad target '" + junk + "'", line_no);
            }
            if (targets.empty()) throw ParseError("arrival with no targets", line_no);
            s.events.push_back(EdgeEvent::new_node(
                std::move(targets), static_cast<std::int64_t>(s.events.size())));
            seen_event = true;
        } else if (tag == "I") {
            long long a = -1, b = -1;
            if (!(fields >> a >> b) || a < 0 || b < 0) {
                throw ParseError("bad internal edge", line_no);
            }
            std::string extra;
            if (fields >> extra) throw ParseError("trailing fields on I line", line_no);
            s.events.push_back(EdgeEvent::internal_edge(
                static_cast<NodeId>(a), static_cast<NodeId>(b),
                static_cast<std::int64_t>(s.events.size())));
            seen_event = true;
        } else {
            throw ParseError("unknown line tag '" + tag + "'", line_no);
        }
    }
    return s;
}

EventStream load_events_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return load_events(in);
}

void save_events(const EventStream& s, std::ostream& out) {
    for (const std::string& h : s.header) out << h << '\n';
    for (auto [a, b] : s.seed_edges) out << "G " << a << ' ' << b << '\n';
    for (const EdgeEvent& ev : s.events) {
        if (ev.kind == EdgeEvent::Kind::NewNode) {
            out << 'N';
            for (NodeId t : ev.targets) out << ' ' << t;
            out << '\n';
        } else {
            out << "I " << ev.a() << ' ' << ev.b() << '\n';
        }
    }
}

void save_events_file(const EventStream& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    save_events(s, out);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace netevo
