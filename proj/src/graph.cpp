#include "netevo/graph.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace netevo {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

bool Graph::EdgeSet::contains(std::uint64_t key) const {
    if (slots_.empty()) return false;
    std::size_t i = mix64(key) & mask_;
    while (true) {
        std::uint64_t slot = slots_[i];
        if (slot == 0) return false;
        if (slot == key) return true;
        i = (i + 1) & mask_;
    }
}

void Graph::EdgeSet::grow() {
    std::size_t cap = slots_.empty() ? 64 : slots_.size() * 2;
    std::vector<std::uint64_t> old;
    old.swap(slots_);
    slots_.assign(cap, 0);
    mask_ = cap - 1;
    for (std::uint64_t key : old) {
        if (key == 0) continue;
        std::size_t i = mix64(key) & mask_;
        while (slots_[i] != 0) i = (i + 1) & mask_;
        slots_[i] = key;
    }
}

void Graph::EdgeSet::insert(std::uint64_t key) {
    if (slots_.empty() || (used_ + 1) * 2 > slots_.size()) grow();
    std::size_t i = mix64(key) & mask_;
    while (slots_[i] != 0) {
        if (slots_[i] == key) return;
        i = (i + 1) & mask_;
    }
    slots_[i] = key;
    ++used_;
}

void Graph::throw_unknown_node(NodeId n) const {
    throw UnknownNodeError("unknown node " + std::to_string(n) +
                           " (node count " + std::to_string(node_count()) + ")");
}

NodeId Graph::add_node() {
    NodeId id = static_cast<NodeId>(degree_.size());
    adj_.emplace_back();
    degree_.push_back(0);
    triangles_.push_back(0);
    return id;
}

void Graph::bump_degree(NodeId n) {
    std::uint32_t d = degree_[n];
    if (d == 1) {
        --singleton_count_;
    } else if (d == 2) {
        --doubleton_count_;
    }
    degree_square_sum_ += 2ull * d + 1;
    degree_[n] = ++d;
    if (d == 1) {
        ++singleton_count_;
    } else if (d == 2) {
        ++doubleton_count_;
    }
    if (d > max_degree_) max_degree_ = d;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
    if (!has_node(a) || !has_node(b) || a == b) return false;
    return edges_.contains(edge_key(a, b));
}

void Graph::add_edge(NodeId a, NodeId b) {
    check_node(a);
    check_node(b);
    if (a == b) {
        throw SelfLoopError("self-loop at node " + std::to_string(a));
    }
    std::uint64_t key = edge_key(a, b);
    if (edges_.contains(key)) {
        throw DuplicateEdgeError("edge {" + std::to_string(a) + "," +
                                 std::to_string(b) + "} already present");
    }

    if (triangles_live_) {
        // Each common neighbor closes one new triangle through a, b, itself.
        NodeId small = a, large = b;
        if (adj_[small].size() > adj_[large].size()) std::swap(small, large);
        std::uint64_t common = 0;
        for (NodeId w : adj_[small]) {
            if (edges_.contains(edge_key(w, large))) {
                ++triangles_[w];
                ++common;
            }
        }
        triangles_[a] += common;
        triangles_[b] += common;
        triangle_sum_ += 3 * common;
    }

    if (adj_[a].capacity() == 0) adj_[a].reserve(3);
    if (adj_[b].capacity() == 0) adj_[b].reserve(3);
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    edges_.insert(key);
    bump_degree(a);
    bump_degree(b);
    ++edge_count_;

    assert(degree_[a] == adj_[a].size() && degree_[b] == adj_[b].size());
}

std::vector<NodeId> Graph::common_neighbors(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    // Walk the smaller adjacency list, probe the edge set.
    NodeId small = a, large = b;
    if (adj_[small].size() > adj_[large].size()) std::swap(small, large);
    std::vector<NodeId> out;
    for (NodeId w : adj_[small]) {
        if (edges_.contains(edge_key(w, large))) out.push_back(w);
    }
    return out;
}

void Graph::recount_triangles() const {
    std::fill(triangles_.begin(), triangles_.end(), 0);
    triangle_sum_ = 0;
    for (NodeId a = 0; a < adj_.size(); ++a) {
        for (NodeId b : adj_[a]) {
            if (b < a) continue;
            // count each triangle once, at its lexicographically first edge
            NodeId small = a, large = b;
            if (adj_[small].size() > adj_[large].size()) std::swap(small, large);
            for (NodeId w : adj_[small]) {
                if (w > b && edges_.contains(edge_key(w, large))) {
                    ++triangles_[a];
                    ++triangles_[b];
                    ++triangles_[w];
                    triangle_sum_ += 3;
                }
            }
        }
    }
    triangles_live_ = true;
}

void Graph::record_selection(NodeId n) {
    check_node(n);
    recency_.push_back(n);
}

std::vector<NodeId> Graph::recent_set(std::size_t window) const {
    std::vector<NodeId> out;
    std::size_t take = std::min(window, recency_.size());
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        NodeId n = recency_[recency_.size() - 1 - i];
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
    return out;
}

bool Graph::is_connected() const {
    NodeId start = 0;
    bool found = false;
    std::size_t active = 0;
    for (NodeId n = 0; n < degree_.size(); ++n) {
        if (degree_[n] > 0) {
            ++active;
            if (!found) {
                start = n;
                found = true;
            }
        }
    }
    if (!found) return true;  // no edges at all

    std::vector<char> seen(degree_.size(), 0);
    std::vector<NodeId> stack{start};
    seen[start] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        for (NodeId w : adj_[n]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == active;
}

std::uint64_t Graph::adjacency_hash() const {
    // FNV-1a over node count and the sorted edge list.
    std::uint64_t h = 1469598103934665603ull;
    auto fnv = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    fnv(node_count());
    for (NodeId a = 0; a < degree_.size(); ++a) {
        std::vector<NodeId> nb(adj_[a].begin(), adj_[a].end());
        std::sort(nb.begin(), nb.end());
        for (NodeId b : nb) {
            if (a < b) {
                fnv(a);
                fnv(b);
            }
        }
    }
    return h;
}

}  // namespace netevo
