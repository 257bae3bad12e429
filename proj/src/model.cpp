#include "netevo/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace netevo {

namespace {

constexpr double kBetaSumTolerance = 1e-9;
constexpr std::uint64_t kPfpRebuildInterval = 1u << 16;

// Shortest decimal form that parses back to the same double.
std::string format_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

bool contains(std::span<const NodeId> xs, NodeId n) {
    return std::find(xs.begin(), xs.end(), n) != xs.end();
}

}  // namespace

std::string Component::str() const {
    switch (kind) {
        case ComponentKind::Null: return "null";
        case ComponentKind::Degree: return "degree";
        case ComponentKind::Triangle: return "triangle";
        case ComponentKind::Singleton: return "singleton";
        case ComponentKind::Doubleton: return "doubleton";
        case ComponentKind::Recent: return "recent(" + std::to_string(window) + ")";
        case ComponentKind::Pfp: return "pfp(" + format_number(delta) + ")";
    }
    return "?";
}

double Component::weight(NodeId node, const Graph& g,
                         std::span<const NodeId> recent) const {
    switch (kind) {
        case ComponentKind::Null:
            return 1.0;
        case ComponentKind::Degree:
            return static_cast<double>(g.degree(node));
        case ComponentKind::Triangle:
            return static_cast<double>(g.triangles(node));
        case ComponentKind::Singleton:
            return g.degree(node) == 1 ? 1.0 : 0.0;
        case ComponentKind::Doubleton:
            return g.degree(node) == 2 ? 1.0 : 0.0;
        case ComponentKind::Recent:
            return contains(recent, node) ? 1.0 : 0.0;
        case ComponentKind::Pfp: {
            std::uint32_t d = g.degree(node);
            if (d == 0) return 0.0;
            if (d == 1) return 1.0;
            double dd = static_cast<double>(d);
            return std::pow(dd, 1.0 + delta * std::log10(dd));
        }
    }
    return 0.0;
}

double Component::normalizer(const Graph& g,
                             std::span<const NodeId> recent) const {
    switch (kind) {
        case ComponentKind::Null:
            return static_cast<double>(g.node_count());
        case ComponentKind::Degree:
            return static_cast<double>(g.degree_sum());
        case ComponentKind::Triangle:
            return static_cast<double>(g.triangle_sum());
        case ComponentKind::Singleton:
            return static_cast<double>(g.singleton_count());
        case ComponentKind::Doubleton:
            return static_cast<double>(g.doubleton_count());
        case ComponentKind::Recent:
            return static_cast<double>(recent.size());
        case ComponentKind::Pfp: {
            double sum = 0.0;
            for (NodeId n = 0; n < g.node_count(); ++n) {
                sum += weight(n, g, recent);
            }
            return sum;
        }
    }
    return 0.0;
}

void ModelSpec::validate() const {
    if (terms.empty()) throw SpecError("model spec has no terms");
    double sum = 0.0;
    for (const Term& t : terms) {
        if (!(t.beta >= 0.0 && t.beta <= 1.0)) {
            throw SpecError("weight " + format_number(t.beta) + " outside [0,1]");
        }
        sum += t.beta;
        if (t.component.kind == ComponentKind::Recent && t.component.window < 1) {
            throw SpecError("recent window must be >= 1");
        }
        if (t.component.kind == ComponentKind::Pfp && !std::isfinite(t.component.delta)) {
            throw SpecError("pfp delta must be finite");
        }
    }
    if (std::abs(sum - 1.0) > kBetaSumTolerance) {
        throw SpecError("weights sum to " + format_number(sum) + ", expected 1");
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            if (terms[i].component == terms[j].component) {
                throw SpecError("duplicate component " + terms[i].component.str());
            }
        }
    }
}

std::string ModelSpec::str() const {
    if (terms.size() == 1 && terms[0].beta == 1.0) return terms[0].component.str();
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += " + ";
        out += format_number(terms[i].beta) + "*" + terms[i].component.str();
    }
    return out;
}

bool ModelSpec::operator==(const ModelSpec& o) const {
    if (terms.size() != o.terms.size()) return false;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].beta != o.terms[i].beta ||
            !(terms[i].component == o.terms[i].component))
            return false;
    }
    return true;
}

namespace {

Component parse_component(const std::string& name, const std::string& arg,
                          bool has_arg) {
    auto need_arg = [&](const char* what) {
        if (!has_arg || arg.empty())
            throw SpecError(std::string(what) + " requires a parameter: " + name);
    };
    auto no_arg = [&] {
        if (has_arg)
            throw SpecError("component " + name + " takes no parameter");
    };
    if (name == "null") { no_arg(); return Component::null(); }
    if (name == "degree") { no_arg(); return Component::degree(); }
    if (name == "triangle") { no_arg(); return Component::triangle(); }
    if (name == "singleton") { no_arg(); return Component::singleton(); }
    if (name == "doubleton") { no_arg(); return Component::doubleton(); }
    if (name == "recent") {
        need_arg("recent");
        char* end = nullptr;
        unsigned long w = std::strtoul(arg.c_str(), &end, 10);
        if (end == arg.c_str() || *end != '\0' || w < 1) {
            throw SpecError("bad recent window: " + arg);
        }
        return Component::recent(static_cast<std::uint32_t>(w));
    }
    if (name == "pfp") {
        need_arg("pfp");
        char* end = nullptr;
        double d = std::strtod(arg.c_str(), &end);
        if (end == arg.c_str() || *end != '\0' || !std::isfinite(d)) {
            throw SpecError("bad pfp delta: " + arg);
        }
        return Component::pfp(d);
    }
    throw SpecError("unknown component: " + name);
}

}  // namespace

ModelSpec ModelSpec::parse(std::string_view text) {
    std::string squeezed;
    squeezed.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            squeezed += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (squeezed.empty()) throw SpecError("empty model spec");

    ModelSpec spec;
    std::size_t pos = 0;
    while (pos <= squeezed.size()) {
        std::size_t plus = squeezed.find('+', pos);
        std::string part = squeezed.substr(pos, plus == std::string::npos
                                                    ? std::string::npos
                                                    : plus - pos);
        if (part.empty()) throw SpecError("empty term in spec: " + std::string(text));

        double beta = 1.0;
        std::size_t star = part.find('*');
        std::string comp = part;
        if (star != std::string::npos) {
            std::string num = part.substr(0, star);
            char* end = nullptr;
            beta = std::strtod(num.c_str(), &end);
            if (end == num.c_str() || *end != '\0') {
                throw SpecError("bad weight: " + num);
            }
            comp = part.substr(star + 1);
        }

        std::string name = comp, arg;
        bool has_arg = false;
        std::size_t open = comp.find('(');
        if (open != std::string::npos) {
            if (comp.back() != ')') throw SpecError("unbalanced '(' in: " + comp);
            name = comp.substr(0, open);
            arg = comp.substr(open + 1, comp.size() - open - 2);
            has_arg = true;
        }
        spec.terms.push_back(Term{beta, parse_component(name, arg, has_arg)});

        if (plus == std::string::npos) break;
        pos = plus + 1;
    }
    spec.validate();
    return spec;
}

// --- ModelEvaluator ---------------------------------------------------------

double ModelEvaluator::PfpState::extend_table(std::uint32_t d) const {
    std::size_t old = weight_table.size();
    weight_table.resize(std::max<std::size_t>(d + 1, old * 2 + 2));
    for (std::size_t k = old; k < weight_table.size(); ++k) {
        if (k == 0) {
            weight_table[k] = 0.0;
        } else if (k == 1) {
            weight_table[k] = 1.0;
        } else {
            double dd = static_cast<double>(k);
            weight_table[k] = std::pow(dd, 1.0 + delta * std::log10(dd));
        }
    }
    return weight_table[d];
}

void ModelEvaluator::PfpState::rebuild(const Graph& g) {
    double s = 0.0;
    for (NodeId n = 0; n < g.node_count(); ++n) s += weight_of_degree(g.degree(n));
    sum = s;
    updates_since_rebuild = 0;
}

ModelEvaluator::ModelEvaluator(ModelSpec spec, const Graph& g)
    : spec_(std::move(spec)), graph_(g) {
    spec_.validate();
    pfp_.resize(spec_.terms.size());
    recent_.resize(spec_.terms.size());
    for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
        if (spec_.terms[i].component.kind == ComponentKind::Pfp) {
            pfp_[i].delta = spec_.terms[i].component.delta;
            pfp_[i].rebuild(graph_);
            pfp_slots_.push_back(i);
        } else if (spec_.terms[i].component.kind == ComponentKind::Recent) {
            recent_slots_.push_back(i);
        }
        switch (spec_.terms[i].component.kind) {
            case ComponentKind::Degree:
            case ComponentKind::Pfp: need_degree_ = true; break;
            case ComponentKind::Triangle: need_triangle_ = true; break;
            case ComponentKind::Singleton: need_d1_ = true; break;
            case ComponentKind::Doubleton: need_d2_ = true; break;
            default: break;
        }
    }
}

void ModelEvaluator::note_edge(NodeId a, NodeId b) {
    if (pfp_slots_.empty()) return;
    std::uint32_t da = graph_.degree(a);
    std::uint32_t db = graph_.degree(b);
    for (std::size_t i : pfp_slots_) {
        PfpState& s = pfp_[i];
        double delta = s.weight_of_degree(da + 1) - s.weight_of_degree(da) +
                       s.weight_of_degree(db + 1) - s.weight_of_degree(db);
        s.sum += delta;
        if (++s.updates_since_rebuild >= kPfpRebuildInterval) {
            // The graph has not applied the edge yet; recount and put the
            // pending delta back so queries after the apply stay exact.
            s.rebuild(graph_);
            s.sum += delta;
        }
    }
}

const std::vector<NodeId>& ModelEvaluator::recent_for(std::size_t i) const {
    RecentCache& cache = recent_[i];
    if (cache.log_size != graph_.selection_count()) {
        cache.set = graph_.recent_set(spec_.terms[i].component.window);
        cache.members.clear();
        cache.members.insert(cache.set.begin(), cache.set.end());
        cache.log_size = graph_.selection_count();
    }
    return cache.set;
}

double ModelEvaluator::term_weight(std::size_t i, NodeId node) const {
    const Component& c = spec_.terms[i].component;
    if (c.kind == ComponentKind::Recent) {
        recent_for(i);
        return recent_[i].members.contains(node) ? 1.0 : 0.0;
    }
    if (c.kind == ComponentKind::Pfp) {
        return pfp_[i].weight_of_degree(graph_.degree(node));
    }
    return c.weight(node, graph_, {});
}

ModelEvaluator::TermView ModelEvaluator::term_view(
    std::size_t i, std::span<const NodeId> excluded) const {
    const Component& c = spec_.terms[i].component;
    TermView view;
    switch (c.kind) {
        case ComponentKind::Null: {
            view.normalizer = static_cast<double>(graph_.node_count()) -
                              static_cast<double>(excluded.size());
            view.empty = view.normalizer <= 0.0;
            return view;
        }
        case ComponentKind::Degree: {
            std::uint64_t excl = 0;
            for (NodeId n : excluded) excl += graph_.degree(n);
            view.normalizer = static_cast<double>(graph_.degree_sum() - excl);
            view.empty = graph_.degree_sum() == excl;
            return view;
        }
        case ComponentKind::Triangle: {
            std::uint64_t excl = 0;
            for (NodeId n : excluded) excl += graph_.triangles(n);
            view.normalizer = static_cast<double>(graph_.triangle_sum() - excl);
            view.empty = graph_.triangle_sum() == excl;
            return view;
        }
        case ComponentKind::Singleton:
        case ComponentKind::Doubleton: {
            std::uint32_t want = c.kind == ComponentKind::Singleton ? 1 : 2;
            std::uint64_t total = want == 1 ? graph_.singleton_count()
                                            : graph_.doubleton_count();
            std::uint64_t excl = 0;
            for (NodeId n : excluded) excl += graph_.degree(n) == want ? 1 : 0;
            view.normalizer = static_cast<double>(total - excl);
            view.empty = total == excl;
            return view;
        }
        case ComponentKind::Recent: {
            const auto& set = recent_for(i);
            std::uint64_t excl = 0;
            for (NodeId n : excluded) excl += recent_[i].members.contains(n) ? 1 : 0;
            view.normalizer = static_cast<double>(set.size() - excl);
            view.empty = set.size() == excl;
            return view;
        }
        case ComponentKind::Pfp: {
            // Same support as the degree component: nodes of degree >= 1.
            std::uint64_t degree_excl = 0;
            double weight_excl = 0.0;
            const PfpState& s = pfp_[i];
            for (NodeId n : excluded) {
                std::uint32_t d = graph_.degree(n);
                degree_excl += d;
                weight_excl += s.weight_of_degree(d);
            }
            view.empty = graph_.degree_sum() == degree_excl;
            view.normalizer = s.sum - weight_excl;
            if (!view.empty && view.normalizer <= 0.0) {
                // Float cancellation on a nearly-excluded support: recompute
                // the adjusted sum directly.
                double z = 0.0;
                for (NodeId n = 0; n < graph_.node_count(); ++n) {
                    if (!contains(excluded, n)) z += s.weight_of_degree(graph_.degree(n));
                }
                view.normalizer = z;
                view.empty = z <= 0.0;
            }
            return view;
        }
    }
    return view;
}

double ModelEvaluator::node_probability(NodeId node,
                                        std::span<const NodeId> excluded) const {
    if (!graph_.has_node(node)) {
        throw UnknownNodeError("unknown node " + std::to_string(node));
    }
    if (contains(excluded, node)) {
        throw Error("queried node is in the excluded set");
    }
    return mixture_probability(node, excluded, 0, false);
}

double ModelEvaluator::mixture_probability_generic(
    NodeId node, std::span<const NodeId> excluded) const {
    double active_beta = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
        TermView view = term_view(i, excluded);
        if (view.empty) continue;
        active_beta += spec_.terms[i].beta;
        double w = term_weight(i, node);
        if (w > 0.0) mass += spec_.terms[i].beta * w / view.normalizer;
    }
    if (active_beta <= 0.0) {
        // Every component has empty support: uniform over the choice set.
        return 1.0 / (static_cast<double>(graph_.node_count()) -
                      static_cast<double>(excluded.size()));
    }
    return mass / active_beta;
}

std::vector<NodeId> ModelEvaluator::dead_end_nodes() const {
    std::vector<NodeId> out;
    std::size_t n = graph_.node_count();
    if (n == 0) return out;
    if (graph_.max_degree() + 1 < n) return out;  // nobody is adjacent to all
    for (NodeId v = 0; v < n; ++v) {
        if (graph_.degree(v) + 1 == n) out.push_back(v);
    }
    return out;
}

double ModelEvaluator::mixture_probability(NodeId node,
                                           std::span<const NodeId> excluded,
                                           NodeId first, bool with_first) const {
    std::size_t excluded_count = excluded.size() + (with_first ? 1 : 0);
    if (excluded_count >= graph_.node_count()) {
        throw EmptyChoiceSetError("choice set is empty");
    }
    std::size_t n_pfp = pfp_slots_.size();
    std::size_t n_recent = recent_slots_.size();
    if (n_pfp > 8 || n_recent > 8) {
        if (!with_first) return mixture_probability_generic(node, excluded);
        std::vector<NodeId> all;
        all.reserve(excluded_count);
        all.push_back(first);
        all.insert(all.end(), excluded.begin(), excluded.end());
        return mixture_probability_generic(node, all);
    }

    // One pass over the exclusions, accumulating whatever the terms need.
    std::uint64_t excl_degree = 0, excl_triangle = 0, excl_d1 = 0, excl_d2 = 0;
    double excl_pfp[8];
    std::uint64_t excl_recent[8];
    for (std::size_t p = 0; p < n_pfp; ++p) excl_pfp[p] = 0.0;
    for (std::size_t r = 0; r < n_recent; ++r) excl_recent[r] = 0;

    if (excluded_count > 0 &&
        (need_degree_ || need_triangle_ || need_d1_ || need_d2_ || n_recent > 0)) {
        for (std::size_t i : recent_slots_) recent_for(i);
        auto tally = [&](NodeId v) {
            std::uint32_t d = graph_.degree(v);
            if (need_degree_) excl_degree += d;
            if (need_triangle_) excl_triangle += graph_.triangles(v);
            if (need_d1_) excl_d1 += d == 1;
            if (need_d2_) excl_d2 += d == 2;
            for (std::size_t p = 0; p < n_pfp; ++p) {
                excl_pfp[p] += pfp_[pfp_slots_[p]].weight_of_degree(d);
            }
            for (std::size_t r = 0; r < n_recent; ++r) {
                excl_recent[r] +=
                    recent_[recent_slots_[r]].members.contains(v) ? 1 : 0;
            }
        };
        if (with_first) tally(first);
        for (NodeId v : excluded) tally(v);
    }

    double active_beta = 0.0;
    double mass = 0.0;
    std::size_t pfp_at = 0, recent_at = 0;
    std::uint32_t node_degree = graph_.degree(node);
    for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
        const Component& c = spec_.terms[i].component;
        double z = 0.0;
        double w = 0.0;
        bool empty = false;
        switch (c.kind) {
            case ComponentKind::Null:
                z = static_cast<double>(graph_.node_count()) -
                    static_cast<double>(excluded_count);
                empty = z <= 0.0;
                w = 1.0;
                break;
            case ComponentKind::Degree:
                empty = graph_.degree_sum() == excl_degree;
                z = static_cast<double>(graph_.degree_sum() - excl_degree);
                w = static_cast<double>(node_degree);
                break;
            case ComponentKind::Triangle:
                empty = graph_.triangle_sum() == excl_triangle;
                z = static_cast<double>(graph_.triangle_sum() - excl_triangle);
                w = static_cast<double>(graph_.triangles(node));
                break;
            case ComponentKind::Singleton:
                empty = graph_.singleton_count() == excl_d1;
                z = static_cast<double>(graph_.singleton_count() - excl_d1);
                w = node_degree == 1 ? 1.0 : 0.0;
                break;
            case ComponentKind::Doubleton:
                empty = graph_.doubleton_count() == excl_d2;
                z = static_cast<double>(graph_.doubleton_count() - excl_d2);
                w = node_degree == 2 ? 1.0 : 0.0;
                break;
            case ComponentKind::Recent: {
                recent_for(i);
                std::uint64_t size = recent_[i].set.size();
                empty = size == excl_recent[recent_at];
                z = static_cast<double>(size - excl_recent[recent_at]);
                ++recent_at;
                w = recent_[i].members.contains(node) ? 1.0 : 0.0;
                break;
            }
            case ComponentKind::Pfp: {
                empty = graph_.degree_sum() == excl_degree;
                z = pfp_[i].sum - excl_pfp[pfp_at];
                if (!empty && z <= 0.0) {
                    // cancellation on a nearly-excluded support
                    const PfpState& s = pfp_[i];
                    double direct = 0.0;
                    for (NodeId v = 0; v < graph_.node_count(); ++v) {
                        bool out = with_first
                                       ? (v == first || graph_.has_edge(first, v))
                                       : contains(excluded, v);
                        if (!out) direct += s.weight_of_degree(graph_.degree(v));
                    }
                    z = direct;
                    empty = direct <= 0.0;
                }
                ++pfp_at;
                w = pfp_[i].weight_of_degree(node_degree);
                break;
            }
        }
        if (empty) continue;
        active_beta += spec_.terms[i].beta;
        if (w > 0.0) mass += spec_.terms[i].beta * w / z;
    }
    if (active_beta <= 0.0) {
        return 1.0 / (static_cast<double>(graph_.node_count()) -
                      static_cast<double>(excluded_count));
    }
    return mass / active_beta;
}

double ModelEvaluator::ordered_pair_probability(
    NodeId first, NodeId second, std::span<const NodeId> dead_ends) const {
    double p_first = node_probability(first, dead_ends);
    if (p_first == 0.0) return 0.0;
    return p_first * mixture_probability(second, graph_.neighbors(first), first, true);
}

double ModelEvaluator::edge_probability(NodeId a, NodeId b) const {
    if (a == b) throw SelfLoopError("internal edge endpoints coincide");
    if (graph_.has_edge(a, b)) {
        throw DuplicateEdgeError("edge {" + std::to_string(a) + "," +
                                 std::to_string(b) + "} already present");
    }
    std::vector<NodeId> dead = dead_end_nodes();
    return ordered_pair_probability(a, b, dead) +
           ordered_pair_probability(b, a, dead);
}

double ModelEvaluator::edge_probability_ordered(NodeId a, NodeId b) const {
    if (a == b) throw SelfLoopError("internal edge endpoints coincide");
    if (graph_.has_edge(a, b)) {
        throw DuplicateEdgeError("edge {" + std::to_string(a) + "," +
                                 std::to_string(b) + "} already present");
    }
    return ordered_pair_probability(a, b, dead_end_nodes());
}

double node_probability(const ModelSpec& spec, NodeId node, const Graph& g,
                        std::span<const NodeId> excluded) {
    return ModelEvaluator(spec, g).node_probability(node, excluded);
}

double edge_probability(const ModelSpec& spec, NodeId a, NodeId b, const Graph& g) {
    return ModelEvaluator(spec, g).edge_probability(a, b);
}

}  // namespace netevo
