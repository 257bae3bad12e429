#include "netevo/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <limits>
#include <unordered_set>
#include <sstream>

namespace netevo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

unsigned parameter_count(const ModelSpec& spec) {
    unsigned k = static_cast<unsigned>(spec.terms.size()) - 1;
    for (const auto& t : spec.terms) {
        if (t.component.kind == ComponentKind::Pfp ||
            t.component.kind == ComponentKind::Recent) {
            ++k;
        }
    }
    return k;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Scores one event under one evaluator against the frozen state.
double event_log_probability(const ModelEvaluator& eval, const EdgeEvent& ev,
                             const ScoreOptions& opts) {
    if (ev.kind == EdgeEvent::Kind::NewNode) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ev.targets.size(); ++i) {
            std::span<const NodeId> excluded(ev.targets.data(), i);
            double p = eval.node_probability(ev.targets[i], excluded);
            sum += std::log(p);  // log(0) == -inf
        }
        return sum;
    }
    double p = opts.ordered_edges ? eval.edge_probability_ordered(ev.a(), ev.b())
                                  : eval.edge_probability(ev.a(), ev.b());
    return std::log(p);
}

}  // namespace

double RoleTally::c0() const {
    if (t == 0) return 1.0;
    if (hit_zero) return 0.0;
    return std::exp((log_likelihood - null_log_likelihood) /
                    static_cast<double>(t));
}

std::pair<double, std::size_t> step_log_likelihood(
    const ModelSpec& new_spec, const ModelSpec& internal_spec, const Graph& g,
    const EdgeEvent& ev, const ScoreOptions& opts) {
    validate_event(g, ev);
    const ModelSpec& spec =
        ev.kind == EdgeEvent::Kind::NewNode ? new_spec : internal_spec;
    ModelEvaluator eval(spec, g);
    return {event_log_probability(eval, ev, opts), ev.choices()};
}

std::uint64_t stream_identity(const Graph& g0, std::span<const EdgeEvent> events) {
    std::uint64_t h = g0.adjacency_hash();
    auto mix = [&h](std::uint64_t v) {
        // splitmix64 accumulation
        std::uint64_t x = h ^ (v + 0x9e3779b97f4a7c15ull);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        h = x ^ (x >> 31);
    };
    mix(events.size());
    for (const EdgeEvent& ev : events) {
        mix(ev.kind == EdgeEvent::Kind::NewNode ? 1 : 2);
        mix(ev.targets.size());
        for (NodeId t : ev.targets) mix(t);
    }
    return h;
}

namespace {

// Arrival-only fast path. When no event adds an internal edge and the
// new-node spec has no triangle term, the choice probabilities depend only
// on degrees, degree-class counts, per-delta weight sums and the selection
// log; the replay can keep those directly and skip the adjacency
// structure. The arithmetic mirrors ModelEvaluator::mixture_probability
// term for term.
class LeanScorer {
public:
    static bool applicable(const ModelSpec& new_spec,
                           std::span<const EdgeEvent> events) {
        for (const auto& term : new_spec.terms) {
            if (term.component.kind == ComponentKind::Triangle) return false;
        }
        for (const EdgeEvent& ev : events) {
            if (ev.kind == EdgeEvent::Kind::InternalEdge) return false;
        }
        return true;
    }

    LeanScorer(const ModelSpec& spec, const Graph& g0) : spec_(spec) {
        degree_.resize(g0.node_count());
        for (NodeId v = 0; v < g0.node_count(); ++v) degree_[v] = g0.degree(v);
        degree_sum_ = g0.degree_sum();
        singletons_ = g0.singleton_count();
        doubletons_ = g0.doubleton_count();
        recency_ = g0.selection_log();
        recents_.resize(spec_.terms.size());
        for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
            const Component& c = spec_.terms[i].component;
            if (c.kind == ComponentKind::Pfp) {
                Pfp fresh;
                fresh.delta = c.delta;
                pfps_.push_back(std::move(fresh));
                Pfp& p = pfps_.back();
                for (NodeId v = 0; v < g0.node_count(); ++v) {
                    p.sum += p.weight(degree_[v]);
                }
            } else if (c.kind == ComponentKind::Recent) {
                any_recent_ = true;
            }
        }
    }

    double choice_probability(NodeId node, std::span<const NodeId> excluded) const {
        std::uint64_t excl_degree = 0, excl_d1 = 0, excl_d2 = 0;
        double excl_pfp[8];
        std::uint64_t excl_recent[8];
        std::size_t n_pfp = pfps_.size();
        std::size_t pfp_at = 0, recent_at = 0;
        for (std::size_t p = 0; p < n_pfp; ++p) excl_pfp[p] = 0.0;
        if (any_recent_) {
            for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
                if (spec_.terms[i].component.kind == ComponentKind::Recent) {
                    refresh_recent(i);
                    excl_recent[recent_at++] = 0;
                }
            }
        }
        if (!excluded.empty()) {
            for (NodeId v : excluded) {
                std::uint32_t d = degree_[v];
                excl_degree += d;
                excl_d1 += d == 1;
                excl_d2 += d == 2;
                for (std::size_t p = 0; p < n_pfp; ++p) {
                    excl_pfp[p] += pfps_[p].weight(d);
                }
                std::size_t r = 0;
                if (any_recent_) {
                    for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
                        if (spec_.terms[i].component.kind == ComponentKind::Recent) {
                            excl_recent[r] +=
                                recents_[i].members.contains(v) ? 1 : 0;
                            ++r;
                        }
                    }
                }
            }
        }

        double active_beta = 0.0;
        double mass = 0.0;
        std::uint32_t node_degree = degree_[node];
        pfp_at = 0;
        recent_at = 0;
        for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
            const Component& c = spec_.terms[i].component;
            double z = 0.0;
            double w = 0.0;
            bool empty = false;
            switch (c.kind) {
                case ComponentKind::Null:
                    z = static_cast<double>(degree_.size()) -
                        static_cast<double>(excluded.size());
                    empty = z <= 0.0;
                    w = 1.0;
                    break;
                case ComponentKind::Degree:
                    empty = degree_sum_ == excl_degree;
                    z = static_cast<double>(degree_sum_ - excl_degree);
                    w = static_cast<double>(node_degree);
                    break;
                case ComponentKind::Singleton:
                    empty = singletons_ == excl_d1;
                    z = static_cast<double>(singletons_ - excl_d1);
                    w = node_degree == 1 ? 1.0 : 0.0;
                    break;
                case ComponentKind::Doubleton:
                    empty = doubletons_ == excl_d2;
                    z = static_cast<double>(doubletons_ - excl_d2);
                    w = node_degree == 2 ? 1.0 : 0.0;
                    break;
                case ComponentKind::Recent: {
                    std::uint64_t size = recents_[i].set.size();
                    empty = size == excl_recent[recent_at];
                    z = static_cast<double>(size - excl_recent[recent_at]);
                    ++recent_at;
                    w = recents_[i].members.contains(node) ? 1.0 : 0.0;
                    break;
                }
                case ComponentKind::Pfp: {
                    const Pfp& p = pfps_[pfp_at];
                    empty = degree_sum_ == excl_degree;
                    z = p.sum - excl_pfp[pfp_at];
                    ++pfp_at;
                    w = p.weight(node_degree);
                    break;
                }
                case ComponentKind::Triangle:
                    break;  // excluded by applicable()
            }
            if (empty) continue;
            active_beta += spec_.terms[i].beta;
            if (w > 0.0) mass += spec_.terms[i].beta * w / z;
        }
        if (active_beta <= 0.0) {
            return 1.0 / (static_cast<double>(degree_.size()) -
                          static_cast<double>(excluded.size()));
        }
        return mass / active_beta;
    }

    double null_probability(std::size_t excluded_count) const {
        return 1.0 / (static_cast<double>(degree_.size()) -
                      static_cast<double>(excluded_count));
    }

    std::size_t node_count() const { return degree_.size(); }

    void apply_arrival(const EdgeEvent& ev) {
        degree_.push_back(0);
        NodeId fresh = static_cast<NodeId>(degree_.size() - 1);
        for (NodeId t : ev.targets) {
            bump(fresh);
            bump(t);
        }
        if (any_recent_) {
            for (NodeId t : ev.targets) recency_.push_back(t);
        }
    }

private:
    struct Pfp {
        double delta = 0.0;
        double sum = 0.0;
        std::uint64_t updates = 0;
        mutable std::vector<double> wtab;

        double weight(std::uint32_t d) const {
            if (d >= wtab.size()) {
                std::size_t old = wtab.size();
                wtab.resize(std::max<std::size_t>(d + 1, old * 2 + 2));
                for (std::size_t k = old; k < wtab.size(); ++k) {
                    if (k == 0) {
                        wtab[k] = 0.0;
                    } else if (k == 1) {
                        wtab[k] = 1.0;
                    } else {
                        double dd = static_cast<double>(k);
                        wtab[k] = std::pow(dd, 1.0 + delta * std::log10(dd));
                    }
                }
            }
            return wtab[d];
        }
    };

    void bump(NodeId v) {
        std::uint32_t d = degree_[v];
        singletons_ += (d + 1 == 1) - (d == 1);
        doubletons_ += (d + 1 == 2) - (d == 2);
        degree_sum_ += 1;
        for (Pfp& p : pfps_) {
            p.sum += p.weight(d + 1) - p.weight(d);
            if (++p.updates >= (1u << 16)) {
                // bound float drift exactly like the evaluator does
                p.updates = 0;
                double s = 0.0;
                for (std::uint32_t dv : degree_) s += p.weight(dv);
                p.sum = s;
                // note: degree_[v] not yet bumped; correct for it
                p.sum += p.weight(d + 1) - p.weight(d);
            }
        }
        degree_[v] = d + 1;
    }

    void refresh_recent(std::size_t i) const {
        RecentCache& cache = recents_[i];
        if (cache.log_size == recency_.size()) return;
        std::uint32_t window = spec_.terms[i].component.window;
        cache.set.clear();
        cache.members.clear();
        std::size_t take = std::min<std::size_t>(window, recency_.size());
        for (std::size_t k = 0; k < take; ++k) {
            NodeId n = recency_[recency_.size() - 1 - k];
            if (cache.members.insert(n).second) cache.set.push_back(n);
        }
        cache.log_size = recency_.size();
    }

    struct RecentCache {
        std::size_t log_size = static_cast<std::size_t>(-1);
        std::vector<NodeId> set;
        std::unordered_set<NodeId> members;
    };

    const ModelSpec& spec_;
    std::vector<std::uint32_t> degree_;
    std::uint64_t degree_sum_ = 0;
    std::uint64_t singletons_ = 0;
    std::uint64_t doubletons_ = 0;
    std::vector<Pfp> pfps_;
    bool any_recent_ = false;
    std::vector<NodeId> recency_;
    mutable std::vector<RecentCache> recents_;
};

LikelihoodReport lean_score_stream(const ModelSpec& new_spec,
                                   const ModelSpec& internal_spec,
                                   const Graph& g0,
                                   std::span<const EdgeEvent> events) {
    LikelihoodReport report;
    report.spec_new = new_spec.str();
    report.spec_internal = internal_spec.str();
    report.k = parameter_count(new_spec) + parameter_count(internal_spec);
    report.stream_hash = stream_identity(g0, events);

    LeanScorer state(new_spec, g0);
    RoleTally& tally = report.new_node;

    // Probabilities are multiplied in short batches and flushed into log
    // space before they can underflow.
    double prod_spec = 1.0, prod_null = 1.0;
    int batched = 0;
    auto flush = [&] {
        if (batched == 0) return;
        tally.log_likelihood += std::log(prod_spec);
        tally.null_log_likelihood += std::log(prod_null);
        prod_spec = 1.0;
        prod_null = 1.0;
        batched = 0;
    };

    for (std::size_t i = 0; i < events.size(); ++i) {
        const EdgeEvent& ev = events[i];
        if (ev.targets.empty()) {
            throw StreamError("node arrival with no targets", ev.original_index);
        }
        bool event_hit_zero = false;
        for (std::size_t k = 0; k < ev.targets.size(); ++k) {
            NodeId target = ev.targets[k];
            if (target >= state.node_count()) {
                throw StreamError("arrival target " + std::to_string(target) +
                                      " does not exist",
                                  ev.original_index);
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (ev.targets[j] == target) {
                    throw StreamError("arrival targets repeat node " +
                                          std::to_string(target),
                                      ev.original_index);
                }
            }
            std::span<const NodeId> excluded(ev.targets.data(), k);
            double p = state.choice_probability(target, excluded);
            double pn = state.null_probability(k);
            if (p == 0.0) event_hit_zero = true;
            prod_spec *= p;
            prod_null *= pn;
            if (++batched == 32 || prod_spec < 1e-250 || prod_null < 1e-250) {
                flush();
            }
        }
        if (event_hit_zero) {
            std::int64_t index = ev.original_index >= 0
                                     ? ev.original_index
                                     : static_cast<std::int64_t>(i);
            report.zero_probability_events.push_back(index);
            tally.hit_zero = true;
        }
        tally.t += ev.targets.size();
        state.apply_arrival(ev);
    }
    flush();

    report.log_likelihood = tally.log_likelihood;
    report.null_log_likelihood = tally.null_log_likelihood;
    report.t = tally.t;
    if (!report.zero_probability_events.empty()) {
        report.c0 = 0.0;
    } else if (report.t == 0) {
        report.c0 = 1.0;
    } else {
        report.c0 = std::exp((report.log_likelihood - report.null_log_likelihood) /
                             static_cast<double>(report.t));
    }
    report.deviance = -2.0 * report.log_likelihood;
    report.aic = 2.0 * report.k - 2.0 * report.log_likelihood;
    return report;
}

}  // namespace

LikelihoodReport score_stream(const ModelSpec& new_spec,
                              const ModelSpec& internal_spec, const Graph& g0,
                              std::span<const EdgeEvent> events,
                              const ScoreOptions& opts) {
    new_spec.validate();
    internal_spec.validate();

    if (!opts.no_fast_path && LeanScorer::applicable(new_spec, events)) {
        return lean_score_stream(new_spec, internal_spec, g0, events);
    }

    LikelihoodReport report;
    report.spec_new = new_spec.str();
    report.spec_internal = internal_spec.str();
    report.k = parameter_count(new_spec) + parameter_count(internal_spec);
    report.stream_hash = stream_identity(g0, events);

    Graph g = g0;
    ModelEvaluator eval_new(new_spec, g);
    ModelEvaluator eval_null(ModelSpec::pure(Component::null()), g);
    // One shared evaluator when both roles use the same spec.
    std::optional<ModelEvaluator> eval_int_storage;
    const ModelEvaluator* eval_int = &eval_new;
    std::vector<ModelEvaluator*> evaluators{&eval_new, &eval_null};
    if (!(new_spec == internal_spec)) {
        eval_int_storage.emplace(internal_spec, g);
        eval_int = &*eval_int_storage;
        evaluators.push_back(&*eval_int_storage);
    }

    for (std::size_t i = 0; i < events.size(); ++i) {
        const EdgeEvent& ev = events[i];
        validate_event(g, ev);

        bool is_arrival = ev.kind == EdgeEvent::Kind::NewNode;
        const ModelEvaluator& eval = is_arrival ? eval_new : *eval_int;
        RoleTally& tally = is_arrival ? report.new_node : report.internal;

        double lp = event_log_probability(eval, ev, opts);
        double lp_null = event_log_probability(eval_null, ev, opts);

        if (lp == kNegInf) {
            std::int64_t index = ev.original_index >= 0
                                     ? ev.original_index
                                     : static_cast<std::int64_t>(i);
            report.zero_probability_events.push_back(index);
            tally.hit_zero = true;
        }
        tally.log_likelihood += lp;
        tally.null_log_likelihood += lp_null;
        tally.t += ev.choices();

        apply_event_prechecked(g, ev, evaluators);
    }

    report.log_likelihood =
        report.new_node.log_likelihood + report.internal.log_likelihood;
    report.null_log_likelihood =
        report.new_node.null_log_likelihood + report.internal.null_log_likelihood;
    report.t = report.new_node.t + report.internal.t;

    if (!report.zero_probability_events.empty()) {
        report.c0 = 0.0;
    } else if (report.t == 0) {
        report.c0 = 1.0;
    } else {
        report.c0 = std::exp((report.log_likelihood - report.null_log_likelihood) /
                             static_cast<double>(report.t));
    }
    report.deviance = -2.0 * report.log_likelihood;
    report.aic = 2.0 * report.k - 2.0 * report.log_likelihood;
    return report;
}

std::vector<RankedReport> compare_reports(std::span<const LikelihoodReport> reports) {
    if (reports.empty()) return {};
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].t != reports[0].t) {
            throw IncomparableError("reports cover different choice counts (" +
                                    std::to_string(reports[i].t) + " vs " +
                                    std::to_string(reports[0].t) + ")");
        }
        if (reports[i].stream_hash != reports[0].stream_hash) {
            throw IncomparableError("reports cover different streams");
        }
    }
    std::vector<RankedReport> ranked(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        ranked[i] = RankedReport{i, reports[i].c0, 1.0};
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedReport& a, const RankedReport& b) {
                         return a.c0 > b.c0;
                     });
    double best = ranked.front().c0;
    for (RankedReport& r : ranked) {
        r.ratio_to_best = best > 0.0 ? r.c0 / best : (r.c0 == best ? 1.0 : 0.0);
    }
    return ranked;
}

std::string report_keyvalue(const LikelihoodReport& r) {
    std::ostringstream out;
    out << "spec_new=" << r.spec_new << '\n'
        << "spec_int=" << r.spec_internal << '\n'
        << "log_likelihood=" << fmt(r.log_likelihood) << '\n'
        << "null_log_likelihood=" << fmt(r.null_log_likelihood) << '\n'
        << "t=" << r.t << '\n'
        << "c0=" << fmt(r.c0) << '\n'
        << "deviance=" << fmt(r.deviance) << '\n'
        << "aic=" << fmt(r.aic) << '\n'
        << "k=" << r.k << '\n';
    out << "zero_events=";
    for (std::size_t i = 0; i < r.zero_probability_events.size(); ++i) {
        if (i) out << ',';
        out << r.zero_probability_events[i];
    }
    out << '\n';
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(r.stream_hash));
    out << "stream_hash=" << hash << '\n'
        << "t_new=" << r.new_node.t << '\n'
        << "c0_new=" << fmt(r.new_node.c0()) << '\n'
        << "t_int=" << r.internal.t << '\n'
        << "c0_int=" << fmt(r.internal.c0()) << '\n';
    return out.str();
}

std::string report_csv_header() {
    return "spec_new,spec_int,log_likelihood,null_log_likelihood,t,c0,deviance,"
           "aic,zero_events,stream_hash";
}

std::string report_csv_row(const LikelihoodReport& r) {
    std::ostringstream out;
    out << '"' << r.spec_new << "\",\"" << r.spec_internal << "\","
        << fmt(r.log_likelihood) << ',' << fmt(r.null_log_likelihood) << ','
        << r.t << ',' << fmt(r.c0) << ',' << fmt(r.deviance) << ','
        << fmt(r.aic) << ',';
    out << '"';
    for (std::size_t i = 0; i < r.zero_probability_events.size(); ++i) {
        if (i) out << ';';
        out << r.zero_probability_events[i];
    }
    out << "\",";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(r.stream_hash));
    out << hash;
    return out.str();
}

}  // namespace netevo
