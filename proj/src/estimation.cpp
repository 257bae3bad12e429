#include "netevo/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace netevo {

namespace {

bool role_matches(FitConfig::Role role, const EdgeEvent& ev) {
    return (role == FitConfig::Role::NewNode) ==
           (ev.kind == EdgeEvent::Kind::NewNode);
}

// Relative tie tolerance for grid-point ranking.
bool c0_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(trim(s.substr(pos)));
            break;
        }
        out.push_back(trim(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

ComponentKind parse_family(const std::string& name) {
    if (name == "null") return ComponentKind::Null;
    if (name == "degree") return ComponentKind::Degree;
    if (name == "triangle") return ComponentKind::Triangle;
    if (name == "singleton") return ComponentKind::Singleton;
    if (name == "doubleton") return ComponentKind::Doubleton;
    if (name == "recent") return ComponentKind::Recent;
    if (name == "pfp") return ComponentKind::Pfp;
    throw ConfigError("unknown candidate component: " + name);
}

}  // namespace

void FitConfig::validate() const {
    if (candidate_components.empty()) {
        throw ConfigError("no candidate components");
    }
    for (std::size_t i = 0; i < candidate_components.size(); ++i) {
        for (std::size_t j = i + 1; j < candidate_components.size(); ++j) {
            if (candidate_components[i] == candidate_components[j]) {
                throw ConfigError("candidate family listed twice");
            }
        }
    }
    bool has_pfp = std::find(candidate_components.begin(), candidate_components.end(),
                             ComponentKind::Pfp) != candidate_components.end();
    bool has_recent =
        std::find(candidate_components.begin(), candidate_components.end(),
                  ComponentKind::Recent) != candidate_components.end();
    if (has_pfp && (!(delta_step > 0.0) || delta_lo > delta_hi)) {
        throw ConfigError("delta grid must have lo <= hi and step > 0");
    }
    if (has_recent && windows.empty()) {
        throw ConfigError("recent family needs a window list");
    }
    for (std::uint32_t w : windows) {
        if (w < 1) throw ConfigError("recency windows must be >= 1");
    }
    if (!(em_tol > 0.0)) throw ConfigError("em_tol must be positive");
    if (em_max_iters < 1) throw ConfigError("em_max_iters must be >= 1");
    if (prune_threshold < 0.0 || prune_threshold >= 1.0) {
        throw ConfigError("prune threshold must lie in [0,1)");
    }
}

StepProbCache per_step_component_probs(std::span<const Component> components,
                                       const Graph& g0,
                                       std::span<const EdgeEvent> events,
                                       FitConfig::Role role) {
    Graph g = g0;
    std::vector<std::unique_ptr<ModelEvaluator>> evals;
    evals.reserve(components.size());
    std::vector<ModelEvaluator*> all;
    for (const Component& c : components) {
        evals.push_back(std::make_unique<ModelEvaluator>(ModelSpec::pure(c), g));
        all.push_back(evals.back().get());
    }
    ModelEvaluator null_eval(ModelSpec::pure(Component::null()), g);
    all.push_back(&null_eval);

    StepProbCache cache;
    cache.components.assign(components.begin(), components.end());
    std::size_t k = components.size();

    for (const EdgeEvent& ev : events) {
        validate_event(g, ev);
        if (role_matches(role, ev)) {
            if (ev.kind == EdgeEvent::Kind::NewNode) {
                for (std::size_t c = 0; c < ev.targets.size(); ++c) {
                    std::span<const NodeId> excluded(ev.targets.data(), c);
                    for (std::size_t i = 0; i < k; ++i) {
                        auto view = evals[i]->term_view(0, excluded);
                        double q = 0.0;
                        if (!view.empty) {
                            q = evals[i]->term_weight(0, ev.targets[c]) /
                                view.normalizer;
                        }
                        cache.q.push_back(q);
                        cache.empty_support.push_back(view.empty ? 1 : 0);
                    }
                    cache.q_null.push_back(
                        null_eval.node_probability(ev.targets[c], excluded));
                    ++cache.steps;
                }
            } else {
                std::vector<NodeId> dead = null_eval.dead_end_nodes();
                for (std::size_t i = 0; i < k; ++i) {
                    auto view = evals[i]->term_view(0, dead);
                    double q = view.empty ? 0.0
                                          : evals[i]->edge_probability(ev.a(), ev.b());
                    cache.q.push_back(q);
                    cache.empty_support.push_back(view.empty ? 1 : 0);
                }
                cache.q_null.push_back(null_eval.edge_probability(ev.a(), ev.b()));
                ++cache.steps;
            }
        }
        apply_event(g, ev, all);
    }
    return cache;
}

WeightsFit fit_weights(const StepProbCache& cache, const FitConfig& config) {
    std::size_t k = cache.components.size();
    std::size_t t = cache.steps;
    if (k == 0) throw ConfigError("no candidate components");

    for (std::size_t j = 0; j < t; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < k; ++i) {
            if (cache.at(j, i) > 0.0) {
                any = true;
                break;
            }
        }
        if (!any) {
            throw AllZeroStepsError(
                "every candidate assigns probability zero to the observed choice",
                j);
        }
    }

    WeightsFit fit;
    fit.betas.assign(k, 1.0 / static_cast<double>(k));

    auto objective = [&](const std::vector<double>& beta) {
        double sum = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            double denom = 0.0;
            const double* row = cache.q.data() + j * k;
            for (std::size_t i = 0; i < k; ++i) denom += beta[i] * row[i];
            sum += std::log(denom);
        }
        return sum;
    };

    fit.trace.push_back(objective(fit.betas));
    std::vector<double> next(k);
    for (unsigned iter = 0; iter < config.em_max_iters && t > 0; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t j = 0; j < t; ++j) {
            const double* row = cache.q.data() + j * k;
            double denom = 0.0;
            for (std::size_t i = 0; i < k; ++i) denom += fit.betas[i] * row[i];
            if (denom <= 0.0) {
                throw AllZeroStepsError("mixture probability vanished", j);
            }
            for (std::size_t i = 0; i < k; ++i) {
                next[i] += fit.betas[i] * row[i] / denom;
            }
        }
        double norm = 0.0;
        for (double v : next) norm += v;
        double max_delta = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            next[i] /= norm;
            max_delta = std::max(max_delta, std::abs(next[i] - fit.betas[i]));
        }
        fit.betas = next;
        fit.trace.push_back(objective(fit.betas));
        ++fit.iterations;
        if (max_delta < config.em_tol) {
            fit.converged = true;
            break;
        }
    }
    if (t == 0) fit.converged = true;

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            bool same = true;
            for (std::size_t j = 0; j < t; ++j) {
                if (cache.at(j, a) != cache.at(j, b) ||
                    cache.empty_at(j, a) != cache.empty_at(j, b)) {
                    same = false;
                    break;
                }
            }
            if (same) fit.degenerate_pairs.emplace_back(a, b);
        }
    }
    return fit;
}

namespace {

// All distinct component instantiations a config can ask for, with their
// per-step probability columns built in a single replay.
struct ColumnBank {
    std::vector<Component> components;
    StepProbCache cache;  // columns for every instantiation

    std::size_t index_of(const Component& c) const {
        for (std::size_t i = 0; i < components.size(); ++i) {
            if (components[i] == c) return i;
        }
        throw Error("internal: component missing from column bank");
    }
};

StepProbCache assemble(const ColumnBank& bank, const std::vector<Component>& comps) {
    StepProbCache out;
    out.components = comps;
    out.steps = bank.cache.steps;
    out.q_null = bank.cache.q_null;
    std::size_t k = comps.size();
    out.q.resize(out.steps * k);
    out.empty_support.resize(out.steps * k);
    std::vector<std::size_t> cols(k);
    for (std::size_t i = 0; i < k; ++i) cols[i] = bank.index_of(comps[i]);
    for (std::size_t j = 0; j < out.steps; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            out.q[j * k + i] = bank.cache.at(j, cols[i]);
            out.empty_support[j * k + i] = bank.cache.empty_at(j, cols[i]) ? 1 : 0;
        }
    }
    return out;
}

struct GridOutcome {
    ModelSpec spec;
    LikelihoodReport report;
    std::vector<double> trace;
    double role_c0 = -1.0;
    bool degenerate = false;
    bool valid = false;
};

}  // namespace

FitResult fit_model(const Graph& g0, std::span<const EdgeEvent> events,
                    const FitConfig& config) {
    config.validate();

    bool has_pfp = std::find(config.candidate_components.begin(),
                             config.candidate_components.end(),
                             ComponentKind::Pfp) != config.candidate_components.end();
    bool has_recent =
        std::find(config.candidate_components.begin(),
                  config.candidate_components.end(),
                  ComponentKind::Recent) != config.candidate_components.end();

    std::vector<double> deltas;
    if (has_pfp) {
        for (int i = 0;; ++i) {
            double d = config.delta_lo + i * config.delta_step;
            if (d > config.delta_hi + config.delta_step * 0.5) break;
            // snap accumulated float error off the grid point
            double scale = std::pow(10.0, 12 - std::ceil(std::log10(
                                                  std::max(std::abs(d), 1e-12))));
            deltas.push_back(std::round(d * scale) / scale);
        }
    } else {
        deltas.push_back(0.0);  // placeholder, unused
    }
    std::vector<std::uint32_t> windows =
        has_recent ? config.windows : std::vector<std::uint32_t>{0};

    // Every distinct instantiation, for a single caching replay.
    ColumnBank bank;
    for (ComponentKind kind : config.candidate_components) {
        switch (kind) {
            case ComponentKind::Pfp:
                for (double d : deltas) bank.components.push_back(Component::pfp(d));
                break;
            case ComponentKind::Recent:
                for (std::uint32_t w : config.windows) {
                    bank.components.push_back(Component::recent(w));
                }
                break;
            default:
                bank.components.push_back(Component{kind, 0.0, 0});
        }
    }
    bank.cache =
        per_step_component_probs(bank.components, g0, events, config.role);
    if (bank.cache.steps == 0) {
        throw StreamError("stream has no choices of the requested role", -1);
    }

    struct GridPoint {
        double delta;
        std::uint32_t window;
    };
    std::vector<GridPoint> grid;
    for (double d : deltas) {
        for (std::uint32_t w : windows) grid.push_back({d, w});
    }

    const ModelSpec null_spec = ModelSpec::pure(Component::null());
    std::vector<GridOutcome> outcomes(grid.size());

    auto run_point = [&](std::size_t gi) {
        std::vector<Component> comps;
        for (ComponentKind kind : config.candidate_components) {
            if (kind == ComponentKind::Pfp) {
                comps.push_back(Component::pfp(grid[gi].delta));
            } else if (kind == ComponentKind::Recent) {
                comps.push_back(Component::recent(grid[gi].window));
            } else {
                comps.push_back(Component{kind, 0.0, 0});
            }
        }
        StepProbCache cache = assemble(bank, comps);
        WeightsFit fit = fit_weights(cache, config);

        // Drop negligible terms and refit among the survivors so the
        // returned spec is minimal.
        std::vector<Component> kept;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (fit.betas[i] >= config.prune_threshold) kept.push_back(comps[i]);
        }
        if (kept.empty()) {
            std::size_t best =
                std::max_element(fit.betas.begin(), fit.betas.end()) -
                fit.betas.begin();
            kept.push_back(comps[best]);
        }
        if (kept.size() != comps.size()) {
            StepProbCache sub = assemble(bank, kept);
            fit = fit_weights(sub, config);
            comps = kept;
        }

        GridOutcome& out = outcomes[gi];
        out.spec.terms.clear();
        double norm = 0.0;
        for (double b : fit.betas) norm += b;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            out.spec.terms.push_back(ModelSpec::Term{fit.betas[i] / norm, comps[i]});
        }
        out.trace = std::move(fit.trace);
        out.degenerate = !fit.degenerate_pairs.empty();

        const ModelSpec& spec_new =
            config.role == FitConfig::Role::NewNode ? out.spec : null_spec;
        const ModelSpec& spec_int =
            config.role == FitConfig::Role::Internal ? out.spec : null_spec;
        out.report = score_stream(spec_new, spec_int, g0, events);
        const RoleTally& tally = config.role == FitConfig::Role::NewNode
                                     ? out.report.new_node
                                     : out.report.internal;
        out.role_c0 = tally.c0();
        out.valid = true;
    };

    unsigned threads = std::max(1u, config.threads);
    if (threads <= 1 || grid.size() <= 1) {
        for (std::size_t gi = 0; gi < grid.size(); ++gi) run_point(gi);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        unsigned n = std::min<std::size_t>(threads, grid.size());
        std::exception_ptr first_error;
        std::mutex error_mutex;
        for (unsigned w = 0; w < n; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t gi = cursor.fetch_add(1);
                    if (gi >= grid.size()) return;
                    try {
                        run_point(gi);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < outcomes.size(); ++gi) {
        const GridOutcome& a = outcomes[gi];
        const GridOutcome& b = outcomes[best];
        if (!a.valid) continue;
        if (c0_equal(a.role_c0, b.role_c0)) {
            if (a.spec.terms.size() < b.spec.terms.size() ||
                (a.spec.terms.size() == b.spec.terms.size() &&
                 a.report.aic < b.report.aic)) {
                best = gi;
            }
        } else if (a.role_c0 > b.role_c0) {
            best = gi;
        }
    }

    FitResult result;
    result.spec = outcomes[best].spec;
    result.report = outcomes[best].report;
    result.trace = outcomes[best].trace;
    result.role = config.role;
    result.role_c0 = outcomes[best].role_c0;
    result.degenerate = outcomes[best].degenerate;
    return result;
}

FitFileConfig load_fit_config(std::istream& in) {
    FitFileConfig file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        try {
            if (key == "candidates") {
                file.config.candidate_components.clear();
                for (const std::string& name : split(value, ',')) {
                    if (!name.empty()) {
                        file.config.candidate_components.push_back(parse_family(name));
                    }
                }
            } else if (key == "delta") {
                auto parts = split(value, ':');
                if (parts.size() != 3) throw ConfigError("delta needs lo:hi:step");
                file.config.delta_lo = std::stod(parts[0]);
                file.config.delta_hi = std::stod(parts[1]);
                file.config.delta_step = std::stod(parts[2]);
            } else if (key == "windows") {
                file.config.windows.clear();
                for (const std::string& w : split(value, ',')) {
                    if (!w.empty()) {
                        file.config.windows.push_back(
                            static_cast<std::uint32_t>(std::stoul(w)));
                    }
                }
            } else if (key == "em_max_iters") {
                file.config.em_max_iters = static_cast<unsigned>(std::stoul(value));
            } else if (key == "em_tol") {
                file.config.em_tol = std::stod(value);
            } else if (key == "prune") {
                file.config.prune_threshold = std::stod(value);
            } else if (key == "threads") {
                file.config.threads = static_cast<unsigned>(std::stoul(value));
            } else if (key == "role") {
                if (value == "new_node") {
                    file.fit_new_node = true;
                    file.fit_internal = false;
                } else if (value == "internal") {
                    file.fit_new_node = false;
                    file.fit_internal = true;
                } else if (value == "both") {
                    file.fit_new_node = true;
                    file.fit_internal = true;
                } else {
                    throw ConfigError("role must be new_node, internal or both");
                }
            } else {
                throw ConfigError("unknown key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value for " + key, line_no);
        } catch (const std::out_of_range&) {
            throw ParseError("value out of range for " + key, line_no);
        }
    }
    file.config.validate();
    return file;
}

FitFileConfig load_fit_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return load_fit_config(in);
}

}  // namespace netevo
