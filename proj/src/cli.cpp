#include "netevo/cli.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "netevo/estimation.hpp"
#include "netevo/generator.hpp"
#include "netevo/ingest.hpp"
#include "netevo/likelihood.hpp"
#include "netevo/stats.hpp"

namespace netevo {

namespace {

// stdout unless --out names a file.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw Error("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

unsigned effective_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

RawFormat parse_format(const std::string& name) {
    if (name == "edges2") return RawFormat::Edges2;
    if (name == "edges3") return RawFormat::Edges3;
    if (name == "edges4") return RawFormat::Edges4;
    if (name == "coauth") return RawFormat::Coauth;
    throw ConfigError("unknown format: " + name);
}

std::vector<std::uint64_t> parse_checkpoints(const std::string& text,
                                             const EventStream& stream) {
    std::uint64_t final_edges = stream.seed_edges.size();
    for (const EdgeEvent& ev : stream.events) {
        final_edges += ev.kind == EdgeEvent::Kind::NewNode ? ev.targets.size() : 1;
    }
    std::vector<std::uint64_t> out;
    if (text.rfind("auto", 0) == 0) {
        unsigned long n = 10;
        if (text.size() > 4) {
            std::string arg = text.substr(text[4] == ':' ? 5 : 4);
            n = std::stoul(arg);
        }
        if (n == 0) throw ConfigError("auto checkpoint count must be positive");
        for (unsigned long i = 1; i <= n; ++i) {
            std::uint64_t edge = final_edges * i / n;
            if (out.empty() || edge > out.back()) out.push_back(edge);
        }
        return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    return out;
}

// Runs fn(i) for i in [0, n), on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(threads, n); ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
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

int cmd_ingest(const std::string& raw_path, const std::string& format_name,
               const std::string& out_path, IngestConfig config) {
    RawFormat format = parse_format(format_name);
    RawStream raw = parse_edge_stream_file(raw_path, format, config);
    OrderedStream ordered = order_and_delay(raw, config);

    std::uint64_t arrivals = 0, internals = 0;
    for (const EdgeEvent& ev : ordered.stream.events) {
        (ev.kind == EdgeEvent::Kind::NewNode ? arrivals : internals) += 1;
    }
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(ordered.stream.hash()));
    ordered.stream.header.push_back("# source: " + raw_path + " (" + format_name + ")");
    ordered.stream.header.push_back(
        "# nodes: " + std::to_string(ordered.node_names.size()) +
        " arrivals: " + std::to_string(arrivals) +
        " internal: " + std::to_string(internals));
    ordered.stream.header.push_back("# stream: " + std::string(hash));

    Output out(out_path);
    save_events(ordered.stream, out.stream());

    std::cerr << "records: " << raw.records.size()
              << "  dedup-dropped: " << raw.dropped_duplicates
              << "  cutoff-dropped: " << raw.dropped_by_cutoff
              << "  duplicate-edges: " << ordered.duplicate_edges
              << "  residual: " << ordered.residual.size() << "\n";
    for (const RawEdgeRecord& rec : ordered.residual) {
        std::cerr << "residual record at line " << rec.line << "\n";
    }
    return 0;
}

int cmd_likelihood(const std::string& events_path, double warmup,
                   const std::vector<std::string>& specs,
                   const std::vector<std::string>& specs_new,
                   const std::vector<std::string>& specs_int, bool ordered_edges,
                   unsigned threads, const std::string& out_path) {
    if (specs_new.size() != specs_int.size()) {
        throw ConfigError("--spec-new and --spec-int must be given in pairs");
    }
    std::vector<std::pair<ModelSpec, ModelSpec>> pairs;
    for (const std::string& s : specs) {
        ModelSpec spec = ModelSpec::parse(s);
        pairs.emplace_back(spec, spec);
    }
    for (std::size_t i = 0; i < specs_new.size(); ++i) {
        pairs.emplace_back(ModelSpec::parse(specs_new[i]),
                           ModelSpec::parse(specs_int[i]));
    }
    if (pairs.empty()) throw ConfigError("no model specs given");

    EventStream stream = load_events_file(events_path);
    auto [g0, tail] = split_warmup(stream, warmup);

    ScoreOptions opts;
    opts.ordered_edges = ordered_edges;
    std::vector<LikelihoodReport> reports(pairs.size());
    parallel_for(pairs.size(), effective_threads(threads), [&](std::size_t i) {
        reports[i] =
            score_stream(pairs[i].first, pairs[i].second, g0, tail, opts);
    });

    std::vector<RankedReport> ranking = compare_reports(reports);
    Output out(out_path);
    out.stream() << "rank,ratio_to_best," << report_csv_header() << "\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        char ratio[32];
        std::snprintf(ratio, sizeof ratio, "%.12g", ranking[i].ratio_to_best);
        out.stream() << (i + 1) << ',' << ratio << ','
                     << report_csv_row(reports[ranking[i].input_index]) << "\n";
    }
    return 0;
}

int cmd_fit(const std::string& events_path, double warmup,
            const std::string& config_path, unsigned threads,
            const std::string& out_path) {
    FitFileConfig file = load_fit_config_file(config_path);
    file.config.threads = effective_threads(threads ? threads : file.config.threads);

    EventStream stream = load_events_file(events_path);
    auto [g0, tail] = split_warmup(stream, warmup);

    Output out(out_path);
    ModelSpec best_new = ModelSpec::pure(Component::null());
    ModelSpec best_int = ModelSpec::pure(Component::null());

    auto run_role = [&](FitConfig::Role role) {
        FitConfig config = file.config;
        config.role = role;
        FitResult result = fit_model(g0, tail, config);
        const char* role_name =
            role == FitConfig::Role::NewNode ? "new_node" : "internal";
        out.stream() << "role=" << role_name << "\n"
                     << "spec=" << result.spec.str() << "\n";
        char c0[32];
        std::snprintf(c0, sizeof c0, "%.12g", result.role_c0);
        out.stream() << "role_c0=" << c0 << "\n";
        if (result.degenerate) {
            out.stream() << "degenerate=true\n";
        }
        out.stream() << "# em_trace:";
        for (double v : result.trace) {
            char t[32];
            std::snprintf(t, sizeof t, " %.10g", v);
            out.stream() << t;
        }
        out.stream() << "\n";
        (role == FitConfig::Role::NewNode ? best_new : best_int) = result.spec;
    };

    if (file.fit_new_node) run_role(FitConfig::Role::NewNode);
    if (file.fit_internal) run_role(FitConfig::Role::Internal);

    LikelihoodReport combined = score_stream(best_new, best_int, g0, tail);
    out.stream() << report_csv_header() << "\n" << report_csv_row(combined) << "\n";
    return 0;
}

int cmd_grow(const std::string& events_path, double warmup,
             const std::string& outer_kind, const std::string& spec,
             const std::string& spec_new, const std::string& spec_int,
             std::uint64_t target_edges, std::uint64_t seed, bool has_seed,
             const std::string& out_path) {
    if (!has_seed) throw ConfigError("grow needs an explicit --seed");
    std::string new_text = !spec_new.empty() ? spec_new : spec;
    std::string int_text = !spec_int.empty() ? spec_int : spec;
    if (new_text.empty() || int_text.empty()) {
        throw ConfigError("grow needs --spec or --spec-new/--spec-int");
    }
    ModelSpec model_new = ModelSpec::parse(new_text);
    ModelSpec model_int = ModelSpec::parse(int_text);

    EventStream stream = load_events_file(events_path);
    auto [g0, tail] = split_warmup(stream, warmup);

    OuterModel outer;
    if (outer_kind == "replay") {
        outer = OuterModel::replay_of(tail);
    } else if (outer_kind == "empirical") {
        outer = empirical_outer_from(tail);
    } else {
        throw ConfigError("--outer must be replay or empirical");
    }

    GrowthResult grown =
        grow(g0, outer, model_new, model_int, target_edges, seed);

    EventStream result;
    result.header.push_back("# grown from " + events_path);
    result.header.push_back("# seed: " + std::to_string(seed) +
                            "  outer: " + outer_kind);
    result.header.push_back("# spec-new: " + model_new.str());
    result.header.push_back("# spec-int: " + model_int.str());
    for (NodeId a = 0; a < g0.node_count(); ++a) {
        for (NodeId b : g0.neighbors(a)) {
            if (a < b) result.seed_edges.emplace_back(a, b);
        }
    }
    result.events = grown.events;
    Output out(out_path);
    save_events(result, out.stream());

    std::cerr << "grew to " << grown.graph.edge_count() << " edges, "
              << grown.graph.node_count() << " nodes; events "
              << grown.events.size() << "; skipped internal ops "
              << grown.skipped_internal << "\n";
    return 0;
}

int cmd_stats(const std::string& events_path, const std::string& checkpoints_text,
              const std::string& out_path) {
    EventStream stream = load_events_file(events_path);
    std::vector<std::uint64_t> checkpoints =
        parse_checkpoints(checkpoints_text, stream);
    Graph g0 = stream.seed_graph();
    auto rows = trajectory(g0, stream.events, checkpoints);
    Output out(out_path);
    out.stream() << stats_csv_header() << "\n";
    for (const auto& [edges, snap] : rows) {
        out.stream() << stats_csv_row(snap) << "\n";
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& csv_paths,
                const std::string& out_path) {
    Output out(out_path);
    out.stream() << "label," << stats_csv_header() << "\n";
    for (const std::string& path : csv_paths) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open " + path);
        std::string label = path;
        std::size_t slash = label.find_last_of('/');
        if (slash != std::string::npos) label = label.substr(slash + 1);
        std::size_t dot = label.find_last_of('.');
        if (dot != std::string::npos && dot > 0) label = label.substr(0, dot);

        std::string line;
        if (!std::getline(in, line)) throw Error("empty trajectory file: " + path);
        if (line != stats_csv_header()) {
            throw Error(path + " is not a trajectory CSV (unexpected header)");
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            out.stream() << label << ',' << line << "\n";
        }
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"likelihood-based assessment and generation of network "
                 "evolution models"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "convert a raw edge list into a canonical event file");
    std::string raw_path, format_name = "edges2", out_path;
    IngestConfig ingest_config;
    bool no_dedupe = false, no_delay = false;
    std::int64_t cutoff = 0;
    bool has_cutoff = false;
    ingest->add_option("--raw", raw_path, "raw input file")->required();
    ingest->add_option("--format", format_name,
                       "edges2|edges3|edges4|coauth (default edges2)");
    ingest->add_option("--out", out_path, "output event file (default stdout)");
    ingest->add_option("--cutoff", cutoff,
                       "drop records last seen before this timestamp (edges4)")
        ->each([&](const std::string&) { has_cutoff = true; });
    ingest->add_option("--max-clique", ingest_config.max_clique,
                       "skip co-authorship papers with more authors than this");
    ingest->add_flag("--no-dedupe", no_dedupe, "keep repeated sightings of a pair");
    ingest->add_flag("--no-delay", no_delay,
                     "do not buffer records that would disconnect the graph");

    // likelihood
    auto* likelihood = app.add_subcommand(
        "likelihood", "score model specs against an observed event stream");
    std::string lik_events, lik_out;
    double lik_warmup = 0.0;
    std::vector<std::string> lik_specs, lik_specs_new, lik_specs_int;
    bool ordered_edges = false;
    unsigned lik_threads = 0;
    likelihood->add_option("--events", lik_events, "canonical event file")->required();
    likelihood->add_option("--warmup", lik_warmup,
                           "fraction of events absorbed into G0 (default 0)");
    likelihood->add_option("--spec", lik_specs,
                           "model used for both roles (repeatable)");
    likelihood->add_option("--spec-new", lik_specs_new,
                           "new-node model (pairs with --spec-int)");
    likelihood->add_option("--spec-int", lik_specs_int, "internal-edge model");
    likelihood->add_flag("--ordered-edges", ordered_edges,
                         "score internal edges as ordered draws");
    likelihood->add_option("--threads", lik_threads, "worker threads (0 = auto)");
    likelihood->add_option("--out", lik_out, "output CSV (default stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "fit mixture weights and parameters");
    std::string fit_events, fit_config_path, fit_out;
    double fit_warmup = 0.0;
    unsigned fit_threads = 0;
    fit->add_option("--events", fit_events, "canonical event file")->required();
    fit->add_option("--warmup", fit_warmup, "fraction absorbed into G0");
    fit->add_option("--fit-config", fit_config_path, "key=value fit config")
        ->required();
    fit->add_option("--threads", fit_threads, "worker threads (0 = auto)");
    fit->add_option("--out", fit_out, "output (default stdout)");

    // grow
    auto* grow_cmd = app.add_subcommand("grow", "grow an artificial network");
    std::string grow_events, grow_outer = "replay", grow_spec, grow_spec_new,
                grow_spec_int, grow_out;
    double grow_warmup = 0.0;
    std::uint64_t target_edges = 0, grow_seed = 0;
    bool has_seed = false;
    grow_cmd->add_option("--events", grow_events,
                         "event file supplying G0 and the outer model")
        ->required();
    grow_cmd->add_option("--warmup", grow_warmup, "fraction absorbed into G0");
    grow_cmd->add_option("--outer", grow_outer, "replay|empirical (default replay)");
    grow_cmd->add_option("--spec", grow_spec, "model for both roles");
    grow_cmd->add_option("--spec-new", grow_spec_new, "new-node model");
    grow_cmd->add_option("--spec-int", grow_spec_int, "internal-edge model");
    grow_cmd->add_option("--target-edges", target_edges, "stop at this edge count")
        ->required();
    grow_cmd->add_option("--seed", grow_seed, "RNG seed (required)")
        ->each([&](const std::string&) { has_seed = true; });
    grow_cmd->add_option("--out", grow_out, "output event file (default stdout)");

    // stats
    auto* stats_cmd =
        app.add_subcommand("stats", "statistic trajectory of an event stream");
    std::string stats_events, stats_checkpoints = "auto10", stats_out;
    stats_cmd->add_option("--events", stats_events, "canonical event file")
        ->required();
    stats_cmd->add_option("--checkpoints", stats_checkpoints,
                          "edge counts 'a,b,c' or autoN (default auto10)");
    stats_cmd->add_option("--out", stats_out, "output CSV (default stdout)");

    // compare
    auto* compare_cmd = app.add_subcommand(
        "compare", "merge trajectory CSVs into one labeled long-form CSV");
    std::vector<std::string> compare_files;
    std::string compare_out;
    compare_cmd->add_option("files", compare_files, "trajectory CSV files")
        ->required()
        ->expected(-2);
    compare_cmd->add_option("--out", compare_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            ingest_config.dedupe = !no_dedupe;
            ingest_config.delay_disconnected = !no_delay;
            if (has_cutoff) ingest_config.final_window_cutoff = cutoff;
            return cmd_ingest(raw_path, format_name, out_path, ingest_config);
        }
        if (*likelihood) {
            return cmd_likelihood(lik_events, lik_warmup, lik_specs, lik_specs_new,
                                  lik_specs_int, ordered_edges, lik_threads, lik_out);
        }
        if (*fit) {
            return cmd_fit(fit_events, fit_warmup, fit_config_path, fit_threads,
                           fit_out);
        }
        if (*grow_cmd) {
            return cmd_grow(grow_events, grow_warmup, grow_outer, grow_spec,
                            grow_spec_new, grow_spec_int, target_edges, grow_seed,
                            has_seed, grow_out);
        }
        if (*stats_cmd) {
            return cmd_stats(stats_events, stats_checkpoints, stats_out);
        }
        if (*compare_cmd) {
            return cmd_compare(compare_files, compare_out);
        }
    } catch (const AllZeroStepsError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const EmptyChoiceSetError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const SpecError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace netevo
