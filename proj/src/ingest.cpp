#include "netevo/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace netevo {

namespace {

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

class NameTable {
public:
    std::uint32_t id_of(const std::string& name) {
        auto [it, inserted] = index_.try_emplace(name, names_.size());
        if (inserted) names_.push_back(name);
        return static_cast<std::uint32_t>(it->second);
    }
    std::vector<std::string> take() { return std::move(names_); }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> names_;
};

}  // namespace

std::string normalize_author(std::string_view name) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '.') {
            if (!cur.empty()) tokens.push_back(cur);
            cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    if (tokens.empty()) return "";
    if (tokens.size() == 1) return tokens[0];
    return tokens.front().substr(0, 1) + " " + tokens.back();
}

std::vector<CoauthPaper> parse_coauthorship(std::istream& in) {
    std::vector<CoauthPaper> papers;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t bar1 = line.find('|');
        std::size_t bar2 = bar1 == std::string::npos ? std::string::npos
                                                     : line.find('|', bar1 + 1);
        if (bar2 == std::string::npos) {
            throw ParseError("expected paper_id|timestamp|authors", line_no);
        }
        CoauthPaper paper;
        paper.id = line.substr(0, bar1);
        std::string ts = line.substr(bar1 + 1, bar2 - bar1 - 1);
        char* end = nullptr;
        paper.timestamp = std::strtoll(ts.c_str(), &end, 10);
        if (end == ts.c_str() || *end != '\0') {
            throw ParseError("bad timestamp '" + ts + "'", line_no);
        }
        std::string authors = line.substr(bar2 + 1);
        std::string author;
        std::istringstream split(authors);
        while (std::getline(split, author, ';')) {
            std::string norm = normalize_author(author);
            if (!norm.empty()) paper.authors.push_back(norm);
        }
        if (paper.authors.empty()) {
            throw ParseError("paper with no authors", line_no);
        }
        // Collapse same-name authors on one paper (normalization collisions).
        std::sort(paper.authors.begin(), paper.authors.end());
        paper.authors.erase(
            std::unique(paper.authors.begin(), paper.authors.end()),
            paper.authors.end());
        papers.push_back(std::move(paper));
    }
    return papers;
}

CoauthExpansion expand_coauthorship(std::span<const CoauthPaper> papers,
                                    std::uint32_t max_clique) {
    CoauthExpansion out;
    NameTable names;
    std::unordered_set<std::uint64_t> seen;
    std::size_t index = 0;
    for (const CoauthPaper& paper : papers) {
        if (paper.authors.size() > max_clique) {
            out.skipped_papers.push_back(paper.id);
            continue;
        }
        for (std::size_t i = 0; i < paper.authors.size(); ++i) {
            for (std::size_t j = i + 1; j < paper.authors.size(); ++j) {
                ++out.emitted_pairs;
                std::uint32_t a = names.id_of(paper.authors[i]);
                std::uint32_t b = names.id_of(paper.authors[j]);
                if (!seen.insert(pair_key(a, b)).second) continue;  // first paper wins
                RawEdgeRecord rec;
                rec.src = a;
                rec.dst = b;
                rec.first_seen = paper.timestamp;
                rec.index = index++;
                out.stream.records.push_back(rec);
            }
        }
    }
    out.stream.names = names.take();
    return out;
}

RawStream parse_edge_stream(std::istream& in, RawFormat format,
                            const IngestConfig& config) {
    if (format == RawFormat::Coauth) {
        auto papers = parse_coauthorship(in);
        CoauthExpansion expansion = expand_coauthorship(papers, config.max_clique);
        return std::move(expansion.stream);
    }

    RawStream out;
    NameTable names;
    std::unordered_set<std::uint64_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream fields(line);
        std::string src, dst;
        if (!(fields >> src >> dst)) {
            throw ParseError("expected 'src dst'", line_no);
        }
        RawEdgeRecord rec;
        if (format == RawFormat::Edges3 || format == RawFormat::Edges4) {
            if (!(fields >> rec.first_seen)) {
                throw ParseError("expected a first-seen timestamp", line_no);
            }
        }
        if (format == RawFormat::Edges4) {
            if (!(fields >> rec.last_seen)) {
                throw ParseError("expected a last-seen timestamp", line_no);
            }
        }
        std::string extra;
        if (fields >> extra) throw ParseError("trailing fields", line_no);
        if (src == dst) {
            throw SelfLoopRecordError("self-loop record '" + src + " " + dst + "'",
                                      line_no);
        }
        if (config.final_window_cutoff) {
            if (format != RawFormat::Edges4) {
                throw ConfigError(
                    "final-window cutoff needs the four-column format with "
                    "last-seen timestamps");
            }
            if (rec.last_seen < *config.final_window_cutoff) {
                ++out.dropped_by_cutoff;
                continue;
            }
        }
        rec.src = names.id_of(src);
        rec.dst = names.id_of(dst);
        if (config.dedupe && !seen.insert(pair_key(rec.src, rec.dst)).second) {
            ++out.dropped_duplicates;
            continue;
        }
        rec.line = line_no;
        rec.index = out.records.size();
        out.records.push_back(rec);
    }
    out.names = names.take();
    return out;
}

RawStream parse_edge_stream_file(const std::string& path, RawFormat format,
                                 const IngestConfig& config) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_edge_stream(in, format, config);
}

OrderedStream order_and_delay(const RawStream& raw, const IngestConfig& config) {
    std::vector<RawEdgeRecord> records = raw.records;
    bool timestamped = !records.empty() && records.front().first_seen >= 0;
    if (timestamped) {
        std::stable_sort(records.begin(), records.end(),
                         [](const RawEdgeRecord& a, const RawEdgeRecord& b) {
                             return a.first_seen < b.first_seen;
                         });
    }

    OrderedStream out;
    std::unordered_map<std::uint32_t, NodeId> dense;  // raw id -> node id
    std::unordered_set<std::uint64_t> edges;          // over dense ids
    auto known = [&](std::uint32_t rawid) { return dense.contains(rawid); };
    auto assign = [&](std::uint32_t rawid) {
        NodeId id = static_cast<NodeId>(out.node_names.size());
        dense.emplace(rawid, id);
        out.node_names.push_back(rawid < raw.names.size() ? raw.names[rawid]
                                                          : std::to_string(rawid));
        return id;
    };

    // Merge bookkeeping: the arrival event still open for coalescing.
    bool merge_open = false;
    NodeId merge_node = 0;
    std::int64_t merge_first_seen = -1;
    std::size_t merge_last_index = 0;

    auto apply = [&](const RawEdgeRecord& rec) -> bool {
        bool src_known = known(rec.src);
        bool dst_known = known(rec.dst);
        if (!src_known && !dst_known) {
            if (!out.node_names.empty()) return false;  // must wait for an anchor
            // Seed edge: the first two nodes of the starting graph.
            NodeId a = assign(rec.src);
            NodeId b = assign(rec.dst);
            out.stream.seed_edges.emplace_back(a, b);
            edges.insert(pair_key(a, b));
            merge_open = false;
            return true;
        }
        if (src_known && dst_known) {
            NodeId a = dense[rec.src], b = dense[rec.dst];
            if (!edges.insert(pair_key(a, b)).second) {
                ++out.duplicate_edges;
                return true;  // consumed, nothing to emit
            }
            bool same_sighting = timestamped
                                     ? rec.first_seen == merge_first_seen
                                     : rec.index == merge_last_index + 1;
            if (merge_open && same_sighting && (a == merge_node || b == merge_node)) {
                // Another first-sighting edge of the node that just arrived.
                out.stream.events.back().targets.push_back(a == merge_node ? b : a);
                merge_last_index = rec.index;
                return true;
            }
            out.stream.events.push_back(EdgeEvent::internal_edge(
                a, b, static_cast<std::int64_t>(out.stream.events.size())));
            merge_open = false;
            return true;
        }
        // Exactly one endpoint known: a node arrival.
        std::uint32_t fresh_raw = src_known ? rec.dst : rec.src;
        NodeId target = dense[src_known ? rec.src : rec.dst];
        NodeId fresh = assign(fresh_raw);
        edges.insert(pair_key(fresh, target));
        out.stream.events.push_back(EdgeEvent::new_node(
            {target}, static_cast<std::int64_t>(out.stream.events.size())));
        merge_open = true;
        merge_node = fresh;
        merge_first_seen = rec.first_seen;
        merge_last_index = rec.index;
        return true;
    };

    std::deque<RawEdgeRecord> pending;
    auto drain = [&] {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t i = 0; i < pending.size();) {
                if (apply(pending[i])) {
                    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
                    progress = true;
                } else {
                    ++i;
                }
            }
        }
    };

    for (const RawEdgeRecord& rec : records) {
        if (!config.delay_disconnected) {
            if (!apply(rec)) out.residual.push_back(rec);
            continue;
        }
        if (apply(rec)) {
            drain();
        } else {
            pending.push_back(rec);
        }
    }
    out.residual.insert(out.residual.end(), pending.begin(), pending.end());
    return out;
}

std::pair<Graph, std::vector<EdgeEvent>> split_warmup(const EventStream& stream,
                                                      double warmup) {
    if (!(warmup >= 0.0) || warmup >= 1.0) {
        throw ConfigError("warmup fraction must lie in [0, 1)");
    }
    Graph g0 = stream.seed_graph();
    std::size_t cut = static_cast<std::size_t>(
        std::floor(warmup * static_cast<double>(stream.events.size())));
    for (std::size_t i = 0; i < cut; ++i) {
        apply_event(g0, stream.events[i]);
    }
    std::vector<EdgeEvent> tail(stream.events.begin() + static_cast<std::ptrdiff_t>(cut),
                                stream.events.end());
    if (tail.empty()) {
        throw ConfigError("warm-up consumed the whole stream; nothing left to score");
    }
    return {std::move(g0), std::move(tail)};
}

}  // namespace netevo
