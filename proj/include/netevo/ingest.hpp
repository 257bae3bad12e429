#ifndef NETEVO_INGEST_HPP
#define NETEVO_INGEST_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netevo/errors.hpp"
#include "netevo/events.hpp"
#include "netevo/graph.hpp"

namespace netevo {

/// Self-loop raw record ("a a"); a parse error with a line number.
class SelfLoopRecordError : public ParseError {
public:
    using ParseError::ParseError;
};

/// One raw edge sighting. src/dst index the owning RawStream's name table;
/// timestamps are -1 when the format has none.
struct RawEdgeRecord {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    std::int64_t first_seen = -1;
    std::int64_t last_seen = -1;
    std::size_t line = 0;   // 1-based source line
    std::size_t index = 0;  // position in parse order
};

struct RawStream {
    std::vector<RawEdgeRecord> records;
    std::vector<std::string> names;  // external id per table index
    std::uint64_t dropped_duplicates = 0;
    std::uint64_t dropped_by_cutoff = 0;
};

enum class RawFormat : std::uint8_t {
    Edges2,  // src dst
    Edges3,  // src dst first_seen
    Edges4,  // src dst first_seen last_seen
    Coauth,  // paper_id|timestamp|author1;author2;...
};

struct IngestConfig {
    double warmup = 0.05;  // fraction of events applied into G0
    std::optional<std::int64_t> final_window_cutoff;
    bool delay_disconnected = true;
    bool dedupe = true;
    std::uint32_t max_clique = 59;  // co-authorship expansion limit
};

/// Parses a raw edge list (or co-authorship file) into records in file
/// order, mapping external ids to dense table indices on first
/// appearance. Honors config.dedupe (keep first sighting of a pair) and
/// config.final_window_cutoff (drop records last seen before the cutoff;
/// needs the four-column format).
RawStream parse_edge_stream(std::istream& in, RawFormat format,
                            const IngestConfig& config);
RawStream parse_edge_stream_file(const std::string& path, RawFormat format,
                                 const IngestConfig& config);

/// order_and_delay output: a self-contained event stream over dense node
/// ids plus everything that could not be applied.
struct OrderedStream {
    EventStream stream;
    std::vector<RawEdgeRecord> residual;   // never became applicable
    std::uint64_t duplicate_edges = 0;     // already-present edges skipped here
    std::vector<std::string> node_names;   // dense id -> external id
};

/// Orders records by first sighting (stable; parse order when there are no
/// timestamps) and introduces them greedily: an edge is applied when at
/// least one endpoint is already in the connected component, otherwise it
/// waits in a FIFO buffer that is rescanned after every applied edge.
/// Consecutive same-sighting edges of one arriving node coalesce into a
/// single arrival event with ordered targets. The first record seeds the
/// starting graph. Never-applicable records are reported, not dropped
/// silently.
OrderedStream order_and_delay(const RawStream& raw, const IngestConfig& config);

/// Applies the first floor(warmup * |events|) events to the stream's seed
/// graph, returning the warmed-up G0 and the remaining tail to score.
/// Throws ConfigError when nothing remains.
std::pair<Graph, std::vector<EdgeEvent>> split_warmup(const EventStream& stream,
                                                      double warmup);

struct CoauthPaper {
    std::string id;
    std::int64_t timestamp = 0;
    std::vector<std::string> authors;  // normalized
};

struct CoauthExpansion {
    RawStream stream;
    std::uint64_t emitted_pairs = 0;          // pre-dedup, non-skipped papers
    std::vector<std::string> skipped_papers;  // author count > max_clique
};

std::vector<CoauthPaper> parse_coauthorship(std::istream& in);

/// Expands each paper with at most max_clique authors into all author
/// pairs at the paper's timestamp; larger papers are skipped and listed.
/// Duplicate pairs keep their first occurrence.
CoauthExpansion expand_coauthorship(std::span<const CoauthPaper> papers,
                                    std::uint32_t max_clique);

/// "R. G. Clegg" -> "r clegg": first initial plus lowercased surname.
std::string normalize_author(std::string_view name);

}  // namespace netevo

#endif  // NETEVO_INGEST_HPP
