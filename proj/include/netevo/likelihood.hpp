#ifndef NETEVO_LIKELIHOOD_HPP
#define NETEVO_LIKELIHOOD_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netevo/events.hpp"
#include "netevo/graph.hpp"
#include "netevo/model.hpp"

namespace netevo {

/// Log-likelihood totals restricted to one event kind.
struct RoleTally {
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    std::uint64_t t = 0;
    bool hit_zero = false;

    double c0() const;
};

/// Result of scoring one (new-node spec, internal spec) pair over a stream.
///
/// c0 is the per-choice likelihood ratio against the uniform null model:
/// exp((logL - null logL) / t), reported as 0 when any observed choice had
/// probability zero. deviance = -2 logL; aic = 2k - 2 logL where k counts
/// the free mixture weights (terms - 1 per spec) plus one per Pfp delta and
/// one per recency window.
struct LikelihoodReport {
    std::string spec_new;
    std::string spec_internal;
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    std::uint64_t t = 0;
    double c0 = 1.0;
    double deviance = 0.0;
    double aic = 0.0;
    unsigned k = 0;
    std::vector<std::int64_t> zero_probability_events;
    std::uint64_t stream_hash = 0;

    RoleTally new_node;
    RoleTally internal;
};

struct ScoreOptions {
    /// Score internal edges as ordered first-then-second draws instead of
    /// summing both orders.
    bool ordered_edges = false;
    /// Force the reference graph-replay path even for arrival-only streams
    /// that qualify for the counter-based fast path.
    bool no_fast_path = false;
};

/// Log-probability of one event under the pair of specs, scored against
/// the frozen pre-application state, plus the number of choices it
/// represents. Probability zero yields -infinity.
std::pair<double, std::size_t> step_log_likelihood(
    const ModelSpec& new_spec, const ModelSpec& internal_spec, const Graph& g,
    const EdgeEvent& ev, const ScoreOptions& opts = {});

/// Scores the whole stream from g0: every event is scored against the
/// state before it, then applied (chosen nodes entering the selection
/// log). The null baseline is accumulated over the identical choice sets
/// in the same pass, so a pure-null spec pair yields c0 == 1 exactly.
LikelihoodReport score_stream(const ModelSpec& new_spec,
                              const ModelSpec& internal_spec, const Graph& g0,
                              std::span<const EdgeEvent> events,
                              const ScoreOptions& opts = {});

/// Hash identifying the (G0, events) pair; recorded in reports and checked
/// by compare_reports.
std::uint64_t stream_identity(const Graph& g0, std::span<const EdgeEvent> events);

struct RankedReport {
    std::size_t input_index = 0;
    double c0 = 0.0;
    double ratio_to_best = 1.0;
};

/// Ranks reports by c0, best first. All reports must describe the same
/// stream (equal t and stream_hash); throws IncomparableError otherwise.
std::vector<RankedReport> compare_reports(std::span<const LikelihoodReport> reports);

// Flat text serializations.
std::string report_keyvalue(const LikelihoodReport& r);
std::string report_csv_header();
std::string report_csv_row(const LikelihoodReport& r);

}  // namespace netevo

#endif  // NETEVO_LIKELIHOOD_HPP
