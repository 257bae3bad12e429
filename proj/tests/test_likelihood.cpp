#include <doctest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "helpers.hpp"
#include "netevo/likelihood.hpp"

using namespace netevo;

namespace {

const ModelSpec kNull = ModelSpec::pure(Component::null());
const ModelSpec kDegree = ModelSpec::pure(Component::degree());

}  // namespace

TEST_CASE("single step log-likelihoods") {
    SUBCASE("null arrival into a 4-node graph") {
        Graph g = helpers::path(4);
        auto [lp, choices] =
            step_log_likelihood(kNull, kNull, g, EdgeEvent::new_node({2}));
        CHECK(lp == doctest::Approx(std::log(0.25)).epsilon(1e-12));
        CHECK(choices == 1);
    }
    SUBCASE("degree-proportional choice of the star center") {
        Graph g = helpers::star(3);
        auto [lp, choices] =
            step_log_likelihood(kDegree, kDegree, g, EdgeEvent::new_node({0}));
        CHECK(lp == doctest::Approx(std::log(0.5)).epsilon(1e-12));
        CHECK(choices == 1);
    }
    SUBCASE("recency miss has probability zero") {
        Graph g = helpers::path(4);
        g.record_selection(1);
        ModelSpec recent = ModelSpec::pure(Component::recent(1));
        auto [lp, choices] =
            step_log_likelihood(recent, recent, g, EdgeEvent::new_node({3}));
        CHECK(lp == -std::numeric_limits<double>::infinity());
        CHECK(choices == 1);
    }
    SUBCASE("multi-target arrivals count one choice per target") {
        Graph g = helpers::path(4);
        auto [lp, choices] =
            step_log_likelihood(kNull, kNull, g, EdgeEvent::new_node({0, 3}));
        CHECK(choices == 2);
        CHECK(lp == doctest::Approx(std::log(0.25) + std::log(1.0 / 3)).epsilon(1e-12));
    }
}

TEST_CASE("two-event stream by hand") {
    // K2 seed; node 2 arrives choosing node 0 (p = 1/2 under degree);
    // node 3 arrives choosing node 2 (p = 1/4). Null gives 1/2 then 1/3.
    Graph g0 = helpers::seed_pair();
    std::vector<EdgeEvent> events{EdgeEvent::new_node({0}, 0),
                                  EdgeEvent::new_node({2}, 1)};
    LikelihoodReport r = score_stream(kDegree, kDegree, g0, events);
    CHECK(r.t == 2);
    CHECK(r.log_likelihood == doctest::Approx(std::log(1.0 / 8)).epsilon(1e-12));
    CHECK(r.null_log_likelihood ==
          doctest::Approx(std::log(1.0 / 6)).epsilon(1e-12));
    CHECK(r.c0 == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    CHECK(r.deviance == doctest::Approx(-2.0 * r.log_likelihood).epsilon(1e-15));
    CHECK(r.aic == doctest::Approx(-2.0 * r.log_likelihood).epsilon(1e-15));  // k = 0
    CHECK(r.zero_probability_events.empty());
}

TEST_CASE("the null spec scores c0 = 1 exactly") {
    std::mt19937_64 rng(777);
    for (int round = 0; round < 10; ++round) {
        auto [g0, events] = helpers::random_evolution(rng, 60, 120);
        LikelihoodReport r = score_stream(kNull, kNull, g0, events);
        CHECK(r.c0 == 1.0);  // bit-exact
        CHECK(r.log_likelihood == r.null_log_likelihood);
        CHECK(r.new_node.c0() == 1.0);
        CHECK(r.internal.c0() == 1.0);
    }
}

TEST_CASE("zero-probability events are flagged and evaluation continues") {
    Graph g0 = helpers::seed_pair();
    // Under recent(1), the second and third arrivals' choices were not the
    // most recent selection.
    std::vector<EdgeEvent> events{EdgeEvent::new_node({0}, 0),
                                  EdgeEvent::new_node({1}, 1),
                                  EdgeEvent::new_node({0}, 2)};
    ModelSpec recent = ModelSpec::pure(Component::recent(1));
    LikelihoodReport r = score_stream(recent, recent, g0, events);
    CHECK(r.log_likelihood == -std::numeric_limits<double>::infinity());
    CHECK(r.c0 == 0.0);
    CHECK(r.t == 3);
    REQUIRE(r.zero_probability_events.size() == 2);
    CHECK(r.zero_probability_events[0] == 1);
    CHECK(r.zero_probability_events[1] == 2);
    CHECK(std::isinf(r.deviance));
}

TEST_CASE("log-space evaluation equals the probability product") {
    std::mt19937_64 rng(808);
    for (int round = 0; round < 12; ++round) {
        auto [g0, events] = helpers::random_evolution(rng, 14, 16);
        ModelSpec spec = helpers::random_spec(rng);

        LikelihoodReport r = score_stream(spec, spec, g0, events);
        if (!r.zero_probability_events.empty()) continue;

        double product = 1.0;
        Graph g = g0;
        for (const EdgeEvent& ev : events) {
            if (ev.kind == EdgeEvent::Kind::NewNode) {
                for (std::size_t i = 0; i < ev.targets.size(); ++i) {
                    std::vector<NodeId> excluded(ev.targets.begin(),
                                                 ev.targets.begin() + i);
                    product *= brute::node_probability(spec, ev.targets[i], g, excluded);
                }
            } else {
                product *= brute::edge_probability(spec, ev.a(), ev.b(), g);
            }
            apply_event(g, ev);
        }
        REQUIRE(std::exp(r.log_likelihood) ==
                doctest::Approx(product).epsilon(1e-12));
    }
}

TEST_CASE("scoring strictly precedes application") {
    // Internal edge {0,2} on the path 0-1-2-3, pure degree model. Against
    // the frozen pre-application state the two draw orders give
    // 1/6 * 2/3 + 2/6 * 1 = 4/9; scoring the post state instead would use
    // degrees (2,3,2,1) and yield a different value.
    Graph g0 = helpers::path(4);
    std::vector<EdgeEvent> events{EdgeEvent::internal_edge(0, 2, 0)};
    LikelihoodReport r = score_stream(kDegree, kDegree, g0, events);
    CHECK(r.log_likelihood == doctest::Approx(std::log(4.0 / 9)).epsilon(1e-12));

    // Arrival targeting a degree-1 node; applying first would remove node 0
    // from the singleton support and yield probability zero.
    ModelSpec singleton = ModelSpec::pure(Component::singleton());
    std::vector<EdgeEvent> arrival{EdgeEvent::new_node({0}, 0)};
    LikelihoodReport s = score_stream(singleton, singleton, g0, arrival);
    CHECK(s.log_likelihood == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(s.zero_probability_events.empty());
}

TEST_CASE("reports are deterministic and carry the stream identity") {
    std::mt19937_64 rng(11);
    auto [g0, events] = helpers::random_evolution(rng, 30, 50);
    ModelSpec spec{{{0.8, Component::degree()}, {0.2, Component::recent(3)}}};
    LikelihoodReport a = score_stream(spec, kNull, g0, events);
    LikelihoodReport b = score_stream(spec, kNull, g0, events);
    CHECK(a.log_likelihood == b.log_likelihood);
    CHECK(a.c0 == b.c0);
    CHECK(a.stream_hash == b.stream_hash);
    CHECK(a.stream_hash == stream_identity(g0, events));

    // a different stream hashes differently
    auto [g1, other] = helpers::random_evolution(rng, 30, 50);
    CHECK(stream_identity(g1, other) != a.stream_hash);
}

TEST_CASE("per-choice ratios order and compare reports") {
    std::mt19937_64 rng(22);
    auto [g0, events] = helpers::random_evolution(rng, 40, 80);

    std::vector<LikelihoodReport> reports;
    reports.push_back(score_stream(kNull, kNull, g0, events));
    reports.push_back(score_stream(kDegree, kDegree, g0, events));
    ModelSpec pfp = ModelSpec::pure(Component::pfp(0.1));
    reports.push_back(score_stream(pfp, pfp, g0, events));

    auto ranking = compare_reports(reports);
    REQUIRE(ranking.size() == 3);
    CHECK(ranking[0].c0 >= ranking[1].c0);
    CHECK(ranking[1].c0 >= ranking[2].c0);
    CHECK(ranking[0].ratio_to_best == 1.0);
    CHECK(ranking[2].ratio_to_best ==
          doctest::Approx(ranking[2].c0 / ranking[0].c0).epsilon(1e-12));

    SUBCASE("single report ranks as itself") {
        std::vector<LikelihoodReport> one{reports[0]};
        auto r = compare_reports(one);
        REQUIRE(r.size() == 1);
        CHECK(r[0].input_index == 0);
        CHECK(r[0].ratio_to_best == 1.0);
    }
    SUBCASE("identical reports give ratio one") {
        std::vector<LikelihoodReport> twice{reports[1], reports[1]};
        auto r = compare_reports(twice);
        CHECK(r[0].ratio_to_best == 1.0);
        CHECK(r[1].ratio_to_best == 1.0);
    }
    SUBCASE("mismatched streams refuse to compare") {
        auto [h0, other] = helpers::random_evolution(rng, 40, 80);
        std::vector<LikelihoodReport> bad{reports[0],
                                          score_stream(kNull, kNull, h0, other)};
        CHECK_THROWS_AS(compare_reports(bad), IncomparableError);
    }
}

TEST_CASE("aic counts free mixture weights and nonlinear parameters") {
    std::mt19937_64 rng(33);
    auto [g0, events] = helpers::random_evolution(rng, 20, 30);
    ModelSpec mix{{{0.5, Component::degree()},
                   {0.3, Component::pfp(-0.1)},
                   {0.2, Component::recent(2)}}};
    LikelihoodReport r = score_stream(mix, kNull, g0, events);
    // (3 - 1) free betas + delta + window for the mixture, 0 for null
    CHECK(r.k == 4);
    CHECK(r.aic == doctest::Approx(2.0 * 4 - 2.0 * r.log_likelihood).epsilon(1e-12));
}

TEST_CASE("report serialization") {
    std::mt19937_64 rng(44);
    auto [g0, events] = helpers::random_evolution(rng, 20, 30);
    LikelihoodReport r = score_stream(kDegree, kNull, g0, events);

    std::string kv = report_keyvalue(r);
    CHECK(kv.find("spec_new=degree") != std::string::npos);
    CHECK(kv.find("spec_int=null") != std::string::npos);
    CHECK(kv.find("c0=") != std::string::npos);
    CHECK(kv.find("stream_hash=") != std::string::npos);

    std::string row = report_csv_row(r);
    std::string header = report_csv_header();
    std::size_t commas = std::count(row.begin(), row.end(), ',');
    std::size_t header_commas = std::count(header.begin(), header.end(), ',');
    CHECK(commas == header_commas);
}

TEST_CASE("ordered internal-edge scoring is exposed as an option") {
    Graph g0 = helpers::path(3);
    std::vector<EdgeEvent> events{EdgeEvent::internal_edge(0, 2, 0)};
    ScoreOptions ordered{.ordered_edges = true};
    LikelihoodReport sym = score_stream(kNull, kNull, g0, events);
    LikelihoodReport ord = score_stream(kNull, kNull, g0, events, ordered);
    CHECK(sym.c0 == 1.0);
    CHECK(ord.c0 == 1.0);  // null against null stays 1 in either convention
    CHECK(ord.log_likelihood < sym.log_likelihood);  // one order, not both
}

TEST_CASE("the arrival-only fast path matches the reference replay") {
    std::mt19937_64 rng(987);
    std::vector<ModelSpec> specs{
        ModelSpec::pure(Component::null()),
        ModelSpec::pure(Component::degree()),
        ModelSpec::pure(Component::pfp(-0.15)),
        ModelSpec{{{0.5, Component::degree()},
                   {0.3, Component::pfp(0.05)},
                   {0.2, Component::singleton()}}},
        ModelSpec{{{0.6, Component::recent(2)}, {0.4, Component::doubleton()}}},
    };
    for (int round = 0; round < 12; ++round) {
        // arrival-only stream with mixed target counts
        Graph sim = helpers::seed_pair();
        std::vector<EdgeEvent> events;
        for (int i = 0; i < 60; ++i) {
            std::size_t want =
                std::min<std::size_t>(1 + rng() % 3, sim.node_count());
            std::vector<NodeId> targets;
            while (targets.size() < want) {
                NodeId t = static_cast<NodeId>(rng() % sim.node_count());
                if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
                    targets.push_back(t);
                }
            }
            EdgeEvent ev = EdgeEvent::new_node(std::move(targets),
                                               static_cast<std::int64_t>(i));
            apply_event(sim, ev);
            events.push_back(std::move(ev));
        }
        Graph g0 = helpers::seed_pair();

        const ModelSpec& spec = specs[round % specs.size()];
        ScoreOptions reference{.no_fast_path = true};
        LikelihoodReport fast = score_stream(spec, kNull, g0, events);
        LikelihoodReport slow = score_stream(spec, kNull, g0, events, reference);

        REQUIRE(fast.t == slow.t);
        REQUIRE(fast.stream_hash == slow.stream_hash);
        REQUIRE(fast.zero_probability_events == slow.zero_probability_events);
        if (std::isinf(slow.log_likelihood)) {
            REQUIRE(std::isinf(fast.log_likelihood));
        } else {
            REQUIRE(fast.log_likelihood ==
                    doctest::Approx(slow.log_likelihood).epsilon(1e-12));
            REQUIRE(fast.null_log_likelihood ==
                    doctest::Approx(slow.null_log_likelihood).epsilon(1e-12));
            REQUIRE(fast.c0 == doctest::Approx(slow.c0).epsilon(1e-12));
        }
    }

    // null against itself stays exactly one through the fast path too
    Graph g0 = helpers::seed_pair();
    std::vector<EdgeEvent> events{EdgeEvent::new_node({0}, 0),
                                  EdgeEvent::new_node({1}, 1),
                                  EdgeEvent::new_node({2}, 2)};
    LikelihoodReport null_report = score_stream(kNull, kNull, g0, events);
    CHECK(null_report.c0 == 1.0);

    // zero-probability flags survive the fast path
    ModelSpec recent1 = ModelSpec::pure(Component::recent(1));
    LikelihoodReport zeros = score_stream(recent1, recent1, g0, events);
    CHECK(zeros.c0 == 0.0);
    CHECK_FALSE(zeros.zero_probability_events.empty());
}
