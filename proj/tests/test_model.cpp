#include <doctest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "helpers.hpp"
#include "netevo/events.hpp"
#include "netevo/model.hpp"

using namespace netevo;

TEST_CASE("component weights") {
    Graph g = helpers::star(3);  // center degree 3
    CHECK(Component::degree().weight(0, g, {}) == 3.0);
    CHECK(Component::null().weight(2, g, {}) == 1.0);
    CHECK(Component::singleton().weight(1, g, {}) == 1.0);
    CHECK(Component::singleton().weight(0, g, {}) == 0.0);

    Graph h = helpers::star(7);
    CHECK(Component::pfp(0.0).weight(0, h, {}) == doctest::Approx(7.0).epsilon(1e-12));

    Graph k = helpers::star(10);
    // 10^(1 + 0.05 * log10 10) = 10^1.05
    CHECK(Component::pfp(0.05).weight(0, k, {}) ==
          doctest::Approx(11.220184543019636).epsilon(1e-12));
}

TEST_CASE("spec validation") {
    CHECK_NOTHROW(ModelSpec::pure(Component::degree()).validate());

    ModelSpec paper_mix{{{0.5, Component::degree()},
                         {0.4, Component::pfp(0.05)},
                         {0.1, Component::singleton()}}};
    CHECK_NOTHROW(paper_mix.validate());

    ModelSpec bad_sum{{{0.7, Component::degree()}, {0.7, Component::null()}}};
    CHECK_THROWS_AS(bad_sum.validate(), SpecError);

    ModelSpec dup{{{0.5, Component::degree()}, {0.5, Component::degree()}}};
    CHECK_THROWS_AS(dup.validate(), SpecError);

    ModelSpec bad_window{{{1.0, Component::recent(0)}}};
    CHECK_THROWS_AS(bad_window.validate(), SpecError);

    ModelSpec negative{{{-0.1, Component::degree()}, {1.1, Component::null()}}};
    CHECK_THROWS_AS(negative.validate(), SpecError);
}

TEST_CASE("spec parsing") {
    ModelSpec mix = ModelSpec::parse(" 0.5*degree + 0.4 * pfp(0.05) + 0.1*singleton ");
    REQUIRE(mix.terms.size() == 3);
    CHECK(mix.terms[0].beta == 0.5);
    CHECK(mix.terms[1].component.kind == ComponentKind::Pfp);
    CHECK(mix.terms[1].component.delta == 0.05);
    CHECK(mix.terms[2].component.kind == ComponentKind::Singleton);

    CHECK(ModelSpec::parse("null").terms[0].component.kind == ComponentKind::Null);
    CHECK(ModelSpec::parse("recent(3)").terms[0].component.window == 3);
    CHECK(ModelSpec::parse("TRIANGLE").terms[0].component.kind ==
          ComponentKind::Triangle);
    CHECK(ModelSpec::parse("doubleton").terms[0].component.kind ==
          ComponentKind::Doubleton);

    CHECK_THROWS_AS(ModelSpec::parse(""), SpecError);
    CHECK_THROWS_AS(ModelSpec::parse("0.7*degree + 0.7*null"), SpecError);
    CHECK_THROWS_AS(ModelSpec::parse("pfp"), SpecError);
    CHECK_THROWS_AS(ModelSpec::parse("recent(2.5)"), SpecError);
    CHECK_THROWS_AS(ModelSpec::parse("degree(2)"), SpecError);
    CHECK_THROWS_AS(ModelSpec::parse("wobble"), SpecError);

    // round trip
    std::mt19937_64 rng(7);
    for (int i = 0; i < 40; ++i) {
        ModelSpec spec = helpers::random_spec(rng);
        ModelSpec reparsed = ModelSpec::parse(spec.str());
        REQUIRE(reparsed.terms.size() == spec.terms.size());
        for (std::size_t t = 0; t < spec.terms.size(); ++t) {
            CHECK(reparsed.terms[t].component == spec.terms[t].component);
            CHECK(reparsed.terms[t].beta ==
                  doctest::Approx(spec.terms[t].beta).epsilon(1e-9));
        }
    }
}

TEST_CASE("node probabilities on the star") {
    Graph g = helpers::star(3);

    ModelEvaluator degree(ModelSpec::pure(Component::degree()), g);
    CHECK(degree.node_probability(0, {}) == 0.5);

    ModelEvaluator null(ModelSpec::pure(Component::null()), g);
    for (NodeId v = 0; v < 4; ++v) CHECK(null.node_probability(v, {}) == 0.25);

    ModelSpec half{{{0.5, Component::degree()}, {0.5, Component::singleton()}}};
    ModelEvaluator mix(half, g);
    CHECK(mix.node_probability(1, {}) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mix.node_probability(0, {}) == doctest::Approx(0.25).epsilon(1e-12));
    double total = 0.0;
    for (NodeId v = 0; v < 4; ++v) total += mix.node_probability(v, {});
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("probability errors") {
    Graph g = helpers::star(3);
    ModelEvaluator eval(ModelSpec::pure(Component::null()), g);
    CHECK_THROWS_AS(eval.node_probability(9, {}), UnknownNodeError);
    // a degenerate excluded list that covers the whole node range
    std::vector<NodeId> everything{1, 2, 3, 1};
    CHECK_THROWS_AS(eval.node_probability(0, everything), EmptyChoiceSetError);
    std::vector<NodeId> all{0, 1, 2, 3};
    CHECK_THROWS_AS(eval.node_probability(1, all), Error);
    CHECK_THROWS_AS(eval.edge_probability(1, 1), SelfLoopError);
    CHECK_THROWS_AS(eval.edge_probability(0, 1), DuplicateEdgeError);
}

TEST_CASE("empty-support components are dropped and renormalized") {
    Graph g = helpers::complete(4);  // nobody has degree 1
    ModelSpec mix{{{0.5, Component::degree()}, {0.5, Component::singleton()}}};
    ModelEvaluator eval(mix, g);
    for (NodeId v = 0; v < 4; ++v) {
        CHECK(eval.node_probability(v, {}) ==
              doctest::Approx(0.25).epsilon(1e-12));
        CHECK(eval.node_probability(v, {}) ==
              doctest::Approx(brute::node_probability(mix, v, g, {}))
                  .epsilon(1e-12));
    }

    // all supports empty: uniform fallback
    Graph h = helpers::path(4);
    ModelEvaluator recent(ModelSpec::pure(Component::recent(3)), h);
    CHECK(recent.node_probability(2, {}) == 0.25);
}

TEST_CASE("pfp(0) equals degree pointwise") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 20; ++round) {
        auto [g, events] = helpers::random_evolution(rng, 30, 40);
        for (const EdgeEvent& ev : events) apply_event(g, ev);
        ModelEvaluator pfp(ModelSpec::pure(Component::pfp(0.0)), g);
        ModelEvaluator deg(ModelSpec::pure(Component::degree()), g);
        for (NodeId v = 0; v < g.node_count(); ++v) {
            REQUIRE(pfp.node_probability(v, {}) ==
                    doctest::Approx(deg.node_probability(v, {})).epsilon(1e-12));
        }
    }
}

TEST_CASE("probabilities sum to one and match the oracle") {
    std::mt19937_64 rng(4242);
    for (int round = 0; round < 50; ++round) {
        auto [g, events] = helpers::random_evolution(rng, 40, 60);
        ModelSpec spec = helpers::random_spec(rng);
        ModelEvaluator eval(spec, g);
        ModelEvaluator* evals[] = {&eval};
        for (const EdgeEvent& ev : events) apply_event(g, ev, evals);

        std::vector<NodeId> excluded;
        if (round % 2 == 1) {
            excluded.push_back(static_cast<NodeId>(rng() % g.node_count()));
            NodeId other = static_cast<NodeId>(rng() % g.node_count());
            if (other != excluded[0]) excluded.push_back(other);
        }
        double total = 0.0;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (std::find(excluded.begin(), excluded.end(), v) != excluded.end())
                continue;
            double p = eval.node_probability(v, excluded);
            REQUIRE(p == doctest::Approx(brute::node_probability(spec, v, g, excluded))
                             .epsilon(1e-9));
            total += p;
        }
        REQUIRE(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("running normalizers survive long evolutions") {
    // Exercises the incremental Pfp sums through the note_edge path.
    std::mt19937_64 rng(31337);
    auto [g, events] = helpers::random_evolution(rng, 150, 400);
    ModelSpec spec{{{0.6, Component::pfp(0.13)}, {0.4, Component::pfp(-0.21)}}};
    ModelEvaluator eval(spec, g);
    ModelEvaluator* evals[] = {&eval};
    std::size_t step = 0;
    for (const EdgeEvent& ev : events) {
        apply_event(g, ev, evals);
        if (++step % 37 == 0) {
            NodeId probe = static_cast<NodeId>(rng() % g.node_count());
            REQUIRE(eval.node_probability(probe, {}) ==
                    doctest::Approx(brute::node_probability(spec, probe, g, {}))
                        .epsilon(1e-9));
        }
    }
}

TEST_CASE("internal edge probabilities normalize over legal edges") {
    SUBCASE("null model on the three-leaf star") {
        Graph g = helpers::star(3);
        ModelEvaluator eval(ModelSpec::pure(Component::null()), g);
        // The center is adjacent to everything, so only leaves can start an
        // edge; each of the three leaf pairs gets 1/3.
        double p = eval.edge_probability(1, 2);
        CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
        double total = eval.edge_probability(1, 2) + eval.edge_probability(1, 3) +
                       eval.edge_probability(2, 3);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("singleton support can force the pair") {
        // path 0-1-2-3: exactly nodes 0 and 3 have degree 1, non-adjacent.
        Graph g = helpers::path(4);
        ModelEvaluator eval(ModelSpec::pure(Component::singleton()), g);
        CHECK(eval.edge_probability(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("random graphs, exhaustive") {
        std::mt19937_64 rng(555);
        for (int round = 0; round < 40; ++round) {
            auto [g, events] = helpers::random_evolution(rng, 10, 14);
            for (const EdgeEvent& ev : events) apply_event(g, ev);
            ModelSpec spec = helpers::random_spec(rng);
            ModelEvaluator eval(spec, g);
            double total = 0.0;
            std::size_t legal = 0;
            for (NodeId a = 0; a < g.node_count(); ++a) {
                for (NodeId b = a + 1; b < g.node_count(); ++b) {
                    if (g.has_edge(a, b)) continue;
                    ++legal;
                    double p = eval.edge_probability(a, b);
                    REQUIRE(p == doctest::Approx(brute::edge_probability(spec, a, b, g))
                                     .epsilon(1e-9));
                    total += p;
                }
            }
            if (legal > 0) {
                REQUIRE(total == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }

    SUBCASE("ordered mode normalizes over ordered pairs") {
        Graph g = helpers::path(5);
        ModelEvaluator eval(ModelSpec::pure(Component::degree()), g);
        double total = 0.0;
        for (NodeId a = 0; a < g.node_count(); ++a) {
            for (NodeId b = 0; b < g.node_count(); ++b) {
                if (a == b || g.has_edge(a, b)) continue;
                total += eval.edge_probability_ordered(a, b);
            }
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pfp normalizers stay exact across the periodic recount") {
    // Long enough to cross the 2^16-update recount inside note_edge.
    Graph g0 = helpers::seed_pair();
    ModelSpec spec = ModelSpec::pure(Component::pfp(0.07));
    Graph g = g0;
    ModelEvaluator eval(spec, g);
    ModelEvaluator* evals[] = {&eval};
    std::mt19937_64 rng(607);
    for (int i = 0; i < 70000; ++i) {
        NodeId target = static_cast<NodeId>(rng() % g.node_count());
        apply_event(g, EdgeEvent::new_node({target}, i), evals);
    }
    double z = eval.term_view(0, {}).normalizer;
    double zb = 0.0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        zb += brute::weight(Component::pfp(0.07), v, g);
    }
    CHECK(z == doctest::Approx(zb).epsilon(1e-9));
}
