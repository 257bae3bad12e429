#include <doctest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "helpers.hpp"
#include "netevo/stats.hpp"

using namespace netevo;

TEST_CASE("triangle statistics") {
    StatsSnapshot k3 = snapshot(helpers::complete(3));
    CHECK(k3.clustering == 1.0);
    CHECK(k3.d1_fraction == 0.0);
    CHECK(k3.max_degree == 2);
    CHECK(k3.mean_sq_degree == 4.0);
    CHECK(k3.mean_degree == 2.0);
    CHECK(std::isnan(k3.assortativity));  // regular graph: zero variance

    StatsSnapshot k4 = snapshot(helpers::complete(4));
    CHECK(k4.clustering == 1.0);
}

TEST_CASE("star statistics") {
    StatsSnapshot s = snapshot(helpers::star(3));
    CHECK(s.clustering == 0.0);
    CHECK(s.mean_sq_degree == 3.0);  // (9 + 1 + 1 + 1) / 4
    CHECK(s.assortativity == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.d1_fraction == 0.75);
    CHECK(s.d2_fraction == 0.0);
    CHECK(s.max_degree == 3);
}

TEST_CASE("triangle-free graphs have zero clustering") {
    CHECK(snapshot(helpers::path(7)).clustering == 0.0);
    CHECK(snapshot(helpers::seed_pair()).clustering == 0.0);  // no 2-paths either
    CHECK(snapshot(helpers::cycle(8)).clustering == 0.0);
}

TEST_CASE("snapshot matches the brute-force oracle") {
    std::mt19937_64 rng(1234);
    for (int round = 0; round < 40; ++round) {
        auto [g, events] = helpers::random_evolution(rng, 50, 90);
        for (const EdgeEvent& ev : events) apply_event(g, ev);
        StatsSnapshot s = snapshot(g);
        brute::Stats b = brute::stats(g);
        REQUIRE(s.d1_fraction == doctest::Approx(b.d1).epsilon(1e-9));
        REQUIRE(s.d2_fraction == doctest::Approx(b.d2).epsilon(1e-9));
        REQUIRE(s.max_degree == b.max_degree);
        REQUIRE(s.mean_sq_degree == doctest::Approx(b.mean_sq).epsilon(1e-9));
        REQUIRE(s.mean_degree == doctest::Approx(b.mean).epsilon(1e-9));
        REQUIRE(s.clustering == doctest::Approx(b.clustering).epsilon(1e-9));
        if (std::isnan(b.assortativity)) {
            REQUIRE(std::isnan(s.assortativity));
        } else {
            REQUIRE(s.assortativity == doctest::Approx(b.assortativity).epsilon(1e-9));
        }
    }
}

TEST_CASE("empty graphs cannot be measured") {
    CHECK_THROWS_AS(snapshot(Graph()), Error);
}

TEST_CASE("trajectories emit at checkpoints") {
    std::mt19937_64 rng(99);
    auto [g0, events] = helpers::random_evolution(rng, 40, 60);

    Graph final_graph = g0;
    for (const EdgeEvent& ev : events) apply_event(final_graph, ev);
    std::uint64_t final_edges = final_graph.edge_count();

    SUBCASE("single checkpoint equals the final snapshot") {
        std::vector<std::uint64_t> cp{final_edges};
        auto rows = trajectory(g0, events, cp);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].first == final_edges);
        CHECK(rows[0].second.mean_sq_degree ==
              snapshot(final_graph).mean_sq_degree);
        CHECK(rows[0].second.n_nodes == final_graph.node_count());
    }

    SUBCASE("no checkpoints, no output") {
        CHECK(trajectory(g0, events, {}).empty());
    }

    SUBCASE("ten evenly spaced checkpoints") {
        std::vector<std::uint64_t> cps;
        for (int i = 1; i <= 10; ++i) cps.push_back(final_edges * i / 10);
        auto rows = trajectory(g0, events, cps);
        REQUIRE(rows.size() == 10);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].first >= cps[i]);
        }
        CHECK(rows.back().second.n_edges == final_edges);
    }

    SUBCASE("checkpoints must increase") {
        std::vector<std::uint64_t> bad{5, 5};
        CHECK_THROWS_AS(trajectory(g0, events, bad), ConfigError);
    }

    SUBCASE("checkpoint at or below the seed emits the seed state") {
        std::vector<std::uint64_t> cp{1};
        auto rows = trajectory(g0, events, cp);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].first == g0.edge_count());
    }
}

TEST_CASE("csv output shape") {
    CHECK(stats_csv_header() ==
          "edges,nodes,d1,d2,maxd,meansqd,clustering,assortativity,meand");
    std::string row = stats_csv_row(snapshot(helpers::star(3)));
    CHECK(std::count(row.begin(), row.end(), ',') == 8);
    CHECK(row.substr(0, 4) == "3,4,");
    CHECK(row.find("-1") != std::string::npos);  // assortativity

    std::string nan_row = stats_csv_row(snapshot(helpers::cycle(5)));
    CHECK(nan_row.find("nan") != std::string::npos);
}
