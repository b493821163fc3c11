#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cproc/exact.hpp"
#include "helpers.hpp"

using namespace cproc;

namespace {
GeneratorModel model(const RootedGraph& g, double lambda) {
    return GeneratorModel{std::make_shared<const RootedGraph>(g), lambda};
}

// all connected graphs on n labeled vertices, as edge lists
std::vector<RootedGraph> connected_graphs(int n) {
    std::vector<std::pair<int, int>> all_edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) all_edges.emplace_back(u, v);
    std::vector<RootedGraph> out;
    for (uint32_t mask = 0; mask < (1u << all_edges.size()); ++mask) {
        std::vector<std::pair<int, int>> edges;
        for (size_t i = 0; i < all_edges.size(); ++i)
            if (mask & (1u << i)) edges.push_back(all_edges[i]);
        RootedGraph g(n, std::move(edges));
        if (g.connected()) out.push_back(std::move(g));
    }
    return out;
}
}  // namespace

TEST_CASE("edge hit probability matches the closed form") {
    // two-vertex first-step analysis: lambda / (1 + lambda)
    for (double lam : {0.5, 1.0, 2.0}) {
        const double p = exact_hit_probability(model(build_segment(1), lam), {0}, 1);
        CHECK(p == doctest::Approx(lam / (1.0 + lam)).epsilon(1e-12));
    }
}

TEST_CASE("hit probability boundary cases") {
    const auto m = model(build_segment(2), 1.0);
    CHECK(exact_hit_probability(m, {0, 2}, 2) == 1.0);  // target already infected
    CHECK(exact_hit_probability(m, {}, 2) == 0.0);
    CHECK(exact_hit_probability(model(build_segment(2), 0.0), {0}, 2) == 0.0);
}

TEST_CASE("segment hit probability frozen value and independent solver route") {
    // 8-state first-step solve on the path 0-1-2; hand-derivable value 4/13
    auto m = model(build_segment(2), 1.0);
    const double dense = exact_hit_probability(m, {0}, 2);
    CHECK(dense == doctest::Approx(4.0 / 13.0).epsilon(1e-12));
    m.use_iterative = true;
    CHECK(exact_hit_probability(m, {0}, 2) == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("expected extinction") {
    CHECK(exact_expected_extinction(model(single_vertex_graph(), 1.0), {}) == 0.0);
    CHECK(exact_expected_extinction(model(single_vertex_graph(), 1.0), {0}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // single edge, lambda = 1, both infected: solves to exactly 2
    auto m = model(build_segment(1), 1.0);
    CHECK(exact_expected_extinction(m, {0, 1}) == doctest::Approx(2.0).epsilon(1e-12));
    m.use_iterative = true;
    CHECK(exact_expected_extinction(m, {0, 1}) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("survival at fixed times") {
    const auto m = model(single_vertex_graph(), 0.7);
    CHECK(exact_survival_at(m, {0}, 0.0) == 1.0);
    for (double t : {0.25, 1.0, 2.0, 10.0})
        CHECK(exact_survival_at(m, {0}, t) == doctest::Approx(std::exp(-t)).epsilon(1e-9));
    CHECK(exact_survival_at(m, {}, 3.0) == 0.0);
}

TEST_CASE("hit probability by time: edge closed form") {
    // race of two unit-rate clocks from {0}: P(hit by t) = (1 - e^{-2t}) / 2
    const auto m = model(build_segment(1), 1.0);
    for (double t : {0.5, 1.0, 2.0, 5.0})
        CHECK(exact_hit_probability_by(m, {0}, 1, t) ==
              doctest::Approx((1.0 - std::exp(-2.0 * t)) / 2.0).epsilon(1e-9));
    CHECK(exact_hit_probability_by(m, {0, 1}, 1, 0.0) == 1.0);
    // converges to the ever-hit probability
    CHECK(exact_hit_probability_by(m, {0}, 1, 60.0) ==
          doctest::Approx(exact_hit_probability(m, {0}, 1)).epsilon(1e-9));
}

TEST_CASE("markov bound on extinction from full occupancy") {
    // P(dead at s) <= s / E[extinction time], exactly, on every small model
    for (int n = 2; n <= 4; ++n)
        for (const RootedGraph& g : connected_graphs(n))
            for (double lam : {0.5, 1.0, 2.0}) {
                const auto m = model(g, lam);
                const Configuration full = all_vertices(g);
                const double mean_ext = exact_expected_extinction(m, full);
                for (double s : {0.5, 1.0, 2.0, 4.0}) {
                    const double dead = 1.0 - exact_survival_at(m, full, s);
                    CHECK(dead <= s / mean_ext + 1e-9);
                }
            }
}

TEST_CASE("reachability lower bound on segments") {
    // P(hit within graph distance) >= (e^{-2} (1 - e^{-lambda}))^dist
    for (int ell = 1; ell <= 4; ++ell)
        for (double lam : {0.5, 1.0, 2.0}) {
            const auto m = model(build_segment(ell), lam);
            const double p = exact_hit_probability_by(m, {0}, ell, ell);
            const double bound =
                std::pow(std::exp(-2.0) * (1.0 - std::exp(-lam)), ell);
            CHECK(p >= bound);
        }
}

TEST_CASE("hit probability is monotone in lambda") {
    const RootedGraph g = build_segment(3);
    double prev = 0.0;
    for (double lam : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
        const double p = exact_hit_probability(model(g, lam), {0}, 3);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("cap enforcement") {
    GeneratorModel m{std::make_shared<const RootedGraph>(build_segment(12)), 1.0};
    CHECK_THROWS_AS(exact_hit_probability(m, {0}, 12), ConfigError);  // 13 vertices > cap
    m.use_iterative = true;  // iterative route allows it
    CHECK(exact_hit_probability(m, {0}, 12) > 0.0);
}

TEST_CASE("uniformization matches the dense hit solve on random graphs") {
    for (int trial = 0; trial < 10; ++trial) {
        auto g = cproc::testutil::random_connected_graph(derive_seed(414243, trial), 6);
        GeneratorModel m{g, 0.8};
        const int target = g->vertex_count() - 1;
        const double ever = exact_hit_probability(m, {0}, target);
        const double by_large_t = exact_hit_probability_by(m, {0}, target, 200.0);
        CHECK(by_large_t == doctest::Approx(ever).epsilon(1e-8));
    }
}
