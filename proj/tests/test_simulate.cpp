#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "cproc/simulate.hpp"
#include "helpers.hpp"

using namespace cproc;
using namespace cproc::testutil;

namespace {
std::shared_ptr<const RootedGraph> segment(int ell) {
    return std::make_shared<const RootedGraph>(build_segment(ell));
}

uint64_t pack(const Configuration& c) {
    uint64_t bits = 0;
    for (int v : c) bits |= 1ULL << v;
    return bits;
}
}  // namespace

TEST_CASE("empty initial set is absorbed immediately") {
    auto g = segment(3);
    const GraphicalField f = sample_field(g, 1.0, 10.0, 1);
    const Trajectory traj = run(f, 1.0, {});
    REQUIRE(traj.extinction_time.has_value());
    CHECK(*traj.extinction_time == 0.0);
    CHECK(traj.total_occupation() == 0.0);
    for (double h : traj.hit_time) CHECK(h < 0.0);
}

TEST_CASE("single vertex dies at its first recovery mark") {
    auto g = std::make_shared<const RootedGraph>(single_vertex_graph());
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const GraphicalField f = sample_field(g, 1e-9, 30.0, derive_seed(99, i));
        const Trajectory traj = run(f, 0.0, {0});
        REQUIRE(traj.extinction_time.has_value());
        CHECK(*traj.extinction_time == f.recoveries[0].front());
        CHECK(traj.occupation[0] == *traj.extinction_time);
        sum += *traj.extinction_time;
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("edge hit probability approximates lambda/(1+lambda)") {
    auto g = segment(1);
    int hits = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const GraphicalField f = sample_field(g, 1.0, 50.0, derive_seed(12345, i));
        RunOptions opts;
        opts.stop_on_hit = 1;
        const Trajectory traj = run(f, 1.0, {0}, opts);
        if (traj.hit_time[1] >= 0.0) ++hits;
    }
    const double p = static_cast<double>(hits) / n;
    CHECK(p == doctest::Approx(0.5).epsilon(0.025));
}

TEST_CASE("run agrees with the infection-path oracle") {
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const uint64_t seed = derive_seed(777000, trial);
        auto g = random_connected_graph(seed, 6);
        const double lambda_max = 2.0;
        const double horizon = 1.0 + (trial % 5);
        const GraphicalField f = sample_field(g, lambda_max, horizon, seed);
        CounterRng rng(seed, 99);
        const double lambda = rng.next_unit() * lambda_max;
        Configuration initial = random_subset(rng, g->vertex_count(), 0.5);
        const Trajectory traj = run(f, lambda, initial);
        const std::vector<uint8_t> expect = oracle_config_at(f, lambda, initial, horizon);
        Configuration expect_set;
        for (int v = 0; v < g->vertex_count(); ++v)
            if (expect[static_cast<size_t>(v)]) expect_set.push_back(v);
        REQUIRE(traj.final_config == expect_set);
        ++checked;
    }
    CHECK(checked == 500);
}

TEST_CASE("coupled runs equal independent runs exactly") {
    auto g = random_connected_graph(4242, 10);
    const GraphicalField f = sample_field(g, 2.0, 15.0, 4242);
    const Configuration a = {0};
    const Configuration b = all_vertices(*g);
    const auto coupled = run_coupled(f, {0.7, 2.0}, {a, b});
    const Trajectory alone0 = run(f, 0.7, a);
    const Trajectory alone1 = run(f, 2.0, b);
    CHECK(coupled[0].occupation == alone0.occupation);
    CHECK(coupled[0].hit_time == alone0.hit_time);
    CHECK(coupled[0].extinction_time == alone0.extinction_time);
    CHECK(coupled[1].occupation == alone1.occupation);
    CHECK(coupled[1].extinction_time == alone1.extinction_time);

    const auto twins = run_coupled(f, {1.0, 1.0}, {a, a});
    CHECK(twins[0].occupation == twins[1].occupation);
    CHECK(twins[0].hit_time == twins[1].hit_time);
}

TEST_CASE("monotone coupling in rate and initial set") {
    for (int trial = 0; trial < 200; ++trial) {
        const uint64_t seed = derive_seed(31337, trial);
        auto g = random_connected_graph(seed, 12);
        const GraphicalField f = sample_field(g, 2.0, 8.0, seed);
        CounterRng rng(seed, 98);
        const double lam1 = rng.next_unit() * 2.0;
        const double lam2 = lam1 + rng.next_unit() * (2.0 - lam1);
        Configuration a = random_subset(rng, g->vertex_count(), 0.3);
        Configuration a2 = a;
        for (int v = 0; v < g->vertex_count(); ++v)
            if (rng.next_unit() < 0.3) a2.push_back(v);
        a2 = normalize_configuration(a2, g->vertex_count());

        std::vector<std::vector<std::pair<double, uint64_t>>> traces;
        run_coupled(f, {lam1, lam2}, {a, a2}, {}, &traces);
        REQUIRE(traces[0].size() == traces[1].size());
        for (size_t i = 0; i < traces[0].size(); ++i) {
            const uint64_t small = traces[0][i].second;
            const uint64_t big = traces[1][i].second;
            REQUIRE((small & ~big) == 0);  // inclusion at every event time
        }
    }
}

TEST_CASE("additivity of infection paths") {
    for (int trial = 0; trial < 200; ++trial) {
        const uint64_t seed = derive_seed(55001, trial);
        auto g = random_connected_graph(seed, 12);
        const GraphicalField f = sample_field(g, 1.5, 8.0, seed);
        CounterRng rng(seed, 97);
        const double lambda = rng.next_unit() * 1.5;
        Configuration a = random_subset(rng, g->vertex_count(), 0.3);
        Configuration b = random_subset(rng, g->vertex_count(), 0.3);
        Configuration ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        ab = normalize_configuration(ab, g->vertex_count());

        std::vector<std::vector<std::pair<double, uint64_t>>> traces;
        run_coupled(f, {lambda, lambda, lambda}, {a, b, ab}, {}, &traces);
        for (size_t i = 0; i < traces[0].size(); ++i)
            REQUIRE((traces[0][i].second | traces[1][i].second) == traces[2][i].second);
    }
}

TEST_CASE("occupation equals the integral of the infected count") {
    for (int trial = 0; trial < 50; ++trial) {
        const uint64_t seed = derive_seed(60601, trial);
        auto g = random_connected_graph(seed, 10);
        const GraphicalField f = sample_field(g, 1.5, 10.0, seed);
        std::vector<std::pair<double, uint64_t>> trace;
        RunOptions opts;
        opts.event_trace = &trace;
        const Configuration initial = {0};
        const Trajectory traj = run(f, 1.2, initial, opts);

        double integral = 0.0;
        double prev_t = 0.0;
        uint64_t prev_bits = pack(initial);
        for (const auto& [t, bits] : trace) {
            integral += std::popcount(prev_bits) * (t - prev_t);
            prev_t = t;
            prev_bits = bits;
        }
        const double end = traj.extinction_time ? *traj.extinction_time : f.horizon;
        integral += std::popcount(prev_bits) * (end - prev_t);
        CHECK(traj.total_occupation() ==
              doctest::Approx(integral).epsilon(1e-9));
    }
}

TEST_CASE("hit times and occupation are consistent") {
    auto g = random_connected_graph(808, 8);
    const GraphicalField f = sample_field(g, 1.5, 12.0, 808);
    const Trajectory traj = run(f, 1.0, {0});
    for (int v = 0; v < g->vertex_count(); ++v) {
        CHECK((traj.hit_time[v] >= 0.0) == (traj.occupation[v] > 0.0));
        CHECK(traj.occupation[v] <=
              (traj.extinction_time ? *traj.extinction_time : f.horizon) + 1e-12);
    }
    CHECK(traj.hit_time[0] == 0.0);
}

TEST_CASE("snapshots record the configuration at requested times") {
    auto g = segment(2);
    const GraphicalField f = sample_field(g, 1.0, 10.0, 2024);
    RunOptions opts;
    opts.snapshot_times = {0.5, 2.0, 9.5};
    const Trajectory traj = run(f, 1.0, {0}, opts);
    REQUIRE(traj.snapshots.size() == 3);
    for (const auto& [t, config] : traj.snapshots) {
        const std::vector<uint8_t> expect = oracle_config_at(f, 1.0, {0}, t);
        Configuration expect_set;
        for (int v = 0; v < g->vertex_count(); ++v)
            if (expect[static_cast<size_t>(v)]) expect_set.push_back(v);
        CHECK(config == expect_set);
    }
}

TEST_CASE("dual of a zero-length window is the target") {
    auto g = segment(2);
    const GraphicalField f = sample_field(g, 1.0, 10.0, 3030);
    const DualTrajectory d = run_dual(f, 1.0, {1, 2}, 4.0, 4.0);
    CHECK(d.config_at_start == Configuration{1, 2});
    CHECK_THROWS_AS(run_dual(f, 1.0, {0}, 5.0, 4.0), ConfigError);
}

TEST_CASE("dual inclusion holds exactly on shared fields") {
    for (int trial = 0; trial < 500; ++trial) {
        const uint64_t seed = derive_seed(70707, trial);
        auto g = random_connected_graph(seed, 6);
        const GraphicalField f = sample_field(g, 1.5, 6.0, seed);
        CounterRng rng(seed, 96);
        const double lambda = 0.5 + rng.next_unit();
        const int x = static_cast<int>(rng.next_u64() % g->vertex_count());
        const int y = static_cast<int>(rng.next_u64() % g->vertex_count());
        const double s = rng.next_unit() * 3.0;
        const double t = s + rng.next_unit() * (6.0 - s);

        RunOptions opts;
        opts.snapshot_times = {s, t};
        const Trajectory forward = run(f, lambda, {x}, opts);
        const DualTrajectory dual = run_dual(f, lambda, {y}, s, t);

        const uint64_t fwd_s = pack(forward.snapshots[0].second);
        const uint64_t dual_s = pack(dual.config_at_start);
        const bool meets = (fwd_s & dual_s) != 0;
        const bool y_infected_at_t = pack(forward.snapshots[1].second) & (1ULL << y);
        if (meets) REQUIRE(y_infected_at_t);
    }
}

TEST_CASE("dual occupation probability matches the forward law") {
    auto g = segment(2);
    const double t = 2.0;
    int fwd_hits = 0, dual_hits = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const GraphicalField f1 = sample_field(g, 1.0, t, derive_seed(505, i));
        RunOptions opts;
        opts.snapshot_times = {t};
        const Trajectory fwd = run(f1, 1.0, {0}, opts);
        if (pack(fwd.snapshots[0].second) & (1ULL << 2)) ++fwd_hits;

        const GraphicalField f2 = sample_field(g, 1.0, t, derive_seed(606, i));
        const DualTrajectory dual = run_dual(f2, 1.0, {2}, 0.0, t);
        if (pack(dual.config_at_start) & 1ULL) ++dual_hits;
    }
    // P(y in xi^{x}_t) == P(x in dual of {y}); both are Monte Carlo here
    const double p_fwd = static_cast<double>(fwd_hits) / n;
    const double p_dual = static_cast<double>(dual_hits) / n;
    CHECK(std::fabs(p_fwd - p_dual) < 0.015);
}

TEST_CASE("confined runs") {
    auto g = segment(3);
    const GraphicalField f = sample_field(g, 1.5, 10.0, 901);

    std::vector<uint8_t> all_mask(4, 1);
    const Trajectory confined_all = confined_occupation(f, 1.0, {0}, all_mask);
    const Trajectory free_run = run(f, 1.0, {0});
    CHECK(confined_all.occupation == free_run.occupation);
    CHECK(confined_all.extinction_time == free_run.extinction_time);

    std::vector<uint8_t> solo(4, 0);
    solo[0] = 1;
    const Trajectory confined_solo = confined_occupation(f, 1.0, {0}, solo);
    REQUIRE(confined_solo.extinction_time.has_value());
    CHECK(*confined_solo.extinction_time == f.recoveries[0].front());

    CHECK_THROWS_AS(confined_occupation(f, 1.0, {0, 1}, solo), ConfigError);

    // confined trajectory is dominated by the unconfined one on a shared field
    for (int trial = 0; trial < 100; ++trial) {
        const uint64_t seed = derive_seed(111213, trial);
        auto gg = random_connected_graph(seed, 10);
        const GraphicalField ff = sample_field(gg, 1.5, 8.0, seed);
        std::vector<uint8_t> mask(static_cast<size_t>(gg->vertex_count()), 0);
        CounterRng rng(seed, 95);
        mask[0] = 1;
        for (int v = 1; v < gg->vertex_count(); ++v)
            mask[static_cast<size_t>(v)] = rng.next_unit() < 0.6 ? 1 : 0;
        RunOptions copts;
        copts.confine_mask = &mask;
        std::vector<std::pair<double, uint64_t>> trace_conf, trace_free;
        RunOptions fopts;
        fopts.event_trace = &trace_free;
        copts.event_trace = &trace_conf;
        run(ff, 1.0, {0}, copts);
        run(ff, 1.0, {0}, fopts);
        REQUIRE(trace_conf.size() == trace_free.size());
        for (size_t i = 0; i < trace_conf.size(); ++i)
            REQUIRE((trace_conf[i].second & ~trace_free[i].second) == 0);
    }
}

TEST_CASE("clamped source realizes the window event") {
    auto g = segment(1);
    const GraphicalField f = sample_field(g, 1.0, 10.0, 77);
    RunOptions opts;
    opts.clamp_vertex = 0;
    opts.clamp_until = 5.0;
    const Trajectory traj = run(f, 1.0, {0}, opts);
    // the clamped vertex never heals inside the window
    CHECK(traj.occupation[0] >= 5.0);
    REQUIRE((traj.extinction_time ? *traj.extinction_time : 10.0) >= 5.0);
}

TEST_CASE("rate preconditions") {
    auto g = segment(1);
    const GraphicalField f = sample_field(g, 1.0, 5.0, 3);
    CHECK_THROWS_AS(run(f, 1.5, {0}), ConfigError);
    CHECK_THROWS_AS(run(f, -0.5, {0}), ConfigError);
    CHECK_THROWS_AS(run_coupled(f, {1.0, 0.5}, {{0}, {0}}), ConfigError);
    CHECK_THROWS_AS(run(f, 1.0, {7}), ConfigError);
}
