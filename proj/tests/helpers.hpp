#pragma once
// Shared test utilities: a brute-force infection-path oracle and random
// instance generators for coupling checks.
#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "cproc/field.hpp"
#include "cproc/rng.hpp"
#include "cproc/simulate.hpp"

namespace cproc::testutil {

// First-principles reachability over the space-time skeleton: node (v, k) is
// reachable iff some lambda-infection path from initial x {0} puts the
// infection at v during the k-th inter-event interval. Independent of the
// simulator's incremental bookkeeping.
inline std::vector<uint8_t> oracle_config_at(const GraphicalField& f, double lambda,
                                             const Configuration& initial, double t) {
    const int n = f.graph->vertex_count();
    std::vector<const FieldEvent*> events;
    for (const FieldEvent& e : f.events)
        if (e.time <= t) events.push_back(&e);

    std::vector<uint8_t> cur(static_cast<size_t>(n), 0);
    for (int v : initial) cur[static_cast<size_t>(v)] = 1;
    for (const FieldEvent* e : events) {
        std::vector<uint8_t> next(static_cast<size_t>(n), 0);
        for (int v = 0; v < n; ++v) {
            if (!cur[static_cast<size_t>(v)]) continue;
            // survive the event unless it is a recovery at v
            if (!(e->is_recovery() && e->u == v)) next[static_cast<size_t>(v)] = 1;
        }
        if (!e->is_recovery() && e->label <= lambda && cur[static_cast<size_t>(e->u)])
            next[static_cast<size_t>(e->v)] = 1;
        cur.swap(next);
    }
    return cur;
}

// Small connected random graph: a random tree plus a few extra edges.
inline std::shared_ptr<const RootedGraph> random_connected_graph(uint64_t seed, int max_vertices,
                                                                 int extra_edges_max = 3) {
    CounterRng rng(seed, 0);
    const int n = 2 + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(max_vertices - 1));
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v)
        edges.emplace_back(static_cast<int>(rng.next_u64() % static_cast<uint64_t>(v)), v);
    const int extra = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(extra_edges_max + 1));
    for (int i = 0; i < extra; ++i) {
        const int u = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(n));
        const int v = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(n));
        if (u == v) continue;
        const auto e = std::minmax(u, v);
        if (std::find(edges.begin(), edges.end(), std::make_pair(e.first, e.second)) ==
            edges.end())
            edges.emplace_back(e.first, e.second);
    }
    return std::make_shared<const RootedGraph>(n, std::move(edges), 0);
}

inline Configuration random_subset(CounterRng& rng, int n, double p_keep) {
    Configuration c;
    for (int v = 0; v < n; ++v)
        if (rng.next_unit() < p_keep) c.push_back(v);
    return c;
}

}  // namespace cproc::testutil
