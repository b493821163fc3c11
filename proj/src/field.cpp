#include "cproc/field.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

namespace cproc {

std::pair<int, int> GraphicalField::directed_endpoints(int dir_index) const {
    const auto& e = graph->edges()[static_cast<size_t>(dir_index / 2)];
    return (dir_index % 2 == 0) ? e : std::make_pair(e.second, e.first);
}

uint64_t GraphicalField::content_hash() const {
    uint64_t h = 1469598103934665603ULL;
    auto mixin = [&h](uint64_t x) {
        h ^= x;
        h *= 1099511628211ULL;
    };
    auto mixd = [&](double x) {
        uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        mixin(bits);
    };
    mixin(seed);
    mixd(lambda_max);
    mixd(horizon);
    for (const auto& stream : recoveries) {
        mixin(stream.size());
        for (double t : stream) mixd(t);
    }
    for (const auto& stream : arrows) {
        mixin(stream.size());
        for (const Arrow& a : stream) {
            mixd(a.time);
            mixd(a.label);
        }
    }
    return h;
}

std::string GraphicalField::dump_events_jsonl() const {
    const int n = graph->vertex_count();
    std::map<std::pair<int, int>, int> dir_index;
    for (int j = 0; j < directed_edge_count(); ++j) dir_index[directed_endpoints(j)] = j;
    std::ostringstream out;
    char buf[96];
    for (const FieldEvent& e : events) {
        if (e.is_recovery()) {
            std::snprintf(buf, sizeof buf, R"({"stream":%d,"time":%.17g})", e.u, e.time);
            out << buf << "\n";
        } else {
            std::snprintf(buf, sizeof buf, R"({"stream":%d,"time":%.17g,"label":%.17g})",
                          n + dir_index.at({e.u, e.v}), e.time, e.label);
            out << buf << "\n";
        }
    }
    return out.str();
}

GraphicalField sample_field(std::shared_ptr<const RootedGraph> graph, double lambda_max,
                            double horizon, uint64_t seed, const FieldCaps& caps) {
    if (!graph) throw ConfigError("sample_field: null graph");
    if (!(lambda_max > 0.0)) throw ConfigError("sample_field: lambda_max must be positive");
    if (!(horizon > 0.0)) throw ConfigError("sample_field: horizon must be positive");
    const int n = graph->vertex_count();
    const int dir_edges = 2 * static_cast<int>(graph->edges().size());
    const double expected =
        (static_cast<double>(n) + static_cast<double>(dir_edges) * lambda_max) * horizon;
    if (expected > caps.max_expected_events)
        throw ConfigError("sample_field: expected event count " + std::to_string(expected) +
                          " exceeds cap " + std::to_string(caps.max_expected_events));

    GraphicalField f;
    f.graph = std::move(graph);
    f.lambda_max = lambda_max;
    f.horizon = horizon;
    f.seed = seed;
    if (!caps.events_only) {
        f.recoveries.resize(static_cast<size_t>(n));
        f.arrows.resize(static_cast<size_t>(dir_edges));
    }

    // Merged total order: (time, recovery-before-arrow, stream id, in-stream index).
    struct Keyed {
        FieldEvent e;
        int32_t kind;
        int32_t stream;
        int32_t idx;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(static_cast<size_t>(expected * 1.1) + 16);

    for (int v = 0; v < n; ++v) {
        CounterRng rng(seed, static_cast<uint64_t>(v));
        double t = 0.0;
        for (int32_t i = 0;; ++i) {
            t += rng.next_exponential(1.0);
            if (t > horizon) break;
            keyed.push_back({{t, 0.0, v, -1}, 0, v, i});
            if (!caps.events_only) f.recoveries[static_cast<size_t>(v)].push_back(t);
        }
    }
    for (int j = 0; j < dir_edges; ++j) {
        CounterRng rng(seed, static_cast<uint64_t>(n + j));
        const auto& edge = f.graph->edges()[static_cast<size_t>(j / 2)];
        const int u = (j % 2 == 0) ? edge.first : edge.second;
        const int v = (j % 2 == 0) ? edge.second : edge.first;
        double t = 0.0;
        for (int32_t i = 0;; ++i) {
            t += rng.next_exponential(lambda_max);
            if (t > horizon) break;
            // label drawn after the spacing keeps the per-stream draw order
            // fixed, so horizon extension preserves the prefix
            const double label = rng.next_unit() * lambda_max;
            keyed.push_back({{t, label, u, v}, 1, n + j, i});
            if (!caps.events_only)
                f.arrows[static_cast<size_t>(j)].push_back(Arrow{t, label});
        }
    }

    // Event times are spread over [0, horizon], so a bucket scatter followed
    // by tiny per-bucket sorts orders them in near-linear time. The comparator
    // has no ties (stream, index) so any sorting route yields the same order.
    auto cmp = [](const Keyed& a, const Keyed& b) {
        if (a.e.time != b.e.time) return a.e.time < b.e.time;
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.stream != b.stream) return a.stream < b.stream;
        return a.idx < b.idx;
    };
    const size_t total = keyed.size();
    if (total > 64) {
        const size_t buckets = total;
        std::vector<uint32_t> offset(buckets + 1, 0);
        const double scale = static_cast<double>(buckets) / horizon;
        auto bucket_of = [&](double t) {
            return std::min(buckets - 1, static_cast<size_t>(t * scale));
        };
        for (const Keyed& k : keyed) ++offset[bucket_of(k.e.time) + 1];
        for (size_t b = 1; b <= buckets; ++b) offset[b] += offset[b - 1];
        std::vector<Keyed> scattered(total);
        std::vector<uint32_t> cursor(offset.begin(), offset.end() - 1);
        for (const Keyed& k : keyed) scattered[cursor[bucket_of(k.e.time)]++] = k;
        for (size_t b = 0; b < buckets; ++b)
            if (offset[b + 1] - offset[b] > 1)
                std::sort(scattered.begin() + offset[b], scattered.begin() + offset[b + 1],
                          cmp);
        keyed.swap(scattered);
    } else {
        std::sort(keyed.begin(), keyed.end(), cmp);
    }
    f.events.reserve(keyed.size());
    for (const Keyed& k : keyed) f.events.push_back(k.e);
    return f;
}

size_t ArrowView::count() const {
    size_t c = 0;
    for_each([&c](int, double, double) { ++c; });
    return c;
}

ArrowView filter_arrows(const GraphicalField& field, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("filter_arrows: lambda must be positive");
    if (lambda > field.lambda_max)
        throw ConfigError("filter_arrows: lambda exceeds the field's lambda_max");
    return ArrowView(field, lambda);
}

std::vector<FieldEvent> reversed_window(const GraphicalField& field, double s, double t) {
    if (s < 0.0 || t > field.horizon || s > t)
        throw ConfigError("reversed_window: need 0 <= s <= t <= horizon");
    std::vector<FieldEvent> out;
    for (auto it = field.events.rbegin(); it != field.events.rend(); ++it) {
        if (it->time > t || it->time < s) continue;
        FieldEvent e = *it;
        e.time = t - e.time;
        if (!e.is_recovery()) std::swap(e.u, e.v);
        out.push_back(e);
    }
    return out;
}

}  // namespace cproc
