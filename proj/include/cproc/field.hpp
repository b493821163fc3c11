#pragma once
#include <memory>
#include <vector>

#include "cproc/graph.hpp"
#include "cproc/rng.hpp"

namespace cproc {

// One realized event of the graphical construction. Arrows carry a label in
// (0, lambda_max]; a run at rate lambda uses only arrows with label <= lambda,
// which couples runs at different rates on the same field.
struct FieldEvent {
    double time;
    double label;  // unused for recoveries
    int32_t u;     // recovery vertex, or arrow source
    int32_t v;     // -1 for recovery, else arrow destination
    bool is_recovery() const { return v < 0; }
};

struct Arrow {
    double time;
    double label;
};

struct FieldCaps {
    double max_expected_events = 3.0e7;
    // Skip the per-stream copies and build only the merged event list (the
    // event sequence itself is unchanged). Estimator replicas use this.
    bool events_only = false;
};

// Realized recovery marks and transmission arrows on [0, horizon], plus a
// merged, totally ordered event list. Regenerating from the same
// (graph, lambda_max, horizon, seed) reproduces the field bit-exactly, and a
// field with a larger horizon extends a smaller one event-for-event.
// Immutable after sampling.
class GraphicalField {
public:
    std::shared_ptr<const RootedGraph> graph;
    double lambda_max = 0.0;
    double horizon = 0.0;
    uint64_t seed = 0;

    std::vector<std::vector<double>> recoveries;  // per vertex
    std::vector<std::vector<Arrow>> arrows;       // per directed edge
    std::vector<FieldEvent> events;               // global order: (time, kind, stream, index)

    int directed_edge_count() const { return static_cast<int>(arrows.size()); }
    // Directed edge numbering: undirected edge k = (a < b) yields a->b at 2k
    // and b->a at 2k+1. Stream ids: vertex v -> v, directed edge j -> n + j.
    std::pair<int, int> directed_endpoints(int dir_index) const;

    size_t event_count() const { return events.size(); }
    uint64_t content_hash() const;

    // Debug dump: one JSON record per event {stream, time, label?}, in global
    // order. Not a stability-guaranteed format.
    std::string dump_events_jsonl() const;
};

GraphicalField sample_field(std::shared_ptr<const RootedGraph> graph, double lambda_max,
                            double horizon, uint64_t seed, const FieldCaps& caps = {});

// Read-only view of the arrows with label <= lambda. Views at smaller rates
// select subsets of views at larger rates, exactly.
class ArrowView {
public:
    ArrowView(const GraphicalField& field, double lambda) : field_(&field), lambda_(lambda) {}
    double lambda() const { return lambda_; }
    size_t count() const;
    template <typename F>  // F(dir_index, time, label)
    void for_each(F&& f) const {
        for (int j = 0; j < field_->directed_edge_count(); ++j)
            for (const Arrow& a : field_->arrows[static_cast<size_t>(j)])
                if (a.label <= lambda_) f(j, a.time, a.label);
    }

private:
    const GraphicalField* field_;
    double lambda_;
};

ArrowView filter_arrows(const GraphicalField& field, double lambda);

// Events in [s, t] with time r mapped to t - r and arrows reversed; ordered by
// reversed time. This is the substrate of the time dual.
std::vector<FieldEvent> reversed_window(const GraphicalField& field, double s, double t);

}  // namespace cproc
