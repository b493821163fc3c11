#pragma once
#include <optional>
#include <string>
#include <vector>

#include "cproc/field.hpp"

namespace cproc {

// Infected set, as a sorted list of vertex indices. The empty set is
// absorbing under the dynamics.
using Configuration = std::vector<int>;

Configuration normalize_configuration(Configuration c, int vertex_count);
Configuration all_vertices(const RootedGraph& g);

// Stop a run as soon as the number of currently infected vertices among
// `vertices` reaches `required`.
struct WatchSet {
    std::vector<int> vertices;
    int64_t required = 1;
};

struct RunOptions {
    // Restrict dynamics to a vertex subset (1 = inside); events touching the
    // complement are ignored.
    const std::vector<uint8_t>* confine_mask = nullptr;
    // Hold one vertex infected on [0, clamp_until]: recoveries there are
    // ignored inside the window. Realizes infection paths that may start
    // anywhere in {clamp_vertex} x [0, clamp_until].
    int clamp_vertex = -1;
    double clamp_until = 0.0;
    // Early exits. A trajectory that stopped early reports only what it saw.
    int stop_on_hit = -1;
    const WatchSet* watch = nullptr;
    int occupation_watch_vertex = -1;
    double occupation_watch_threshold = 0.0;

    std::vector<double> snapshot_times;  // must be ascending
    double occupation_split = -1.0;      // also accumulate occupation after this time
    // Per-event (time, packed configuration); requires <= 64 vertices.
    std::vector<std::pair<double, uint64_t>>* event_trace = nullptr;
};

struct Trajectory {
    double lambda = 0.0;
    double horizon = 0.0;
    Configuration initial;
    // nullopt = still alive at the horizon.
    std::optional<double> extinction_time;
    std::vector<double> occupation;        // total infected time per vertex
    std::vector<double> hit_time;          // first infection time, -1 = never
    std::vector<double> occupation_after;  // empty unless occupation_split was set
    std::vector<std::pair<double, Configuration>> snapshots;

    Configuration final_config;  // infected set when the sweep stopped

    bool stopped_early = false;
    bool watch_reached = false;
    double watch_time = -1.0;
    bool occupation_watch_reached = false;

    bool alive_at_horizon() const { return !extinction_time.has_value(); }
    double total_occupation() const;
    std::string to_json_string() const;
};

// Evolve the contact process at rate lambda on a fixed field: recoveries heal,
// arrows with label <= lambda infect. Equivalent to the infection-path
// definition on the same field.
Trajectory run(const GraphicalField& field, double lambda, const Configuration& initial,
               const RunOptions& opts = {});

// Evolve several processes in one pass over the events. Results are identical
// to independent run() calls on the same field. lambdas must be nondecreasing.
std::vector<Trajectory> run_coupled(
    const GraphicalField& field, const std::vector<double>& lambdas,
    const std::vector<Configuration>& initials, const RunOptions& opts = {},
    std::vector<std::vector<std::pair<double, uint64_t>>>* traces = nullptr);

struct DualTrajectory {
    double window_start = 0.0;
    double window_end = 0.0;
    Configuration target;
    // x is in config_at_start iff there is a lambda-infection path from
    // (x, window_start) to target x {window_end}.
    Configuration config_at_start;
};

DualTrajectory run_dual(const GraphicalField& field, double lambda,
                        const Configuration& target, double s, double t);

// Process restricted to the masked subgraph, on the same field as unconfined
// runs (used as a conditioning event).
Trajectory confined_occupation(const GraphicalField& field, double lambda,
                               const Configuration& initial,
                               const std::vector<uint8_t>& mask);

}  // namespace cproc
