#include "cproc/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace cproc {

Configuration normalize_configuration(Configuration c, int vertex_count) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (int v : c)
        if (v < 0 || v >= vertex_count)
            throw ConfigError("configuration: vertex out of range");
    return c;
}

Configuration all_vertices(const RootedGraph& g) {
    Configuration c(static_cast<size_t>(g.vertex_count()));
    for (int v = 0; v < g.vertex_count(); ++v) c[static_cast<size_t>(v)] = v;
    return c;
}

double Trajectory::total_occupation() const {
    double s = 0.0;
    for (double x : occupation) s += x;
    return s;
}

std::string Trajectory::to_json_string() const {
    nlohmann::json j;
    j["lambda"] = lambda;
    j["horizon"] = horizon;
    j["initial"] = initial;
    if (extinction_time)
        j["extinction_time"] = *extinction_time;
    else
        j["extinction_time"] = nullptr;
    auto occ = nlohmann::json::object();
    auto hits = nlohmann::json::object();
    for (size_t v = 0; v < occupation.size(); ++v) {
        if (occupation[v] > 0.0) occ[std::to_string(v)] = occupation[v];
        if (hit_time[v] >= 0.0) hits[std::to_string(v)] = hit_time[v];
    }
    j["occupation"] = std::move(occ);
    j["hit_times"] = std::move(hits);
    return j.dump(2) + "\n";
}

namespace {

struct ProcState {
    double lambda;
    std::vector<uint8_t> infected;
    std::vector<double> since;
    int64_t count = 0;
    int64_t watch_count = 0;
    bool hit_done = false;
    Trajectory traj;
};

uint64_t pack_config(const std::vector<uint8_t>& infected) {
    uint64_t bits = 0;
    for (size_t v = 0; v < infected.size(); ++v)
        if (infected[v]) bits |= (1ULL << v);
    return bits;
}

Configuration unpack_state(const std::vector<uint8_t>& infected) {
    Configuration c;
    for (size_t v = 0; v < infected.size(); ++v)
        if (infected[v]) c.push_back(static_cast<int>(v));
    return c;
}

std::vector<Trajectory> sweep(const GraphicalField& field, const std::vector<double>& lambdas,
                              const std::vector<Configuration>& initials,
                              const RunOptions& opts,
                              std::vector<std::vector<std::pair<double, uint64_t>>>* traces) {
    const int n = field.graph->vertex_count();
    const size_t k_procs = lambdas.size();
    if (k_procs == 0 || initials.size() != k_procs)
        throw ConfigError("run: lambdas and initials must be nonempty and aligned");
    for (size_t k = 0; k < k_procs; ++k) {
        if (lambdas[k] < 0.0) throw ConfigError("run: lambda must be nonnegative");
        if (lambdas[k] > field.lambda_max * (1.0 + 1e-12))
            throw ConfigError("run: lambda exceeds the field's lambda_max");
        if (k > 0 && lambdas[k] < lambdas[k - 1])
            throw ConfigError("run: lambdas must be nondecreasing");
    }
    const bool tracing = (traces != nullptr) || (opts.event_trace != nullptr);
    if (tracing && n > 64) throw ConfigError("run: event trace requires <= 64 vertices");
    if (traces) traces->assign(k_procs, {});

    const std::vector<uint8_t>* mask = opts.confine_mask;
    if (mask && static_cast<int>(mask->size()) != n)
        throw ConfigError("run: mask size mismatch");
    auto inside = [&](int v) { return !mask || (*mask)[static_cast<size_t>(v)]; };

    std::vector<uint8_t> watched(static_cast<size_t>(n), 0);
    if (opts.watch)
        for (int v : opts.watch->vertices) {
            if (v < 0 || v >= n) throw ConfigError("run: watch vertex out of range");
            watched[static_cast<size_t>(v)] = 1;
        }

    std::vector<ProcState> procs(k_procs);
    for (size_t k = 0; k < k_procs; ++k) {
        ProcState& p = procs[k];
        p.lambda = lambdas[k];
        p.infected.assign(static_cast<size_t>(n), 0);
        p.since.assign(static_cast<size_t>(n), 0.0);
        p.traj.lambda = lambdas[k];
        p.traj.horizon = field.horizon;
        p.traj.initial = normalize_configuration(initials[k], n);
        p.traj.occupation.assign(static_cast<size_t>(n), 0.0);
        p.traj.hit_time.assign(static_cast<size_t>(n), -1.0);
        if (opts.occupation_split >= 0.0)
            p.traj.occupation_after.assign(static_cast<size_t>(n), 0.0);

        auto infect = [&](int v, double t) {
            p.infected[static_cast<size_t>(v)] = 1;
            p.since[static_cast<size_t>(v)] = t;
            if (p.traj.hit_time[static_cast<size_t>(v)] < 0.0)
                p.traj.hit_time[static_cast<size_t>(v)] = t;
            ++p.count;
            if (watched[static_cast<size_t>(v)]) ++p.watch_count;
        };
        for (int v : p.traj.initial) {
            if (mask && !inside(v)) throw ConfigError("run: initial vertex outside mask");
            infect(v, 0.0);
        }
        if (opts.clamp_vertex >= 0 && !p.infected[static_cast<size_t>(opts.clamp_vertex)])
            infect(opts.clamp_vertex, 0.0);
        if (opts.stop_on_hit >= 0 && p.infected[static_cast<size_t>(opts.stop_on_hit)])
            p.hit_done = true;
        if (p.count == 0) p.traj.extinction_time = 0.0;
    }

    std::vector<double> snaps = opts.snapshot_times;
    if (!std::is_sorted(snaps.begin(), snaps.end()))
        throw ConfigError("run: snapshot times must be ascending");
    size_t snap_next = 0;
    auto flush_snapshots = [&](double up_to_exclusive) {
        while (snap_next < snaps.size() && snaps[snap_next] < up_to_exclusive) {
            for (ProcState& p : procs)
                p.traj.snapshots.emplace_back(snaps[snap_next], unpack_state(p.infected));
            ++snap_next;
        }
    };

    auto heal = [&](ProcState& p, int v, double t) {
        p.infected[static_cast<size_t>(v)] = 0;
        const double a = p.since[static_cast<size_t>(v)];
        p.traj.occupation[static_cast<size_t>(v)] += t - a;
        if (!p.traj.occupation_after.empty()) {
            const double s = opts.occupation_split;
            if (t > s)
                p.traj.occupation_after[static_cast<size_t>(v)] += t - std::max(a, s);
        }
        --p.count;
        if (watched[static_cast<size_t>(v)]) --p.watch_count;
    };

    bool stopped_early = false;
    double stop_time = field.horizon;
    const WatchSet* watch = opts.watch;

    auto all_done = [&]() {
        for (const ProcState& p : procs)
            if (p.count > 0) return false;
        return true;
    };

    for (const FieldEvent& e : field.events) {
        flush_snapshots(e.time);
        if (e.is_recovery()) {
            const int u = e.u;
            if (inside(u)) {
                const bool clamped =
                    (u == opts.clamp_vertex) && (e.time <= opts.clamp_until);
                if (!clamped)
                    for (ProcState& p : procs)
                        if (p.infected[static_cast<size_t>(u)]) {
                            heal(p, u, e.time);
                            if (p.count == 0) p.traj.extinction_time = e.time;
                        }
            }
        } else {
            const int u = e.u, v = e.v;
            if (inside(u) && inside(v)) {
                for (ProcState& p : procs) {
                    if (e.label > p.lambda) continue;
                    if (p.infected[static_cast<size_t>(u)] &&
                        !p.infected[static_cast<size_t>(v)]) {
                        p.infected[static_cast<size_t>(v)] = 1;
                        p.since[static_cast<size_t>(v)] = e.time;
                        if (p.traj.hit_time[static_cast<size_t>(v)] < 0.0)
                            p.traj.hit_time[static_cast<size_t>(v)] = e.time;
                        ++p.count;
                        if (watched[static_cast<size_t>(v)]) ++p.watch_count;
                        if (v == opts.stop_on_hit) p.hit_done = true;
                    }
                }
            }
        }
        if (tracing) {
            for (size_t k = 0; k < k_procs; ++k) {
                const uint64_t bits = pack_config(procs[k].infected);
                if (traces) (*traces)[k].emplace_back(e.time, bits);
                if (opts.event_trace && k == 0) opts.event_trace->emplace_back(e.time, bits);
            }
        }

        if (all_done() && !tracing) {  // tracing covers every event for alignment
            stop_time = e.time;
            break;
        }
        if (opts.stop_on_hit >= 0) {
            bool every = true;
            for (const ProcState& p : procs)
                if (!p.hit_done && p.count > 0) every = false;
            if (every) {
                stopped_early = true;
                stop_time = e.time;
                break;
            }
        }
        if (watch && procs[0].watch_count >= watch->required) {
            procs[0].traj.watch_reached = true;
            procs[0].traj.watch_time = e.time;
            stopped_early = true;
            stop_time = e.time;
            break;
        }
        if (opts.occupation_watch_vertex >= 0) {
            ProcState& p = procs[0];
            const size_t w = static_cast<size_t>(opts.occupation_watch_vertex);
            double occ = p.traj.occupation[w];
            if (p.infected[w]) occ += e.time - p.since[w];
            if (occ > opts.occupation_watch_threshold) {
                p.traj.occupation_watch_reached = true;
                stopped_early = true;
                stop_time = e.time;
                break;
            }
        }
    }

    // Wind down: accrue open intervals to the stop time and check the
    // occupation watch once more (it can trip between the last event and the
    // horizon).
    flush_snapshots(stopped_early ? stop_time : field.horizon + 1.0);
    for (ProcState& p : procs) {
        const double end = p.traj.extinction_time ? *p.traj.extinction_time
                                                  : (stopped_early ? stop_time : field.horizon);
        for (int v = 0; v < n; ++v)
            if (p.infected[static_cast<size_t>(v)]) {
                p.traj.occupation[static_cast<size_t>(v)] += end - p.since[static_cast<size_t>(v)];
                if (!p.traj.occupation_after.empty() && end > opts.occupation_split)
                    p.traj.occupation_after[static_cast<size_t>(v)] +=
                        end - std::max(p.since[static_cast<size_t>(v)], opts.occupation_split);
            }
        p.traj.final_config = unpack_state(p.infected);
        p.traj.stopped_early = stopped_early;
    }
    if (!stopped_early && opts.occupation_watch_vertex >= 0) {
        ProcState& p = procs[0];
        if (p.traj.occupation[static_cast<size_t>(opts.occupation_watch_vertex)] >
            opts.occupation_watch_threshold)
            p.traj.occupation_watch_reached = true;
    }

    std::vector<Trajectory> out;
    out.reserve(k_procs);
    for (ProcState& p : procs) out.push_back(std::move(p.traj));
    return out;
}

}  // namespace

Trajectory run(const GraphicalField& field, double lambda, const Configuration& initial,
               const RunOptions& opts) {
    return sweep(field, {lambda}, {initial}, opts, nullptr)[0];
}

std::vector<Trajectory> run_coupled(
    const GraphicalField& field, const std::vector<double>& lambdas,
    const std::vector<Configuration>& initials, const RunOptions& opts,
    std::vector<std::vector<std::pair<double, uint64_t>>>* traces) {
    return sweep(field, lambdas, initials, opts, traces);
}

DualTrajectory run_dual(const GraphicalField& field, double lambda,
                        const Configuration& target, double s, double t) {
    if (s > t) throw ConfigError("run_dual: need s <= t");
    if (s < 0.0 || t > field.horizon)
        throw ConfigError("run_dual: window must lie in [0, horizon]");
    if (lambda < 0.0 || lambda > field.lambda_max * (1.0 + 1e-12))
        throw ConfigError("run_dual: lambda exceeds the field's lambda_max");
    const int n = field.graph->vertex_count();

    DualTrajectory d;
    d.window_start = s;
    d.window_end = t;
    d.target = normalize_configuration(target, n);
    if (s == t) {
        d.config_at_start = d.target;
        return d;
    }

    std::vector<uint8_t> infected(static_cast<size_t>(n), 0);
    int64_t count = 0;
    for (int v : d.target) {
        infected[static_cast<size_t>(v)] = 1;
        ++count;
    }
    for (const FieldEvent& e : reversed_window(field, s, t)) {
        if (count == 0) break;
        if (e.is_recovery()) {
            if (infected[static_cast<size_t>(e.u)]) {
                infected[static_cast<size_t>(e.u)] = 0;
                --count;
            }
        } else if (e.label <= lambda) {
            if (infected[static_cast<size_t>(e.u)] && !infected[static_cast<size_t>(e.v)]) {
                infected[static_cast<size_t>(e.v)] = 1;
                ++count;
            }
        }
    }
    d.config_at_start = unpack_state(infected);
    return d;
}

Trajectory confined_occupation(const GraphicalField& field, double lambda,
                               const Configuration& initial,
                               const std::vector<uint8_t>& mask) {
    RunOptions opts;
    opts.confine_mask = &mask;
    return run(field, lambda, initial, opts);
}

}  // namespace cproc
