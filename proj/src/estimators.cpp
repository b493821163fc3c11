#include "cproc/estimators.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cproc {

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string hash_hex(uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Evaluate fn(i) over [from, to) on a small worker pool. Each index owns its
// output slot, so results never depend on scheduling.
template <typename Fn>
void parallel_replicas(int64_t from, int64_t to, int workers, Fn&& fn) {
    const int64_t span = to - from;
    if (span <= 0) return;
    if (workers <= 1 || span < 4) {
        for (int64_t i = from; i < to; ++i) fn(i);
        return;
    }
    std::atomic<int64_t> next{from};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        try {
            for (;;) {
                const int64_t start = next.fetch_add(16);
                if (start >= to) return;
                const int64_t end = std::min(start + 16, to);
                for (int64_t i = start; i < end; ++i) fn(i);
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers - 1; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Sequential-sampling driver for proportions: grows the replica outcome
// vector until the plan is satisfied, then returns (k, n).
template <typename Fn>  // Fn(replica_index) -> bool
std::pair<int64_t, int64_t> run_proportion(const SamplingPlan& plan, Fn&& fn,
                                           std::vector<uint8_t>* keep = nullptr) {
    std::vector<uint8_t> local;
    std::vector<uint8_t>& out = keep ? *keep : local;
    const int workers = detail::effective_workers(plan);
    if ((plan.n && *plan.n <= 0) || plan.n_initial <= 0)
        throw ConfigError("sampling plan: zero replicas");
    int64_t n = plan.n ? *plan.n : plan.n_initial;
    for (;;) {
        const int64_t from = static_cast<int64_t>(out.size());
        out.resize(static_cast<size_t>(n));
        parallel_replicas(from, n, workers,
                          [&](int64_t i) { out[static_cast<size_t>(i)] = fn(i) ? 1 : 0; });
        int64_t k = 0;
        for (uint8_t b : out) k += b;
        if (plan.n || !plan.target_half_width) return {k, n};
        if (wilson_half_width(k, n, plan.confidence) <= *plan.target_half_width ||
            n >= plan.n_max)
            return {k, n};
        n = std::min(plan.n_max, n * 2);
    }
}

EstimatorResult make_proportion_result(const std::string& estimator,
                                       const std::string& instance, const SamplingPlan& plan,
                                       uint64_t seed, int64_t k, int64_t n) {
    if (n <= 0) throw ConfigError(estimator + ": zero replicas");
    EstimatorResult r;
    r.estimator = estimator;
    r.instance_id = instance;
    r.n = n;
    r.seed = seed;
    r.point = static_cast<double>(k) / static_cast<double>(n);
    const Interval ci = wilson_interval(k, n, plan.confidence);
    r.ci_low = ci.low;
    r.ci_high = ci.high;
    r.metadata["k"] = std::to_string(k);
    r.metadata["confidence"] = fmt_short(plan.confidence);
    return r;
}

}  // namespace

namespace detail {

GraphicalField sample_events(const std::shared_ptr<const RootedGraph>& g, double rate,
                             double horizon, uint64_t seed) {
    FieldCaps caps;
    caps.events_only = true;
    return sample_field(g, rate, horizon, seed, caps);
}

int effective_workers(const SamplingPlan& plan) {
    if (plan.workers > 0) return plan.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

double field_rate_floor(double lambda) {
    // Fields need a positive arrow rate; lambda == 0 runs use a vanishing one.
    return std::max(lambda, 1e-9);
}

ReplicaOutcome replica_extinction(const std::shared_ptr<const RootedGraph>& g, double lambda,
                                  const Configuration& initial, double horizon,
                                  uint64_t replica_seed, double window_start) {
    if (!(horizon > 0.0)) throw ConfigError("replica: horizon must be positive");
    double w = std::min(std::max(window_start, 1e-6), horizon);
    for (;;) {
        const GraphicalField field =
            sample_events(g, field_rate_floor(lambda), w, replica_seed);
        const Trajectory traj = run(field, lambda, initial);
        if (traj.extinction_time) return {false, *traj.extinction_time};
        if (w >= horizon) return {true, horizon};
        w = std::min(w * 2.0, horizon);
    }
}

}  // namespace detail

double IgnitionThreshold::offspring_mean() const {
    return d * (1.0 - std::exp(-lambda)) * std::exp(-2.0);
}

int64_t IgnitionThreshold::count_required() const {
    const double base = use_full_mean ? offspring_mean() : offspring_mean() / 2.0;
    const double c = std::ceil(std::pow(base, static_cast<double>(level())));
    return std::max<int64_t>(1, static_cast<int64_t>(c));
}

std::string EstimatorResult::to_json_string() const {
    nlohmann::json j;
    j["estimator"] = estimator;
    j["instance_id"] = instance_id;
    j["point"] = point;
    j["ci_low"] = ci_low;
    j["ci_high"] = ci_high;
    j["n"] = n;
    j["seed"] = seed;
    j["metadata"] = metadata;
    return j.dump(2) + "\n";
}

std::string EstimatorResult::csv_header() {
    return "estimator,instance_id,point,ci_low,ci_high,n,seed";
}

std::string EstimatorResult::csv_row() const {
    std::ostringstream out;
    out << estimator << ',' << instance_id << ',' << fmt_double(point) << ','
        << fmt_double(ci_low) << ',' << fmt_double(ci_high) << ',' << n << ',' << seed;
    return out.str();
}

std::string DecayFit::to_json_string() const {
    nlohmann::json j;
    j["slope"] = slope;
    j["intercept"] = intercept;
    j["r_squared"] = r_squared;
    j["n"] = n;
    j["seed"] = seed;
    auto cells_json = nlohmann::json::array();
    for (const DecayCell& c : cells)
        cells_json.push_back({{"t", c.t},
                              {"p_hat", c.p_hat},
                              {"k", c.k},
                              {"n", c.n},
                              {"dropped", c.dropped}});
    j["cells"] = std::move(cells_json);
    return j.dump(2) + "\n";
}

std::string CrossingLengthResult::to_json_string() const {
    nlohmann::json j;
    if (length)
        j["length"] = *length;
    else
        j["length"] = nullptr;
    j["degenerate_zero"] = degenerate_zero;
    j["inconclusive"] = inconclusive;
    j["undecided_ell"] = undecided_ell;
    j["note"] = note;
    j["replicas_used"] = replicas_used;
    j["seed"] = seed;
    auto cells = nlohmann::json::array();
    for (const CrossingCell& c : diagnostics)
        cells.push_back({{"ell", c.ell},
                         {"estimate", c.estimate},
                         {"ci_low", c.ci_low},
                         {"ci_high", c.ci_high},
                         {"n", c.n},
                         {"decision", c.decision}});
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

std::string ExpDecayBoundResult::to_json_string() const {
    nlohmann::json j;
    j["lhs"] = nlohmann::json::parse(lhs.to_json_string());
    j["rhs"] = nlohmann::json::parse(rhs.to_json_string());
    j["bound_factor"] = bound_factor;
    j["inequality_ok"] = inequality_ok;
    return j.dump(2) + "\n";
}

EstimatorResult estimate_survival(std::shared_ptr<const RootedGraph> g, double lambda,
                                  const Configuration& initial, double horizon,
                                  const SamplingPlan& plan, uint64_t seed) {
    const Configuration init = normalize_configuration(initial, g->vertex_count());
    const auto [k, n] = run_proportion(plan, [&](int64_t i) {
        return detail::replica_extinction(g, lambda, init, horizon, derive_seed(seed, i),
                                          plan.window_start)
            .alive;
    });
    std::ostringstream id;
    id << "survival|g=" << hash_hex(g->content_hash()) << "|lam=" << fmt_short(lambda)
       << "|A=" << init.size() << "v|T=" << fmt_short(horizon);
    EstimatorResult r = make_proportion_result("survival", id.str(), plan, seed, k, n);
    r.metadata["lambda"] = fmt_short(lambda);
    r.metadata["horizon"] = fmt_short(horizon);
    r.metadata["definition"] = "alive_at_horizon";
    r.metadata["bias"] = "upper bound for survival as t -> infinity";
    return r;
}

namespace {

struct CrossingSetup {
    std::shared_ptr<const RootedGraph> probe;
    AugmentLayout layout;
    Configuration initial;  // base + tree fully infected
    int ell_cap = 0;
};

CrossingSetup make_crossing_setup(const RootedGraph& base, const AugmentationSpec& spec,
                                  int margin) {
    spec.validate();
    if (margin < 0) throw ConfigError("crossing: margin must be nonnegative");
    CrossingSetup s;
    s.ell_cap = spec.ell_max - margin;
    if (s.ell_cap < 0)
        throw ConfigError("crossing: margin leaves no usable line position");
    s.probe = std::make_shared<const RootedGraph>(build_probe_graph(base, spec));
    s.layout = augment_layout(*s.probe);
    for (int v = 0; v < s.layout.line_first; ++v) s.initial.push_back(v);
    return s;
}

// Farthest line position ever infected (-1 = none), one full-horizon run.
// Hits along the line are nested, so this one number answers every cell.
int crossing_extent(const CrossingSetup& s, double lambda, double horizon,
                    uint64_t replica_seed) {
    const GraphicalField field =
        detail::sample_events(s.probe, detail::field_rate_floor(lambda), horizon, replica_seed);
    RunOptions opts;
    opts.stop_on_hit = s.layout.line_vertex(s.ell_cap);
    const Trajectory traj = run(field, lambda, s.initial, opts);
    for (int j = s.ell_cap; j >= 0; --j)
        if (traj.hit_time[static_cast<size_t>(s.layout.line_vertex(j))] >= 0.0) return j;
    return -1;
}

}  // namespace

EstimatorResult estimate_crossing(const RootedGraph& base, const AugmentationSpec& spec,
                                  int ell, double horizon, const SamplingPlan& plan,
                                  uint64_t seed, int margin) {
    const CrossingSetup setup = make_crossing_setup(base, spec, margin);
    if (ell < 0 || ell > setup.ell_cap)
        throw ConfigError("crossing: ell " + std::to_string(ell) +
                          " beyond safe truncation margin (max " +
                          std::to_string(setup.ell_cap) + ")");
    const auto [k, n] = run_proportion(plan, [&](int64_t i) {
        return crossing_extent(setup, spec.lambda, horizon, derive_seed(seed, i)) >= ell;
    });
    std::ostringstream id;
    id << "crossing|g=" << hash_hex(setup.probe->content_hash()) << "|lam="
       << fmt_short(spec.lambda) << "|ell=" << ell << "|T=" << fmt_short(horizon);
    EstimatorResult r = make_proportion_result("crossing", id.str(), plan, seed, k, n);
    r.metadata["lambda"] = fmt_short(spec.lambda);
    r.metadata["horizon"] = fmt_short(horizon);
    r.metadata["ell"] = std::to_string(ell);
    r.metadata["definition"] = "line_position_hit_within_horizon";
    r.metadata["bias"] = "lower bound for unbounded-time crossing";
    return r;
}

CrossingLengthResult find_crossing_length(const RootedGraph& base, const AugmentationSpec& spec,
                                          double horizon, const SamplingPlan& plan,
                                          uint64_t seed, int margin) {
    const CrossingSetup setup = make_crossing_setup(base, spec, margin);
    const double threshold = 1.0 - spec.epsilon;
    const int workers = detail::effective_workers(plan);

    CrossingLengthResult result;
    result.seed = seed;

    std::vector<int16_t> extents;
    auto ensure = [&](int64_t n) {
        const int64_t from = static_cast<int64_t>(extents.size());
        if (n <= from) return;
        extents.resize(static_cast<size_t>(n));
        parallel_replicas(from, n, workers, [&](int64_t i) {
            extents[static_cast<size_t>(i)] = static_cast<int16_t>(
                crossing_extent(setup, spec.lambda, horizon, derive_seed(seed, i)));
        });
    };

    std::map<int, CrossingCell> cache;
    auto decide = [&](int ell) -> const CrossingCell& {
        auto found = cache.find(ell);
        if (found != cache.end()) return found->second;
        int64_t n = std::max<int64_t>(plan.n ? *plan.n : plan.n_initial, 8);
        CrossingCell cell;
        cell.ell = ell;
        for (;;) {
            ensure(n);
            int64_t k = 0;
            for (int64_t i = 0; i < n; ++i)
                if (extents[static_cast<size_t>(i)] >= ell) ++k;
            const Interval ci = wilson_interval(k, n, plan.confidence);
            cell.estimate = static_cast<double>(k) / static_cast<double>(n);
            cell.ci_low = ci.low;
            cell.ci_high = ci.high;
            cell.n = n;
            if (ci.high < threshold) {
                cell.decision = "below";
                break;
            }
            if (ci.low >= threshold) {
                cell.decision = "above";
                break;
            }
            if (n >= plan.n_max) {
                cell.decision = "undecided";
                break;
            }
            n = std::min(plan.n_max, n * 2);
        }
        return cache.emplace(ell, cell).first->second;
    };

    auto finish = [&](std::optional<int> length, bool inconclusive, int undecided,
                      std::string note) {
        result.length = length;
        result.inconclusive = inconclusive;
        result.undecided_ell = undecided;
        result.note = std::move(note);
        result.replicas_used = static_cast<int64_t>(extents.size());
        for (const auto& [ell, cell] : cache) {
            (void)ell;
            result.diagnostics.push_back(cell);
        }
        if (length && *length == 0) {
            result.degenerate_zero = true;
            if (result.note.empty())
                result.note = "degenerate: crossing fails the threshold already at position 0";
        }
        return result;
    };

    const CrossingCell& first = decide(0);
    if (first.decision == "undecided")
        return finish(std::nullopt, true, 0, "budget exhausted with CI straddling threshold");
    if (first.decision == "below") return finish(0, false, -1, "");

    int above = 0, below = -1;
    for (int ell = 1;; ell *= 2) {
        if (ell > setup.ell_cap) ell = setup.ell_cap;
        const CrossingCell& cell = decide(ell);
        if (cell.decision == "undecided")
            return finish(std::nullopt, true, ell,
                          "budget exhausted with CI straddling threshold");
        if (cell.decision == "below") {
            below = ell;
            break;
        }
        above = ell;
        if (ell == setup.ell_cap)
            return finish(std::nullopt, true, ell,
                          "crossing stays above the threshold for every position within "
                          "the truncation margin");
    }
    while (below - above > 1) {
        const int mid = above + (below - above) / 2;
        const CrossingCell& cell = decide(mid);
        if (cell.decision == "undecided")
            return finish(std::nullopt, true, mid,
                          "budget exhausted with CI straddling threshold");
        if (cell.decision == "below")
            below = mid;
        else
            above = mid;
    }
    return finish(below, false, -1, "");
}

EstimatorResult estimate_p_line(int ell, double lambda, double horizon,
                                const SamplingPlan& plan, uint64_t seed) {
    if (ell < 0) throw ConfigError("p_line: ell must be >= 0");
    auto g = std::make_shared<const RootedGraph>(build_segment(ell));
    const auto [k, n] = run_proportion(plan, [&](int64_t i) {
        const uint64_t rs = derive_seed(seed, i);
        double w = std::min(std::max(plan.window_start, 1e-6), horizon);
        for (;;) {
            const GraphicalField field =
                detail::sample_events(g, detail::field_rate_floor(lambda), w, rs);
            RunOptions opts;
            opts.stop_on_hit = ell;
            const Trajectory traj = run(field, lambda, {0}, opts);
            if (traj.hit_time[static_cast<size_t>(ell)] >= 0.0) return true;
            if (traj.extinction_time) return false;
            if (w >= horizon) return false;
            w = std::min(w * 2.0, horizon);
        }
    });
    std::ostringstream id;
    id << "p_line|ell=" << ell << "|lam=" << fmt_short(lambda) << "|T=" << fmt_short(horizon);
    EstimatorResult r = make_proportion_result("p_line", id.str(), plan, seed, k, n);
    r.metadata["lambda"] = fmt_short(lambda);
    r.metadata["horizon"] = fmt_short(horizon);
    r.metadata["definition"] = "far_end_hit_within_horizon";
    r.metadata["bias"] = "lower bound for unbounded-time passage";
    return r;
}

std::vector<PairedLineCell> paired_line_ratio(const std::vector<int>& ells, double lambda_low,
                                              double lambda_high, double horizon,
                                              const SamplingPlan& plan, uint64_t seed) {
    if (!(lambda_low < lambda_high))
        throw ConfigError("paired ratio: need lambda_low < lambda_high");
    std::vector<PairedLineCell> out;
    const int workers = detail::effective_workers(plan);
    int cell_index = 0;
    for (int ell : ells) {
        if (ell < 1) throw ConfigError("paired ratio: ell must be >= 1");
        auto g = std::make_shared<const RootedGraph>(build_segment(ell));
        const uint64_t cell_seed = derive_seed(seed, 1000003ULL * (++cell_index));

        // outcome per replica: bit 0 = low-rate hit, bit 1 = high-rate hit
        auto replica = [&](int64_t i) -> uint8_t {
            const uint64_t rs = derive_seed(cell_seed, i);
            double w = std::min(std::max(plan.window_start, 1e-6), horizon);
            for (;;) {
                const GraphicalField field = detail::sample_events(g, lambda_high, w, rs);
                RunOptions opts;
                opts.stop_on_hit = ell;
                const auto trajs =
                    run_coupled(field, {lambda_low, lambda_high}, {{0}, {0}}, opts);
                const bool hit_low = trajs[0].hit_time[static_cast<size_t>(ell)] >= 0.0;
                const bool hit_high = trajs[1].hit_time[static_cast<size_t>(ell)] >= 0.0;
                const bool done_low = hit_low || trajs[0].extinction_time.has_value();
                const bool done_high = hit_high || trajs[1].extinction_time.has_value();
                if ((done_low && done_high) || w >= horizon)
                    return static_cast<uint8_t>((hit_low ? 1 : 0) | (hit_high ? 2 : 0));
                w = std::min(w * 2.0, horizon);
            }
        };

        std::vector<uint8_t> outcomes;
        int64_t n = plan.n ? *plan.n : plan.n_initial;
        constexpr int64_t kMinLowHits = 30;
        for (;;) {
            const int64_t from = static_cast<int64_t>(outcomes.size());
            outcomes.resize(static_cast<size_t>(n));
            parallel_replicas(from, n, workers, [&](int64_t i) {
                outcomes[static_cast<size_t>(i)] = replica(i);
            });
            int64_t k_low = 0;
            for (uint8_t b : outcomes) k_low += (b & 1);
            if (plan.n || k_low >= kMinLowHits || n >= plan.n_max) break;
            n = std::min(plan.n_max, n * 2);
        }

        PairedLineCell cell;
        cell.ell = ell;
        cell.n = n;
        for (uint8_t b : outcomes) {
            cell.k_low += (b & 1);
            cell.k_high += (b >> 1) & 1;
            if ((b & 1) && !(b & 2))
                throw std::logic_error("paired ratio: coupling violated");
        }
        if (cell.k_high == 0)
            throw Inconclusive("paired ratio: no passages at the higher rate at ell=" +
                               std::to_string(ell));
        if (cell.k_low == 0)
            throw Inconclusive("paired ratio: no passages at the lower rate at ell=" +
                               std::to_string(ell) + " (n=" + std::to_string(n) + ")");
        cell.ratio =
            static_cast<double>(cell.k_low) / static_cast<double>(cell.k_high);
        const Interval ci = wilson_interval(cell.k_low, cell.k_high, plan.confidence);
        cell.ratio_ci_low = ci.low;
        cell.ratio_ci_high = ci.high;
        cell.log_ratio = std::log(cell.ratio);
        cell.log_ratio_se =
            std::sqrt((1.0 - cell.ratio) / static_cast<double>(cell.k_low));
        cell.eta_hat = std::pow(cell.ratio, -1.0 / static_cast<double>(ell));
        out.push_back(cell);
    }
    return out;
}

EstimatorResult estimate_extinction_mean(std::shared_ptr<const RootedGraph> g, double lambda,
                                         const Configuration& initial, double horizon,
                                         const SamplingPlan& plan, uint64_t seed) {
    const Configuration init = normalize_configuration(initial, g->vertex_count());
    const int workers = detail::effective_workers(plan);
    const int64_t n = std::max<int64_t>(plan.n ? *plan.n : plan.n_initial, 2);

    std::vector<double> values(static_cast<size_t>(n), 0.0);
    std::vector<uint8_t> censored(static_cast<size_t>(n), 0);
    parallel_replicas(0, n, workers, [&](int64_t i) {
        const auto out = detail::replica_extinction(g, lambda, init, horizon,
                                                    derive_seed(seed, i), plan.window_start);
        values[static_cast<size_t>(i)] = out.extinction_or_horizon;
        censored[static_cast<size_t>(i)] = out.alive ? 1 : 0;
    });
    int64_t censored_count = 0;
    for (uint8_t c : censored) censored_count += c;

    const MeanSummary s = mean_t_interval(values, plan.confidence);
    EstimatorResult r;
    r.estimator = "extinction_mean";
    std::ostringstream id;
    id << "extinction_mean|g=" << hash_hex(g->content_hash()) << "|lam=" << fmt_short(lambda)
       << "|A=" << init.size() << "v|T=" << fmt_short(horizon);
    r.instance_id = id.str();
    r.point = s.mean;
    r.ci_low = s.ci.low;
    r.ci_high = s.ci.high;
    r.n = n;
    r.seed = seed;
    r.metadata["lambda"] = fmt_short(lambda);
    r.metadata["horizon"] = fmt_short(horizon);
    r.metadata["censored"] = std::to_string(censored_count);
    if (censored_count > 0)
        r.metadata["bias"] = "lower bound: replicas alive at the horizon were censored";
    r.metadata["confidence"] = fmt_short(plan.confidence);
    return r;
}

DecayFit fit_decay(std::shared_ptr<const RootedGraph> g, double lambda,
                   const Configuration& initial, const std::vector<double>& time_grid,
                   const SamplingPlan& plan, uint64_t seed) {
    if (time_grid.size() < 2) throw ConfigError("fit_decay: need at least two grid times");
    for (size_t i = 0; i < time_grid.size(); ++i) {
        if (time_grid[i] <= 0.0) throw ConfigError("fit_decay: grid times must be positive");
        if (i > 0 && time_grid[i] <= time_grid[i - 1])
            throw ConfigError("fit_decay: grid times must be strictly ascending");
    }
    const Configuration init = normalize_configuration(initial, g->vertex_count());
    const double horizon = time_grid.back();
    const int workers = detail::effective_workers(plan);
    const int64_t n = std::max<int64_t>(plan.n ? *plan.n : plan.n_initial, 2);

    // extinction time, or +inf when alive at the last grid point
    std::vector<double> ext(static_cast<size_t>(n), 0.0);
    parallel_replicas(0, n, workers, [&](int64_t i) {
        const auto out = detail::replica_extinction(g, lambda, init, horizon,
                                                    derive_seed(seed, i), plan.window_start);
        ext[static_cast<size_t>(i)] =
            out.alive ? std::numeric_limits<double>::infinity() : out.extinction_or_horizon;
    });

    DecayFit fit;
    fit.n = n;
    fit.seed = seed;
    std::vector<double> xs, ys;
    for (double t : time_grid) {
        DecayCell cell;
        cell.t = t;
        cell.n = n;
        for (double e : ext)
            if (e > t) ++cell.k;
        cell.p_hat = static_cast<double>(cell.k) / static_cast<double>(n);
        cell.dropped = (cell.k == 0);
        if (!cell.dropped) {
            xs.push_back(t);
            ys.push_back(std::log(cell.p_hat));
        }
        fit.cells.push_back(cell);
    }
    if (xs.size() < 2)
        throw Inconclusive("fit_decay: fewer than two nonzero cells; shorten the grid "
                           "or raise n");
    const LineFit lf = fit_line(xs, ys);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    return fit;
}

EstimatorResult estimate_ignition(const RootedGraph& base, const AugmentationSpec& spec,
                                  const Configuration& initial, double t_cond, double horizon,
                                  const SamplingPlan& plan, uint64_t seed, int line_length,
                                  double acceptance_floor, bool use_full_mean) {
    spec.validate();
    if (!(t_cond > 0.0)) throw ConfigError("ignition: t_cond must be positive");
    const int L = line_length < 0 ? spec.ell_max : line_length;
    auto g = std::make_shared<const RootedGraph>(build_augmented_graph(base, spec, L));
    const AugmentLayout layout = augment_layout(*g);
    const Configuration init = normalize_configuration(initial, base.vertex_count());
    const int o = base.root_or_throw();

    IgnitionThreshold thr{spec.d, spec.h, spec.lambda, use_full_mean};
    WatchSet watch;
    watch.vertices = layout.tree_level_vertices(*g, thr.level());
    watch.required = thr.count_required();

    std::vector<uint8_t> mask(static_cast<size_t>(g->vertex_count()), 0);
    for (int v = 0; v < layout.base_count; ++v) mask[static_cast<size_t>(v)] = 1;

    // 0 = rejected, 1 = accepted & not ignited, 2 = accepted & ignited
    auto replica = [&](int64_t i) -> uint8_t {
        const GraphicalField field = detail::sample_events(
            g, detail::field_rate_floor(spec.lambda), horizon, derive_seed(seed, i));
        RunOptions conf_opts;
        conf_opts.confine_mask = &mask;
        conf_opts.occupation_watch_vertex = o;
        conf_opts.occupation_watch_threshold = t_cond;
        const Trajectory confined = run(field, spec.lambda, init, conf_opts);
        if (!confined.occupation_watch_reached) return 0;
        RunOptions opts;
        opts.watch = &watch;
        const Trajectory traj = run(field, spec.lambda, init, opts);
        return traj.watch_reached ? 2 : 1;
    };

    const int workers = detail::effective_workers(plan);
    const int64_t n = std::max<int64_t>(plan.n ? *plan.n : plan.n_initial, 2);
    std::vector<uint8_t> outcomes(static_cast<size_t>(n), 0);
    parallel_replicas(0, n, workers,
                      [&](int64_t i) { outcomes[static_cast<size_t>(i)] = replica(i); });
    int64_t accepted = 0, ignited = 0;
    for (uint8_t b : outcomes) {
        if (b > 0) ++accepted;
        if (b == 2) ++ignited;
    }
    const double rate = static_cast<double>(accepted) / static_cast<double>(n);
    if (accepted == 0 || rate < acceptance_floor)
        throw Inconclusive("ignition: conditioning too rare, accepted " +
                           std::to_string(accepted) + " of " + std::to_string(n) +
                           " replicas");

    std::ostringstream id;
    id << "ignition|g=" << hash_hex(g->content_hash()) << "|lam=" << fmt_short(spec.lambda)
       << "|tcond=" << fmt_short(t_cond) << "|T=" << fmt_short(horizon);
    EstimatorResult r = make_proportion_result("ignition", id.str(), plan, seed, ignited, accepted);
    r.metadata["accepted"] = std::to_string(accepted);
    r.metadata["total_replicas"] = std::to_string(n);
    r.metadata["acceptance_rate"] = fmt_short(rate);
    r.metadata["watch_level"] = std::to_string(thr.level());
    r.metadata["count_required"] = std::to_string(thr.count_required());
    r.metadata["offspring_mean"] = fmt_short(thr.offspring_mean());
    r.metadata["t_cond"] = fmt_short(t_cond);
    return r;
}

ExpDecayBoundResult estimate_bound_exp_decay(int ell, double lambda, double t, double horizon,
                                             const SamplingPlan& plan, uint64_t seed) {
    if (ell < 1) throw ConfigError("exp_decay bound: ell must be >= 1");
    if (t < 0.0) throw ConfigError("exp_decay bound: t must be nonnegative");
    if (horizon < t) throw ConfigError("exp_decay bound: horizon must cover the window");
    auto g = std::make_shared<const RootedGraph>(build_segment(ell));

    const uint64_t lhs_seed = derive_seed(seed, 0xA11CE);
    const auto [k, n] = run_proportion(plan, [&](int64_t i) {
        const GraphicalField field = detail::sample_events(
            g, detail::field_rate_floor(lambda), horizon, derive_seed(lhs_seed, i));
        RunOptions opts;
        opts.clamp_vertex = 0;
        opts.clamp_until = t;
        opts.stop_on_hit = ell;
        const Trajectory traj = run(field, lambda, {0}, opts);
        return traj.hit_time[static_cast<size_t>(ell)] >= 0.0;
    });

    ExpDecayBoundResult out;
    std::ostringstream id;
    id << "window_crossing|ell=" << ell << "|lam=" << fmt_short(lambda)
       << "|t=" << fmt_short(t) << "|T=" << fmt_short(horizon);
    out.lhs = make_proportion_result("window_crossing", id.str(), plan, seed, k, n);
    out.lhs.metadata["definition"] = "source held infected on [0,t]; far end hit";
    out.rhs = estimate_p_line(ell, lambda, horizon, plan, derive_seed(seed, 0xB0B));
    out.bound_factor = std::exp(1.0) * (t + 1.0) * out.rhs.ci_high;
    out.inequality_ok = out.lhs.ci_low <= out.bound_factor;
    return out;
}

}  // namespace cproc
