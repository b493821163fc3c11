#include "cproc/construct.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cproc {

void ConstructionPlan::validate() const {
    if (!(lambda_target > 0.0)) throw ConfigError("plan: lambda_target must be positive");
    if (levels.empty() && mode == Mode::target_dies)
        throw ConfigError("plan: target_dies needs at least one level");
    double prev = (mode == Mode::target_survives) ? 0.0
                                                  : std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < levels.size(); ++i) {
        const Level& lv = levels[i];
        AugmentationSpec spec{lv.d, lv.h, augmentation_rate(i), lv.epsilon, lv.ell_max};
        spec.validate();
        if (!(lv.horizon > 0.0)) throw ConfigError("plan: level horizon must be positive");
        if (mode == Mode::target_survives) {
            if (!(lv.lambda_prime > prev && lv.lambda_prime < lambda_target))
                throw ConfigError(
                    "plan: target_survives needs strictly increasing lambda_prime below "
                    "the target");
        } else {
            if (!(lv.lambda_prime < prev && lv.lambda_prime > lambda_target))
                throw ConfigError(
                    "plan: target_dies needs strictly decreasing lambda_prime above the "
                    "target");
        }
        prev = lv.lambda_prime;
    }
    if (margin < 0) throw ConfigError("plan: margin must be nonnegative");
}

double ConstructionPlan::augmentation_rate(size_t level_index) const {
    if (mode == Mode::target_survives) return lambda_target;
    if (level_index >= levels.size()) throw ConfigError("plan: level index out of range");
    return levels[level_index].lambda_prime;
}

namespace {
std::string mode_to_string(ConstructionPlan::Mode m) {
    return m == ConstructionPlan::Mode::target_survives ? "target-survives" : "target-dies";
}
ConstructionPlan::Mode mode_from_string(const std::string& s) {
    if (s == "target-survives") return ConstructionPlan::Mode::target_survives;
    if (s == "target-dies") return ConstructionPlan::Mode::target_dies;
    throw ConfigError("plan: unknown mode '" + s + "'");
}
}  // namespace

std::string ConstructionPlan::to_json_string() const {
    nlohmann::json j;
    j["mode"] = mode_to_string(mode);
    j["lambda_target"] = lambda_target;
    j["margin"] = margin;
    auto lvls = nlohmann::json::array();
    for (const Level& lv : levels)
        lvls.push_back({{"d", lv.d},
                        {"h", lv.h},
                        {"epsilon", lv.epsilon},
                        {"horizon", lv.horizon},
                        {"ell_max", lv.ell_max},
                        {"lambda_prime", lv.lambda_prime}});
    j["levels"] = std::move(lvls);
    nlohmann::json sp;
    if (sampling.n) sp["n"] = *sampling.n;
    if (sampling.target_half_width) sp["target_half_width"] = *sampling.target_half_width;
    sp["n_initial"] = sampling.n_initial;
    sp["n_max"] = sampling.n_max;
    sp["confidence"] = sampling.confidence;
    j["sampling"] = std::move(sp);
    return j.dump(2) + "\n";
}

ConstructionPlan ConstructionPlan::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("plan file: invalid JSON: ") + e.what());
    }
    for (const auto& [key, _] : j.items())
        if (key != "mode" && key != "lambda_target" && key != "margin" && key != "levels" &&
            key != "sampling")
            throw ConfigError("plan file: unknown key '" + key + "'");
    ConstructionPlan plan;
    plan.mode = mode_from_string(j.at("mode").get<std::string>());
    plan.lambda_target = j.at("lambda_target").get<double>();
    if (j.contains("margin")) plan.margin = j["margin"].get<int>();
    for (const auto& lj : j.at("levels")) {
        for (const auto& [key, _] : lj.items())
            if (key != "d" && key != "h" && key != "epsilon" && key != "horizon" &&
                key != "ell_max" && key != "lambda_prime")
                throw ConfigError("plan file: unknown level key '" + key + "'");
        Level lv;
        lv.d = lj.at("d").get<int>();
        lv.h = lj.at("h").get<int>();
        lv.epsilon = lj.at("epsilon").get<double>();
        lv.horizon = lj.at("horizon").get<double>();
        lv.ell_max = lj.at("ell_max").get<int>();
        lv.lambda_prime = lj.at("lambda_prime").get<double>();
        plan.levels.push_back(lv);
    }
    if (j.contains("sampling")) {
        const auto& sp = j["sampling"];
        for (const auto& [key, _] : sp.items())
            if (key != "n" && key != "target_half_width" && key != "n_initial" &&
                key != "n_max" && key != "confidence")
                throw ConfigError("plan file: unknown sampling key '" + key + "'");
        if (sp.contains("n")) plan.sampling.n = sp["n"].get<int64_t>();
        if (sp.contains("target_half_width"))
            plan.sampling.target_half_width = sp["target_half_width"].get<double>();
        if (sp.contains("n_initial")) plan.sampling.n_initial = sp["n_initial"].get<int64_t>();
        if (sp.contains("n_max")) plan.sampling.n_max = sp["n_max"].get<int64_t>();
        if (sp.contains("confidence")) plan.sampling.confidence = sp["confidence"].get<double>();
    }
    plan.validate();
    return plan;
}

ConstructionPlan ConstructionPlan::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open plan file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

std::string ConstructionLog::to_json_string() const {
    nlohmann::json j;
    j["aborted"] = aborted;
    j["abort_reason"] = abort_reason;
    auto lvls = nlohmann::json::array();
    for (const LevelLog& lv : levels) {
        nlohmann::json lj;
        lj["level"] = lv.level;
        lj["crossing_length"] = lv.crossing_length;
        lj["find_result"] = nlohmann::json::parse(lv.find_result.to_json_string());
        lj["vertex_count"] = lv.vertex_count;
        lj["edge_count"] = lv.edge_count;
        lj["max_degree"] = lv.max_degree;
        lj["diameter"] = lv.diameter;
        lj["root"] = lv.root;
        lj["warnings"] = lv.warnings;
        lvls.push_back(std::move(lj));
    }
    j["levels"] = std::move(lvls);
    return j.dump(2) + "\n";
}

std::pair<RootedGraph, ConstructionLog> construct(const ConstructionPlan& plan, uint64_t seed) {
    plan.validate();
    RootedGraph g = single_vertex_graph();
    ConstructionLog log;
    for (size_t i = 0; i < plan.levels.size(); ++i) {
        const ConstructionPlan::Level& lv = plan.levels[i];
        AugmentationSpec spec{lv.d, lv.h, plan.augmentation_rate(i), lv.epsilon, lv.ell_max};
        LevelLog entry;
        entry.level = static_cast<int>(i) + 1;
        entry.warnings = spec.validate();

        const uint64_t level_seed = derive_seed(seed, 7919ULL * (i + 1));
        entry.find_result =
            find_crossing_length(g, spec, lv.horizon, plan.sampling, level_seed, plan.margin);
        if (entry.find_result.inconclusive) {
            log.levels.push_back(std::move(entry));
            log.aborted = true;
            log.abort_reason = "level " + std::to_string(i + 1) +
                               ": crossing length inconclusive at ell=" +
                               std::to_string(log.levels.back().find_result.undecided_ell);
            return {std::move(g), std::move(log)};
        }
        entry.crossing_length = std::max(1, *entry.find_result.length);
        if (*entry.find_result.length < 1)
            entry.warnings.push_back("crossing length was degenerate (0); clamped to 1");

        g = build_augmented_graph(g, spec, entry.crossing_length);
        entry.vertex_count = g.vertex_count();
        entry.edge_count = static_cast<int>(g.edges().size());
        entry.max_degree = g.max_degree();
        entry.diameter = g.tree_diameter();
        entry.root = g.root_or_throw();
        log.levels.push_back(std::move(entry));
    }
    return {std::move(g), std::move(log)};
}

std::string VerifyLevelReport::to_json_string() const {
    nlohmann::json j;
    j["conditional_occupation"] =
        nlohmann::json::parse(conditional_occupation.to_json_string());
    j["crossing_at_target"] = nlohmann::json::parse(crossing_at_target.to_json_string());
    j["crossing_at_prime"] = nlohmann::json::parse(crossing_at_prime.to_json_string());
    return j.dump(2) + "\n";
}

VerifyLevelReport verify_level(const RootedGraph& g_level, const RootedGraph& g_next,
                               const VerifyLevelParams& params, uint64_t seed) {
    if (!(params.lambda_prime < params.lambda_target) &&
        params.lambda_prime != params.lambda_target)
        throw ConfigError("verify_level: lambda_prime must not exceed lambda_target");
    if (!(params.horizon > 0.0)) throw ConfigError("verify_level: horizon must be positive");
    if (g_level.vertex_count() >= g_next.vertex_count())
        throw ConfigError("verify_level: augmented graph must extend the level graph");
    for (int v = 0; v < g_level.vertex_count(); ++v)
        if (!(g_level.tag(v) == g_next.tag(v)))
            throw ConfigError("verify_level: level graph is not a tagged prefix of the "
                              "augmented graph");

    const int o = g_level.root_or_throw();
    const int new_root = g_next.root_or_throw();
    auto g = std::make_shared<const RootedGraph>(g_next);
    Configuration initial = all_vertices(g_level);

    std::vector<uint8_t> mask(static_cast<size_t>(g_next.vertex_count()), 0);
    for (int v = 0; v < g_level.vertex_count(); ++v) mask[static_cast<size_t>(v)] = 1;

    const SamplingPlan& plan = params.plan;
    const int64_t n = std::max<int64_t>(plan.n ? *plan.n : plan.n_initial, 2);
    const int workers = detail::effective_workers(plan);

    // Per replica, one shared field serves the conditioned run at the target
    // rate and the coupled crossing runs at both rates.
    // outcome bits: 1 = accepted, 2 = occupation of the new root exceeded the
    // threshold, 4 = new root hit at lambda_prime, 8 = new root hit at target.
    std::vector<uint8_t> outcomes(static_cast<size_t>(n), 0);
    std::atomic<int64_t> evaluated{0};
    (void)evaluated;
    auto replica = [&](int64_t i) {
        const GraphicalField field = detail::sample_events(
            g, detail::field_rate_floor(params.lambda_target), params.horizon,
            derive_seed(seed, i));
        uint8_t bits = 0;

        RunOptions conf_opts;
        conf_opts.confine_mask = &mask;
        conf_opts.occupation_watch_vertex = o;
        conf_opts.occupation_watch_threshold = params.t_cond;
        const Trajectory confined = run(field, params.lambda_target, initial, conf_opts);
        if (confined.occupation_watch_reached) {
            bits |= 1;
            RunOptions occ_opts;
            occ_opts.occupation_watch_vertex = new_root;
            occ_opts.occupation_watch_threshold = params.occupation_threshold;
            const Trajectory traj = run(field, params.lambda_target, initial, occ_opts);
            if (traj.occupation_watch_reached) bits |= 2;
        }

        RunOptions cross_opts;
        cross_opts.stop_on_hit = new_root;
        const auto trajs = run_coupled(field, {params.lambda_prime, params.lambda_target},
                                       {initial, initial}, cross_opts);
        if (trajs[0].hit_time[static_cast<size_t>(new_root)] >= 0.0) bits |= 4;
        if (trajs[1].hit_time[static_cast<size_t>(new_root)] >= 0.0) bits |= 8;
        outcomes[static_cast<size_t>(i)] = bits;
    };
    {
        std::vector<std::thread> pool;
        std::atomic<int64_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto body = [&]() {
            try {
                for (;;) {
                    const int64_t start = next.fetch_add(8);
                    if (start >= n) return;
                    for (int64_t i = start; i < std::min(start + 8, n); ++i) replica(i);
                }
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        };
        for (int w = 0; w < workers - 1; ++w) pool.emplace_back(body);
        body();
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    int64_t accepted = 0, occupied = 0, hit_prime = 0, hit_target = 0;
    for (uint8_t b : outcomes) {
        if (b & 1) ++accepted;
        if (b & 2) ++occupied;
        if (b & 4) ++hit_prime;
        if (b & 8) ++hit_target;
    }
    if (accepted == 0 ||
        static_cast<double>(accepted) / static_cast<double>(n) < params.acceptance_floor)
        throw Inconclusive("verify_level: conditioning too rare, accepted " +
                           std::to_string(accepted) + " of " + std::to_string(n));

    auto proportion = [&](const std::string& name, int64_t k, int64_t total,
                          double lambda) {
        EstimatorResult r;
        r.estimator = name;
        std::ostringstream id;
        id << name << "|g=" << std::hex << g_next.content_hash() << std::dec
           << "|lam=" << lambda << "|T=" << params.horizon;
        r.instance_id = id.str();
        r.n = total;
        r.seed = seed;
        r.point = static_cast<double>(k) / static_cast<double>(total);
        const Interval ci = wilson_interval(k, total, plan.confidence);
        r.ci_low = ci.low;
        r.ci_high = ci.high;
        r.metadata["k"] = std::to_string(k);
        return r;
    };

    VerifyLevelReport report;
    report.conditional_occupation =
        proportion("level_conditional_occupation", occupied, accepted, params.lambda_target);
    report.conditional_occupation.metadata["accepted"] = std::to_string(accepted);
    report.conditional_occupation.metadata["t_cond"] = std::to_string(params.t_cond);
    report.conditional_occupation.metadata["occupation_threshold"] =
        std::to_string(params.occupation_threshold);
    report.crossing_at_target =
        proportion("level_crossing", hit_target, n, params.lambda_target);
    report.crossing_at_prime = proportion("level_crossing", hit_prime, n, params.lambda_prime);
    return report;
}

}  // namespace cproc
