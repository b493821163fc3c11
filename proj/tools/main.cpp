// Command-line front end: graph builders, simulation, the exact small-graph
// solver, Monte Carlo estimators, and the recursive construction driver.
// Units: time is measured in mean recovery times (recovery rate fixed at 1);
// lambda is the per-directed-edge transmission rate. All randomness flows
// from --seed.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cproc/construct.hpp"
#include "cproc/estimators.hpp"
#include "cproc/exact.hpp"

using namespace cproc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInconclusive = 3;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + out_path);
    out << text;
}

// accepts "3" or "key=3"
int parse_kv_int(const std::string& token) {
    const auto eq = token.find('=');
    const std::string v = eq == std::string::npos ? token : token.substr(eq + 1);
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + token + "'");
    }
}

Configuration parse_initial(const std::string& text, const RootedGraph& g) {
    if (text == "all") return all_vertices(g);
    if (text == "root") return {g.root_or_throw()};
    Configuration c;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            c.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("bad vertex list: '" + text + "'");
        }
    }
    return normalize_configuration(c, g.vertex_count());
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad number list: '" + text + "'");
        }
    }
    return out;
}

struct GraphSource {
    std::string file;
    int segment_ell = -1;
    std::vector<std::string> tree_dh;
    bool single = false;

    void add_flags(CLI::App* cmd) {
        auto* g = cmd->add_option("--graph", file, "graph JSON file");
        auto* s = cmd->add_option("--segment", segment_ell, "line segment of given length");
        auto* t = cmd->add_option("--tree", tree_dh, "truncated tree, e.g. --tree d=2 h=3")
                      ->expected(2);
        auto* v = cmd->add_flag("--single", single, "single rooted vertex");
        g->excludes(s)->excludes(t)->excludes(v);
        s->excludes(t)->excludes(v);
        t->excludes(v);
    }

    RootedGraph build() const {
        if (!file.empty()) return RootedGraph::load(file);
        if (segment_ell >= 0) return build_segment(segment_ell);
        if (tree_dh.size() == 2)
            return build_truncated_tree(parse_kv_int(tree_dh[0]), parse_kv_int(tree_dh[1]));
        if (single) return single_vertex_graph();
        throw ConfigError("no graph source given (--graph/--segment/--tree/--single)");
    }
};

struct PlanFlags {
    int64_t n = -1;
    double target_hw = -1.0;
    int64_t n_initial = 1000;
    int64_t n_max = 100000;
    double confidence = 0.95;
    int workers = 0;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--n", n, "fixed replica count");
        cmd->add_option("--target-hw", target_hw,
                        "sequential sampling until this CI half-width");
        cmd->add_option("--n-initial", n_initial, "starting replica count");
        cmd->add_option("--n-max", n_max, "replica budget");
        cmd->add_option("--confidence", confidence, "CI level (default 0.95)");
        cmd->add_option("--workers", workers, "worker threads (0 = auto)");
    }

    SamplingPlan plan() const {
        SamplingPlan p;
        if (n > 0) p.n = n;
        if (target_hw > 0) p.target_half_width = target_hw;
        p.n_initial = n_initial;
        p.n_max = n_max;
        p.confidence = confidence;
        p.workers = workers;
        return p;
    }

    void from_json(const nlohmann::json& j) {
        for (const auto& [key, _] : j.items())
            if (key != "n" && key != "target_half_width" && key != "n_initial" &&
                key != "n_max" && key != "confidence")
                throw ConfigError("config file: unknown plan key '" + key + "'");
        if (j.contains("n")) n = j["n"].get<int64_t>();
        if (j.contains("target_half_width")) target_hw = j["target_half_width"].get<double>();
        if (j.contains("n_initial")) n_initial = j["n_initial"].get<int64_t>();
        if (j.contains("n_max")) n_max = j["n_max"].get<int64_t>();
        if (j.contains("confidence")) confidence = j["confidence"].get<double>();
    }
};

nlohmann::json load_config_file(const std::string& path,
                                const std::vector<std::string>& allowed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config file: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file: expected an object");
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("config file: unknown key '" + key + "'");
    if (!j.contains("seed")) throw ConfigError("config file: seed is mandatory");
    return j;
}

void emit_result(const EstimatorResult& r, const std::string& format,
                 const std::string& out_path) {
    if (format == "csv")
        write_output(EstimatorResult::csv_header() + "\n" + r.csv_row() + "\n", out_path);
    else
        write_output(r.to_json_string(), out_path);
}

int run_selftest() {
    int failures = 0;
    auto check = [&failures](bool ok, const std::string& name) {
        std::printf("%-44s %s\n", name.c_str(), ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    };

    check(build_segment(0).vertex_count() == 1, "segment(0) is a single vertex");
    check(build_segment(1).edges().size() == 1, "segment(1) is a single edge");
    check(build_truncated_tree(2, 1).vertex_count() == 3, "tree(2,1) has 3 vertices");
    check(build_truncated_tree(2, 3).vertex_count() == 15, "tree(2,3) has 15 vertices");

    const RootedGraph base = single_vertex_graph();
    AugmentationSpec spec{2, 1, 1.0, 0.2, 2};
    const RootedGraph probe = build_probe_graph(base, spec);
    check(probe.vertex_count() == 7 && probe.connected(), "probe graph glues connected");
    const RootedGraph aug = build_augmented_graph(base, spec, 3);
    check(aug.degree(aug.root_or_throw()) == 1, "augmented root has degree 1");

    auto g1 = std::make_shared<const RootedGraph>(build_segment(1));
    const GraphicalField f1 = sample_field(g1, 1.0, 10.0, 7);
    const GraphicalField f2 = sample_field(g1, 1.0, 10.0, 7);
    check(f1.content_hash() == f2.content_hash(), "fields regenerate bit-exactly");
    check(filter_arrows(f1, 1e-300).count() == 0, "vanishing rate keeps no arrows");

    const Trajectory empty_run = run(f1, 1.0, {});
    check(empty_run.extinction_time && *empty_run.extinction_time == 0.0,
          "empty start is absorbed at time 0");
    const DualTrajectory dual = run_dual(f1, 1.0, {0}, 3.0, 3.0);
    check(dual.config_at_start == Configuration{0}, "zero-length dual window is the target");

    const GeneratorModel model{g1, 1.0};
    check(std::fabs(exact_hit_probability(model, {0}, 1) - 0.5) < 1e-12,
          "edge hit probability solves to 1/2");
    check(std::fabs(exact_expected_extinction(model, {0, 1}) - 2.0) < 1e-12,
          "edge extinction time solves to 2");

    SamplingPlan tiny;
    tiny.n = 50;
    auto single = std::make_shared<const RootedGraph>(single_vertex_graph());
    const EstimatorResult surv = estimate_survival(single, 0.0, {}, 5.0, tiny, 1);
    check(surv.point == 0.0, "empty-start survival estimates to 0");
    const EstimatorResult pline = estimate_p_line(0, 1.0, 5.0, tiny, 1);
    check(pline.point == 1.0, "zero-length passage is certain");

    std::printf("%s\n", failures == 0 ? "selftest: all checks passed"
                                      : "selftest: FAILURES present");
    return failures == 0 ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "contact process toolkit: graphical-construction simulation, exact small-graph "
        "analysis, and Monte Carlo estimation on desert-oasis graphs.\n"
        "Units: time in mean recovery times (recovery rate fixed at 1); lambda is the "
        "per-directed-edge transmission rate."};
    app.require_subcommand(1);

    // ---- build-graph ----
    auto* cmd_build = app.add_subcommand("build-graph", "build a graph and write it as JSON");
    GraphSource build_src;
    build_src.add_flags(cmd_build);
    std::string build_base_file;
    std::vector<std::string> build_d, build_h;
    double build_lambda = 1.0, build_epsilon = 0.1;
    int build_ell_max = 50, build_length = -1;
    bool want_probe = false, want_aug = false;
    cmd_build->add_flag("--probe", want_probe, "append tree + probe line to --base");
    cmd_build->add_flag("--augmented", want_aug,
                        "append tree + line of --length, re-rooted at the far end");
    cmd_build->add_option("--base", build_base_file, "base graph file for --probe/--augmented");
    cmd_build->add_option("--d", build_d, "tree arity for --probe/--augmented")->expected(1);
    cmd_build->add_option("--height", build_h, "tree height for --probe/--augmented")->expected(1);
    cmd_build->add_option("--lambda", build_lambda, "rate stored in the augmentation spec");
    cmd_build->add_option("--epsilon", build_epsilon, "crossing-length tolerance");
    cmd_build->add_option("--ell-max", build_ell_max, "probe line truncation");
    cmd_build->add_option("--length", build_length, "line length for --augmented");
    std::string build_out;
    cmd_build->add_option("--out", build_out, "output file (default stdout)");

    // ---- simulate ----
    auto* cmd_sim = app.add_subcommand("simulate", "run one trajectory and export it");
    GraphSource sim_src;
    sim_src.add_flags(cmd_sim);
    double sim_lambda = 1.0, sim_horizon = 10.0, sim_lambda_max = -1.0;
    std::string sim_initial = "root", sim_snapshots, sim_out;
    uint64_t sim_seed = 0;
    cmd_sim->add_option("--lambda", sim_lambda, "infection rate")->required();
    cmd_sim->add_option("--horizon", sim_horizon, "time horizon")->required();
    cmd_sim->add_option("--initial", sim_initial, "initial set: 'all', 'root', or '0,1,2'");
    cmd_sim->add_option("--lambda-max", sim_lambda_max,
                        "field rate ceiling (defaults to lambda)");
    cmd_sim->add_option("--snapshots", sim_snapshots, "comma list of snapshot times");
    cmd_sim->add_option("--seed", sim_seed, "master seed")->required();
    cmd_sim->add_option("--out", sim_out, "output file (default stdout)");
    std::string sim_dump_field;
    cmd_sim->add_option("--dump-field", sim_dump_field,
                        "also dump the realized field as JSON lines (debug)");

    // ---- oracle ----
    auto* cmd_oracle = app.add_subcommand(
        "oracle", "exact continuous-time Markov chain answers on small graphs");
    GraphSource oracle_src;
    oracle_src.add_flags(cmd_oracle);
    double oracle_lambda = 1.0;
    std::string oracle_initial = "root", oracle_out;
    int oracle_hit = -1;
    double oracle_survival_at = -1.0, oracle_hit_by = -1.0;
    bool oracle_extinction = false, oracle_iterative = false;
    cmd_oracle->add_option("--lambda", oracle_lambda, "infection rate")->required();
    cmd_oracle->add_option("--initial", oracle_initial, "initial set");
    cmd_oracle->add_option("--hit", oracle_hit, "P(target ever infected)");
    cmd_oracle->add_option("--hit-by", oracle_hit_by, "with --hit: P(infected by this time)");
    cmd_oracle->add_flag("--expected-extinction", oracle_extinction,
                         "expected absorption time");
    cmd_oracle->add_option("--survival-at", oracle_survival_at, "P(alive at this time)");
    cmd_oracle->add_flag("--iterative", oracle_iterative,
                         "Gauss-Seidel fallback (up to 20 vertices)");
    cmd_oracle->add_option("--out", oracle_out, "output file (default stdout)");

    // ---- estimate ----
    auto* cmd_est = app.add_subcommand("estimate", "Monte Carlo estimators");
    cmd_est->require_subcommand(1);
    struct EstCommon {
        PlanFlags plan;
        uint64_t seed = 0;
        std::string out, format = "json", config;
        CLI::Option* seed_opt = nullptr;
    };
    auto add_common = [](CLI::App* cmd, EstCommon& c, bool config_allowed = true) {
        c.plan.add_flags(cmd);
        c.seed_opt = cmd->add_option("--seed", c.seed, "master seed (mandatory)");
        cmd->add_option("--out", c.out, "output file (default stdout)");
        cmd->add_option("--format", c.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        if (config_allowed) cmd->add_option("--config", c.config, "JSON config file");
    };
    auto need_seed = [](const EstCommon& c) {
        if (c.config.empty() && c.seed_opt->count() == 0)
            throw ConfigError("--seed is mandatory for estimator subcommands");
    };

    auto* est_surv = cmd_est->add_subcommand("survival", "fraction alive at the horizon");
    GraphSource surv_src;
    surv_src.add_flags(est_surv);
    EstCommon surv_c;
    double surv_lambda = 1.0, surv_horizon = 50.0;
    std::string surv_initial = "root";
    est_surv->add_option("--lambda", surv_lambda, "infection rate");
    est_surv->add_option("--horizon", surv_horizon, "time horizon");
    est_surv->add_option("--initial", surv_initial, "initial set");
    add_common(est_surv, surv_c);

    auto* est_cross = cmd_est->add_subcommand(
        "crossing", "P(line position ell infected) on the probe graph");
    EstCommon cross_c;
    std::string cross_base_file;
    int cross_d = 2, cross_h = 1, cross_ell = 0, cross_ell_max = 50, cross_margin = 20;
    double cross_lambda = 1.0, cross_epsilon = 0.1, cross_horizon = 50.0;
    est_cross->add_option("--base", cross_base_file, "base graph file (default single vertex)");
    est_cross->add_option("--d", cross_d, "tree arity");
    est_cross->add_option("--height", cross_h, "tree height");
    est_cross->add_option("--lambda", cross_lambda, "infection rate");
    est_cross->add_option("--epsilon", cross_epsilon, "spec tolerance (stored)");
    est_cross->add_option("--ell-max", cross_ell_max, "probe line truncation");
    est_cross->add_option("--margin", cross_margin, "safety margin before the truncation");
    est_cross->add_option("--ell", cross_ell, "line position");
    est_cross->add_option("--horizon", cross_horizon, "time horizon");
    add_common(est_cross, cross_c);

    auto* est_pline = cmd_est->add_subcommand("p-line", "end-to-end passage on a segment");
    EstCommon pline_c;
    int pline_ell = 1;
    double pline_lambda = 1.0, pline_horizon = 200.0;
    est_pline->add_option("--ell", pline_ell, "segment length");
    est_pline->add_option("--lambda", pline_lambda, "infection rate");
    est_pline->add_option("--horizon", pline_horizon, "time horizon");
    add_common(est_pline, pline_c);

    auto* est_ext = cmd_est->add_subcommand("extinction", "mean extinction time");
    GraphSource ext_src;
    ext_src.add_flags(est_ext);
    EstCommon ext_c;
    double ext_lambda = 1.0, ext_horizon = 200.0;
    std::string ext_initial = "all";
    est_ext->add_option("--lambda", ext_lambda, "infection rate");
    est_ext->add_option("--horizon", ext_horizon, "censoring horizon");
    est_ext->add_option("--initial", ext_initial, "initial set");
    add_common(est_ext, ext_c, false);

    auto* est_decay = cmd_est->add_subcommand("decay", "log-survival slope over a time grid");
    GraphSource decay_src;
    decay_src.add_flags(est_decay);
    EstCommon decay_c;
    double decay_lambda = 1.0;
    std::string decay_initial = "root", decay_grid = "5,10,15,20";
    est_decay->add_option("--lambda", decay_lambda, "infection rate");
    est_decay->add_option("--initial", decay_initial, "initial set");
    est_decay->add_option("--grid", decay_grid, "comma list of grid times");
    add_common(est_decay, decay_c, false);

    auto* est_ign = cmd_est->add_subcommand(
        "ignition", "P(tree ignites | base root busy beyond t-cond)");
    EstCommon ign_c;
    std::string ign_base_file, ign_initial = "all";
    int ign_d = 2, ign_h = 1, ign_ell_max = 50, ign_length = -1;
    double ign_lambda = 1.0, ign_epsilon = 0.1, ign_tcond = 1.0, ign_horizon = 50.0;
    double ign_floor = 0.01;
    bool ign_full_mean = false;
    est_ign->add_option("--base", ign_base_file, "base graph file (default single vertex)");
    est_ign->add_option("--d", ign_d, "tree arity");
    est_ign->add_option("--height", ign_h, "tree height");
    est_ign->add_option("--lambda", ign_lambda, "infection rate");
    est_ign->add_option("--epsilon", ign_epsilon, "spec tolerance (stored)");
    est_ign->add_option("--ell-max", ign_ell_max, "line truncation");
    est_ign->add_option("--length", ign_length, "appended line length (default ell-max)");
    est_ign->add_option("--initial", ign_initial, "initial set inside the base");
    est_ign->add_option("--t-cond", ign_tcond, "conditioning occupation of the base root");
    est_ign->add_option("--horizon", ign_horizon, "time horizon");
    est_ign->add_option("--acceptance-floor", ign_floor, "minimum acceptance rate");
    est_ign->add_flag("--full-mean-threshold", ign_full_mean,
                      "ignition count m^(h/2) instead of (m/2)^(h/2)");
    add_common(est_ign, ign_c, false);

    // ---- find-l ----
    auto* cmd_findl = app.add_subcommand(
        "find-l", "smallest line position whose crossing drops below 1 - epsilon");
    EstCommon findl_c;
    std::string findl_base_file;
    int findl_d = 2, findl_h = 1, findl_ell_max = 50, findl_margin = 20;
    double findl_lambda = 1.0, findl_epsilon = 0.1, findl_horizon = 50.0;
    cmd_findl->add_option("--base", findl_base_file, "base graph file (default single vertex)");
    cmd_findl->add_option("--d", findl_d, "tree arity");
    cmd_findl->add_option("--height", findl_h, "tree height");
    cmd_findl->add_option("--lambda", findl_lambda, "infection rate");
    cmd_findl->add_option("--epsilon", findl_epsilon, "threshold tolerance");
    cmd_findl->add_option("--ell-max", findl_ell_max, "probe line truncation");
    cmd_findl->add_option("--margin", findl_margin, "safety margin before the truncation");
    cmd_findl->add_option("--horizon", findl_horizon, "time horizon");
    add_common(cmd_findl, findl_c);

    // ---- construct ----
    auto* cmd_construct = app.add_subcommand(
        "construct", "run the recursive augmentation described by a plan file");
    std::string construct_plan_file, construct_out_graph, construct_out_log;
    uint64_t construct_seed = 0;
    cmd_construct->add_option("--plan", construct_plan_file, "plan JSON file")->required();
    cmd_construct->add_option("--seed", construct_seed, "master seed")->required();
    cmd_construct->add_option("--out-graph", construct_out_graph, "output graph file");
    cmd_construct->add_option("--out-log", construct_out_log, "output log file");
    int construct_workers = 0;
    cmd_construct->add_option("--workers", construct_workers, "worker threads (0 = auto)");

    // ---- verify-level ----
    auto* cmd_verify = app.add_subcommand(
        "verify-level", "two-sided check of one augmentation step");
    EstCommon verify_c;
    std::string verify_level_file, verify_next_file;
    VerifyLevelParams verify_params;
    cmd_verify->add_option("--level", verify_level_file, "level graph file")->required();
    cmd_verify->add_option("--augmented", verify_next_file, "augmented graph file")->required();
    cmd_verify->add_option("--lambda-target", verify_params.lambda_target, "target rate");
    cmd_verify->add_option("--lambda-prime", verify_params.lambda_prime, "lower probe rate");
    cmd_verify->add_option("--t-cond", verify_params.t_cond, "conditioning occupation");
    cmd_verify->add_option("--occupation-threshold", verify_params.occupation_threshold,
                           "new-root occupation threshold");
    cmd_verify->add_option("--horizon", verify_params.horizon, "time horizon");
    add_common(cmd_verify, verify_c, false);

    // ---- selftest ----
    auto* cmd_selftest =
        app.add_subcommand("selftest", "run the built-in boundary-case battery");

    const std::string units_footer =
        "Units: time in mean recovery times (recovery rate fixed at 1); lambda is the "
        "per-directed-edge transmission rate.";
    app.footer(units_footer);
    for (CLI::App* sc : app.get_subcommands(nullptr)) {
        sc->footer(units_footer);
        for (CLI::App* nested : sc->get_subcommands(nullptr)) nested->footer(units_footer);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (cmd_build->parsed()) {
            RootedGraph g = [&]() {
                if (want_probe || want_aug) {
                    if (build_base_file.empty())
                        throw ConfigError("--probe/--augmented need --base");
                    const RootedGraph base = RootedGraph::load(build_base_file);
                    if (build_d.empty() || build_h.empty())
                        throw ConfigError("--probe/--augmented need --d and --h");
                    AugmentationSpec spec{parse_kv_int(build_d[0]), parse_kv_int(build_h[0]),
                                          build_lambda, build_epsilon, build_ell_max};
                    for (const std::string& w : spec.validate())
                        std::cerr << "warning: " << w << "\n";
                    if (want_aug) {
                        if (build_length < 1)
                            throw ConfigError("--augmented needs --length >= 1");
                        return build_augmented_graph(base, spec, build_length);
                    }
                    return build_probe_graph(base, spec);
                }
                return build_src.build();
            }();
            write_output(g.to_json_string(), build_out);
            return kExitOk;
        }

        if (cmd_sim->parsed()) {
            auto g = std::make_shared<const RootedGraph>(sim_src.build());
            const double lambda_max = sim_lambda_max > 0
                                          ? sim_lambda_max
                                          : detail::field_rate_floor(sim_lambda);
            const GraphicalField field = sample_field(g, lambda_max, sim_horizon, sim_seed);
            if (!sim_dump_field.empty())
                write_output(field.dump_events_jsonl(), sim_dump_field);
            RunOptions opts;
            if (!sim_snapshots.empty()) opts.snapshot_times = parse_double_list(sim_snapshots);
            const Trajectory traj =
                run(field, sim_lambda, parse_initial(sim_initial, *g), opts);
            write_output(traj.to_json_string(), sim_out);
            return kExitOk;
        }

        if (cmd_oracle->parsed()) {
            auto g = std::make_shared<const RootedGraph>(oracle_src.build());
            GeneratorModel model{g, oracle_lambda};
            model.use_iterative = oracle_iterative;
            const Configuration initial = parse_initial(oracle_initial, *g);
            nlohmann::json j;
            if (oracle_hit >= 0 && oracle_hit_by >= 0.0) {
                j["quantity"] = "hit_probability_by";
                j["value"] =
                    exact_hit_probability_by(model, initial, oracle_hit, oracle_hit_by);
                j["error_bound"] = 1e-10;
            } else if (oracle_hit >= 0) {
                j["quantity"] = "hit_probability";
                j["value"] = exact_hit_probability(model, initial, oracle_hit);
                j["error_bound"] = oracle_iterative ? 1e-9 : 1e-12;
            } else if (oracle_extinction) {
                j["quantity"] = "expected_extinction";
                j["value"] = exact_expected_extinction(model, initial);
                j["error_bound"] = oracle_iterative ? 1e-9 : 1e-12;
            } else if (oracle_survival_at >= 0.0) {
                j["quantity"] = "survival_at";
                j["value"] = exact_survival_at(model, initial, oracle_survival_at);
                j["error_bound"] = 1e-10;
            } else {
                throw ConfigError(
                    "oracle: pick one of --hit / --expected-extinction / --survival-at");
            }
            write_output(j.dump(2) + "\n", oracle_out);
            return kExitOk;
        }

        if (est_surv->parsed()) {
            need_seed(surv_c);
            if (!surv_c.config.empty()) {
                const nlohmann::json j = load_config_file(
                    surv_c.config, {"graph", "lambda", "horizon", "initial", "plan", "seed"});
                if (j.contains("graph")) surv_src.file = j["graph"].get<std::string>();
                if (j.contains("lambda")) surv_lambda = j["lambda"].get<double>();
                if (j.contains("horizon")) surv_horizon = j["horizon"].get<double>();
                if (j.contains("initial")) surv_initial = j["initial"].get<std::string>();
                if (j.contains("plan")) surv_c.plan.from_json(j["plan"]);
                surv_c.seed = j["seed"].get<uint64_t>();
            }
            auto g = std::make_shared<const RootedGraph>(surv_src.build());
            const EstimatorResult r =
                estimate_survival(g, surv_lambda, parse_initial(surv_initial, *g),
                                  surv_horizon, surv_c.plan.plan(), surv_c.seed);
            emit_result(r, surv_c.format, surv_c.out);
            return kExitOk;
        }

        if (est_cross->parsed()) {
            need_seed(cross_c);
            if (!cross_c.config.empty()) {
                const nlohmann::json j = load_config_file(
                    cross_c.config, {"base", "d", "h", "lambda", "epsilon", "ell_max",
                                     "margin", "ell", "horizon", "plan", "seed"});
                if (j.contains("base")) cross_base_file = j["base"].get<std::string>();
                if (j.contains("d")) cross_d = j["d"].get<int>();
                if (j.contains("h")) cross_h = j["h"].get<int>();
                if (j.contains("lambda")) cross_lambda = j["lambda"].get<double>();
                if (j.contains("epsilon")) cross_epsilon = j["epsilon"].get<double>();
                if (j.contains("ell_max")) cross_ell_max = j["ell_max"].get<int>();
                if (j.contains("margin")) cross_margin = j["margin"].get<int>();
                if (j.contains("ell")) cross_ell = j["ell"].get<int>();
                if (j.contains("horizon")) cross_horizon = j["horizon"].get<double>();
                if (j.contains("plan")) cross_c.plan.from_json(j["plan"]);
                cross_c.seed = j["seed"].get<uint64_t>();
            }
            const RootedGraph base = cross_base_file.empty()
                                         ? single_vertex_graph()
                                         : RootedGraph::load(cross_base_file);
            AugmentationSpec spec{cross_d, cross_h, cross_lambda, cross_epsilon,
                                  cross_ell_max};
            const EstimatorResult r =
                estimate_crossing(base, spec, cross_ell, cross_horizon, cross_c.plan.plan(),
                                  cross_c.seed, cross_margin);
            emit_result(r, cross_c.format, cross_c.out);
            return kExitOk;
        }

        if (est_pline->parsed()) {
            need_seed(pline_c);
            if (!pline_c.config.empty()) {
                const nlohmann::json j = load_config_file(
                    pline_c.config, {"ell", "lambda", "horizon", "plan", "seed"});
                if (j.contains("ell")) pline_ell = j["ell"].get<int>();
                if (j.contains("lambda")) pline_lambda = j["lambda"].get<double>();
                if (j.contains("horizon")) pline_horizon = j["horizon"].get<double>();
                if (j.contains("plan")) pline_c.plan.from_json(j["plan"]);
                pline_c.seed = j["seed"].get<uint64_t>();
            }
            const EstimatorResult r = estimate_p_line(
                pline_ell, pline_lambda, pline_horizon, pline_c.plan.plan(), pline_c.seed);
            emit_result(r, pline_c.format, pline_c.out);
            return kExitOk;
        }

        if (est_ext->parsed()) {
            need_seed(ext_c);
            auto g = std::make_shared<const RootedGraph>(ext_src.build());
            const EstimatorResult r =
                estimate_extinction_mean(g, ext_lambda, parse_initial(ext_initial, *g),
                                         ext_horizon, ext_c.plan.plan(), ext_c.seed);
            emit_result(r, ext_c.format, ext_c.out);
            return kExitOk;
        }

        if (est_decay->parsed()) {
            need_seed(decay_c);
            auto g = std::make_shared<const RootedGraph>(decay_src.build());
            const DecayFit fit =
                fit_decay(g, decay_lambda, parse_initial(decay_initial, *g),
                          parse_double_list(decay_grid), decay_c.plan.plan(), decay_c.seed);
            write_output(fit.to_json_string(), decay_c.out);
            return kExitOk;
        }

        if (est_ign->parsed()) {
            need_seed(ign_c);
            const RootedGraph base = ign_base_file.empty()
                                         ? single_vertex_graph()
                                         : RootedGraph::load(ign_base_file);
            AugmentationSpec spec{ign_d, ign_h, ign_lambda, ign_epsilon, ign_ell_max};
            const EstimatorResult r = estimate_ignition(
                base, spec, parse_initial(ign_initial, base), ign_tcond, ign_horizon,
                ign_c.plan.plan(), ign_c.seed, ign_length, ign_floor, ign_full_mean);
            emit_result(r, ign_c.format, ign_c.out);
            return kExitOk;
        }

        if (cmd_findl->parsed()) {
            need_seed(findl_c);
            if (!findl_c.config.empty()) {
                const nlohmann::json j = load_config_file(
                    findl_c.config, {"base", "d", "h", "lambda", "epsilon", "ell_max",
                                     "margin", "horizon", "plan", "seed"});
                if (j.contains("base")) findl_base_file = j["base"].get<std::string>();
                if (j.contains("d")) findl_d = j["d"].get<int>();
                if (j.contains("h")) findl_h = j["h"].get<int>();
                if (j.contains("lambda")) findl_lambda = j["lambda"].get<double>();
                if (j.contains("epsilon")) findl_epsilon = j["epsilon"].get<double>();
                if (j.contains("ell_max")) findl_ell_max = j["ell_max"].get<int>();
                if (j.contains("margin")) findl_margin = j["margin"].get<int>();
                if (j.contains("horizon")) findl_horizon = j["horizon"].get<double>();
                if (j.contains("plan")) findl_c.plan.from_json(j["plan"]);
                findl_c.seed = j["seed"].get<uint64_t>();
            }
            const RootedGraph base = findl_base_file.empty()
                                         ? single_vertex_graph()
                                         : RootedGraph::load(findl_base_file);
            AugmentationSpec spec{findl_d, findl_h, findl_lambda, findl_epsilon,
                                  findl_ell_max};
            for (const std::string& w : spec.validate())
                std::cerr << "warning: " << w << "\n";
            const CrossingLengthResult r = find_crossing_length(
                base, spec, findl_horizon, findl_c.plan.plan(), findl_c.seed, findl_margin);
            write_output(r.to_json_string(), findl_c.out);
            return r.inconclusive ? kExitInconclusive : kExitOk;
        }

        if (cmd_construct->parsed()) {
            ConstructionPlan plan = ConstructionPlan::load(construct_plan_file);
            plan.sampling.workers = construct_workers;
            const auto [g, log] = construct(plan, construct_seed);
            if (!construct_out_graph.empty()) g.save(construct_out_graph);
            write_output(log.to_json_string(), construct_out_log);
            return log.aborted ? kExitInconclusive : kExitOk;
        }

        if (cmd_verify->parsed()) {
            need_seed(verify_c);
            const RootedGraph g_level = RootedGraph::load(verify_level_file);
            const RootedGraph g_next = RootedGraph::load(verify_next_file);
            verify_params.plan = verify_c.plan.plan();
            const VerifyLevelReport report =
                verify_level(g_level, g_next, verify_params, verify_c.seed);
            write_output(report.to_json_string(), verify_c.out);
            return kExitOk;
        }

        if (cmd_selftest->parsed()) return run_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Inconclusive& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return kExitInconclusive;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
