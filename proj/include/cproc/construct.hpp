#pragma once
#include <string>
#include <vector>

#include "cproc/estimators.hpp"
#include "cproc/graph.hpp"

namespace cproc {

// Recursive augmentation: starting from a single vertex, each level measures
// the crossing length on the current graph and appends tree + line. In
// target_survives mode every level augments at lambda_target and the per-level
// lambda_prime values (strictly increasing, below the target) are the rates
// the finished graph is meant to shut out. In target_dies mode each level
// augments at its own lambda_prime (strictly decreasing, above the target).
struct ConstructionPlan {
    enum class Mode { target_survives, target_dies };

    struct Level {
        int d = 2;
        int h = 1;
        double epsilon = 0.1;
        double horizon = 50.0;
        int ell_max = 50;
        double lambda_prime = 0.0;
    };

    Mode mode = Mode::target_survives;
    double lambda_target = 1.0;
    std::vector<Level> levels;
    SamplingPlan sampling;
    int margin = 20;

    void validate() const;
    std::string to_json_string() const;
    static ConstructionPlan from_json_string(const std::string& text);
    static ConstructionPlan load(const std::string& path);

    // Rate used by the level's augmentation step.
    double augmentation_rate(size_t level_index) const;
};

struct LevelLog {
    int level = 0;
    int crossing_length = 0;
    CrossingLengthResult find_result;
    int vertex_count = 0;
    int edge_count = 0;
    int max_degree = 0;
    int diameter = 0;
    int root = 0;
    std::vector<std::string> warnings;
};

struct ConstructionLog {
    std::vector<LevelLog> levels;
    bool aborted = false;
    std::string abort_reason;
    std::string to_json_string() const;
};

std::pair<RootedGraph, ConstructionLog> construct(const ConstructionPlan& plan, uint64_t seed);

// Two-sided check of one augmentation step: at the target rate the new root
// is reached (and stays occupied) with high probability given the old root
// stays busy; at the lower rate it is rarely ever reached.
struct VerifyLevelParams {
    double lambda_target = 1.0;
    double lambda_prime = 0.5;
    double t_cond = 1.0;
    double occupation_threshold = 0.5;
    double horizon = 50.0;
    SamplingPlan plan;
    double acceptance_floor = 0.01;
};

struct VerifyLevelReport {
    EstimatorResult conditional_occupation;  // at lambda_target, conditioned
    EstimatorResult crossing_at_target;      // new root ever hit, lambda_target
    EstimatorResult crossing_at_prime;       // new root ever hit, lambda_prime
    std::string to_json_string() const;
};

VerifyLevelReport verify_level(const RootedGraph& g_level, const RootedGraph& g_next,
                               const VerifyLevelParams& params, uint64_t seed);

}  // namespace cproc
