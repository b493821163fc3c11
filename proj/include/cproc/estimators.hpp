#pragma once
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cproc/field.hpp"
#include "cproc/graph.hpp"
#include "cproc/simulate.hpp"
#include "cproc/stats.hpp"

namespace cproc {

// Replica budget: either a fixed n, or sequential doubling from n_initial
// until the CI half-width target is met or n_max is reached. All randomness
// is derived from the master seed; results are independent of worker count.
struct SamplingPlan {
    std::optional<int64_t> n;
    std::optional<double> target_half_width;
    int64_t n_initial = 1000;
    int64_t n_max = 100000;
    double confidence = 0.95;
    int workers = 0;          // 0 = hardware default
    double window_start = 8.0;  // first horizon window for adaptive replica runs
};

struct EstimatorResult {
    std::string estimator;
    std::string instance_id;
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    int64_t n = 0;
    uint64_t seed = 0;
    std::map<std::string, std::string> metadata;

    std::string to_json_string() const;
    std::string csv_row() const;
    static std::string csv_header();
};

struct DecayCell {
    double t = 0.0;
    double p_hat = 0.0;
    int64_t k = 0;
    int64_t n = 0;
    bool dropped = false;  // zero count, excluded from the fit
};

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<DecayCell> cells;
    int64_t n = 0;
    uint64_t seed = 0;
    std::string to_json_string() const;
};

// Membership threshold for "the tree is ignited": at least count_required()
// vertices infected at height h/2 of the tree. The displayed rule uses
// (m/2)^(h/2); `use_full_mean` switches to m^(h/2).
struct IgnitionThreshold {
    int d = 2;
    int h = 1;
    double lambda = 1.0;
    bool use_full_mean = false;

    int level() const { return h / 2; }
    double offspring_mean() const;
    int64_t count_required() const;
};

// Fraction of replicas still alive at the horizon (upper-biased proxy for
// survival as t -> infinity), with a Wilson interval.
EstimatorResult estimate_survival(std::shared_ptr<const RootedGraph> g, double lambda,
                                  const Configuration& initial, double horizon,
                                  const SamplingPlan& plan, uint64_t seed);

// Probability that line position ell of the probe graph is ever infected
// within the horizon, starting from base + tree fully infected.
EstimatorResult estimate_crossing(const RootedGraph& base, const AugmentationSpec& spec,
                                  int ell, double horizon, const SamplingPlan& plan,
                                  uint64_t seed, int margin = 20);

struct CrossingCell {
    int ell = 0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    int64_t n = 0;
    std::string decision;  // "above", "below", "undecided"
};

struct CrossingLengthResult {
    std::optional<int> length;  // smallest ell with upper CI < 1 - epsilon
    bool degenerate_zero = false;
    bool inconclusive = false;
    int undecided_ell = -1;
    std::string note;
    std::vector<CrossingCell> diagnostics;
    int64_t replicas_used = 0;
    uint64_t seed = 0;
    std::string to_json_string() const;
};

// Smallest ell whose crossing probability is confidently below 1 - epsilon,
// by exponential search plus bisection over the (monotone) crossing curve.
// Replicas are shared across cells, so per-replica crossing extents are
// nested and the estimated curve is monotone by construction.
CrossingLengthResult find_crossing_length(const RootedGraph& base, const AugmentationSpec& spec,
                                          double horizon, const SamplingPlan& plan,
                                          uint64_t seed, int margin = 20);

// Probability that an infection starting at one end of a segment of length
// ell ever reaches the other end (within the horizon).
EstimatorResult estimate_p_line(int ell, double lambda, double horizon,
                                const SamplingPlan& plan, uint64_t seed);

// Paired end-to-end passage estimates at two rates on shared fields. Within a
// replica the low-rate hit implies the high-rate hit, so the ratio is
// estimated as a conditional proportion k_low / k_high.
struct PairedLineCell {
    int ell = 0;
    int64_t n = 0;
    int64_t k_low = 0;
    int64_t k_high = 0;
    double ratio = 0.0;
    double ratio_ci_low = 0.0;
    double ratio_ci_high = 1.0;
    double log_ratio = 0.0;
    double log_ratio_se = 0.0;
    double eta_hat = 0.0;  // per-site rate advantage: ratio^(-1/ell)
};
std::vector<PairedLineCell> paired_line_ratio(const std::vector<int>& ells, double lambda_low,
                                              double lambda_high, double horizon,
                                              const SamplingPlan& plan, uint64_t seed);

// Mean extinction time; replicas still alive at the horizon are censored at
// the horizon, making the reported value a lower bound (flagged in metadata).
EstimatorResult estimate_extinction_mean(std::shared_ptr<const RootedGraph> g, double lambda,
                                         const Configuration& initial, double horizon,
                                         const SamplingPlan& plan, uint64_t seed);

// Least-squares fit of log P(alive at t) over a time grid.
DecayFit fit_decay(std::shared_ptr<const RootedGraph> g, double lambda,
                   const Configuration& initial, const std::vector<double>& time_grid,
                   const SamplingPlan& plan, uint64_t seed);

// P(tree ignition | the process confined to the base keeps the base root
// occupied beyond t_cond), by rejection over shared fields. line_length < 0
// uses spec.ell_max for the appended line.
EstimatorResult estimate_ignition(const RootedGraph& base, const AugmentationSpec& spec,
                                  const Configuration& initial, double t_cond, double horizon,
                                  const SamplingPlan& plan, uint64_t seed,
                                  int line_length = -1, double acceptance_floor = 0.01,
                                  bool use_full_mean = false);

// Both sides of the source-window crossing bound on a segment: the window
// event (source held infected on [0, t]) must have probability at most
// e * (t + 1) times the single-point passage probability.
struct ExpDecayBoundResult {
    EstimatorResult lhs;  // window event
    EstimatorResult rhs;  // single-point passage
    double bound_factor = 0.0;
    bool inequality_ok = false;
    std::string to_json_string() const;
};
ExpDecayBoundResult estimate_bound_exp_decay(int ell, double lambda, double t, double horizon,
                                             const SamplingPlan& plan, uint64_t seed);

// Shared replica helpers (also used by the construction driver).
namespace detail {
// Survival / extinction with horizon-doubling windows: equivalent to one run
// at the full horizon, cheaper when the process dies early.
struct ReplicaOutcome {
    bool alive = false;
    double extinction_or_horizon = 0.0;
};
ReplicaOutcome replica_extinction(const std::shared_ptr<const RootedGraph>& g, double lambda,
                                  const Configuration& initial, double horizon,
                                  uint64_t replica_seed, double window_start);
int effective_workers(const SamplingPlan& plan);
double field_rate_floor(double lambda);
// Replica fields skip the per-stream copies; the event sequence is identical.
GraphicalField sample_events(const std::shared_ptr<const RootedGraph>& g, double rate,
                             double horizon, uint64_t seed);
}  // namespace detail

}  // namespace cproc
