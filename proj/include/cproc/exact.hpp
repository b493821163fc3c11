#pragma once
#include <memory>

#include "cproc/graph.hpp"
#include "cproc/simulate.hpp"

namespace cproc {

// Exact continuous-time Markov chain analysis of the contact process on
// graphs small enough to enumerate all 2^|V| subsets. Ground truth for the
// Monte Carlo estimators. Dense linear solves by default (cap 12 vertices);
// a Gauss-Seidel fallback behind `use_iterative` reaches 20 vertices.
struct GeneratorModel {
    std::shared_ptr<const RootedGraph> graph;
    double lambda = 1.0;
    int cap = 12;
    bool use_iterative = false;
    int iterative_cap = 20;
};

// Probability that `target` is ever infected before absorption at the empty
// configuration, via first-step equations on the hit-augmented chain.
double exact_hit_probability(const GeneratorModel& model, const Configuration& initial,
                             int target);

// Probability that `target` is infected by time t (uniformization of the
// hit-augmented chain, truncation error < 1e-10).
double exact_hit_probability_by(const GeneratorModel& model, const Configuration& initial,
                                int target, double t);

// Expected absorption time.
double exact_expected_extinction(const GeneratorModel& model, const Configuration& initial);

// P(process still alive at time t), via uniformization (error < 1e-10).
double exact_survival_at(const GeneratorModel& model, const Configuration& initial, double t);

}  // namespace cproc
