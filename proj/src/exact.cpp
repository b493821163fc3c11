#include "cproc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cproc {
namespace {

uint32_t config_mask(const Configuration& c) {
    uint32_t m = 0;
    for (int v : c) m |= (1u << v);
    return m;
}

int check_model(const GeneratorModel& model) {
    if (!model.graph) throw ConfigError("oracle: null graph");
    const int n = model.graph->vertex_count();
    const int cap = model.use_iterative ? model.iterative_cap : model.cap;
    if (n > cap)
        throw ConfigError("oracle: " + std::to_string(n) + " vertices exceeds cap " +
                          std::to_string(cap));
    if (n > 25) throw ConfigError("oracle: state space too large");
    if (model.lambda < 0.0) throw ConfigError("oracle: lambda must be nonnegative");
    return n;
}

// Transition list of one state: (next state, rate). `hit_target` collects the
// total rate routed into configurations containing `target` (target < 0
// disables the split). Rates: each infected vertex recovers at rate 1 and
// infects each healthy neighbor at rate lambda.
struct Transitions {
    const RootedGraph& g;
    double lambda;
    int target;

    template <typename F>  // F(next_mask, rate); returns total exit rate
    double for_state(uint32_t s, F&& f, double* hit_rate = nullptr) const {
        double total = 0.0;
        const int n = g.vertex_count();
        for (int v = 0; v < n; ++v) {
            if (s & (1u << v)) {
                f(s & ~(1u << v), 1.0);
                total += 1.0;
            } else {
                int infected_neighbors = 0;
                for (int w : g.neighbors(v))
                    if (s & (1u << w)) ++infected_neighbors;
                if (infected_neighbors == 0) continue;
                const double rate = lambda * infected_neighbors;
                if (v == target && hit_rate)
                    *hit_rate += rate;
                else
                    f(s | (1u << v), rate);
                total += rate;
            }
        }
        return total;
    }
};

// Solve A x = b by Gaussian elimination with partial pivoting. A is row-major.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-300)
            throw std::runtime_error("oracle: singular linear system");
        if (piv != col) {
            for (size_t c = col; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const double d = a[col * n + col];
        for (size_t r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] / d;
            if (factor == 0.0) continue;
            for (size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
        x[r] = acc / a[r * n + r];
    }
    return x;
}

// First-step equations q(s) x(s) = b(s) + sum rate(s->s') x(s'), solved either
// densely or by Gauss-Seidel sweeps. `states` lists the unknown states;
// `index` maps masks to unknown ids (-1 = known-zero boundary).
std::vector<double> solve_first_step(const Transitions& tr, const std::vector<uint32_t>& states,
                                     const std::vector<int32_t>& index,
                                     const std::vector<double>& rhs_extra, bool iterative) {
    const size_t m = states.size();
    if (!iterative) {
        std::vector<double> a(m * m, 0.0), b = rhs_extra;
        for (size_t i = 0; i < m; ++i) {
            double hit = 0.0;
            double total = tr.for_state(
                states[i],
                [&](uint32_t next, double rate) {
                    const int32_t j = index[next];
                    if (j >= 0) a[i * m + static_cast<size_t>(j)] -= rate;
                },
                &hit);
            a[i * m + i] += total;
            b[i] += hit;  // transitions into target-containing states pay 1
        }
        return solve_dense(std::move(a), std::move(b));
    }
    std::vector<double> x(m, 0.0);
    for (int iter = 0; iter < 200000; ++iter) {
        double max_delta = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double acc = rhs_extra[i], hit = 0.0;
            double total = tr.for_state(
                states[i],
                [&](uint32_t next, double rate) {
                    const int32_t j = index[next];
                    if (j >= 0) acc += rate * x[static_cast<size_t>(j)];
                },
                &hit);
            acc += hit;
            const double nx = acc / total;
            max_delta = std::max(max_delta, std::fabs(nx - x[i]));
            x[i] = nx;
        }
        if (max_delta < 1e-13) return x;
    }
    throw std::runtime_error("oracle: iterative solve did not converge");
}

// Poisson(mu) weights covering all but < tail of the mass, built outward from
// the mode to stay in range for large mu.
std::vector<double> poisson_weights(double mu, size_t& k_low, double tail) {
    const size_t mode = static_cast<size_t>(mu);
    double log_wmode = -mu;
    if (mode > 0) {
        log_wmode = static_cast<double>(mode) * std::log(mu) - mu - std::lgamma(double(mode) + 1.0);
    }
    const double wmode = std::exp(log_wmode);
    std::vector<double> down, up{wmode};
    double w = wmode;
    for (size_t k = mode; k > 0 && w > wmode * 1e-18; --k) {
        w *= static_cast<double>(k) / mu;
        down.push_back(w);
    }
    w = wmode;
    for (size_t k = mode + 1; w > wmode * 1e-18; ++k) {
        w *= mu / static_cast<double>(k);
        up.push_back(w);
    }
    k_low = mode - down.size();
    std::vector<double> weights(down.rbegin(), down.rend());
    weights.insert(weights.end(), up.begin(), up.end());
    double sum = 0.0;
    for (double x : weights) sum += x;
    if (1.0 - sum > tail) throw std::runtime_error("oracle: poisson truncation too coarse");
    for (double& x : weights) x /= sum;
    return weights;
}

// Mass accumulated in `absorbing` states by time t, by uniformization.
double absorbed_mass_at(const Transitions& tr, int n, uint32_t initial_mask,
                        const std::vector<uint32_t>& state_list,
                        const std::vector<int32_t>& index, bool to_hit, double t) {
    // Uniformization rate: max exit rate over all states.
    double rate_max = 0.0;
    for (uint32_t s : state_list) {
        double total = tr.for_state(s, [](uint32_t, double) {});
        rate_max = std::max(rate_max, total);
    }
    (void)n;
    if (rate_max == 0.0 || t == 0.0) return 0.0;

    const size_t m = state_list.size();
    std::vector<double> v(m + 1, 0.0);  // last slot = absorbed ("hit") mass
    v[static_cast<size_t>(index[initial_mask])] = 1.0;

    const double mu = rate_max * t;
    size_t k_low = 0;
    const std::vector<double> weights = poisson_weights(mu, k_low, 1e-10);

    double acc = 0.0;
    std::vector<double> next(m + 1, 0.0);
    const size_t k_high = k_low + weights.size();
    for (size_t k = 0; k < k_high; ++k) {
        const double absorbed =
            to_hit ? v[m] : v[static_cast<size_t>(index[0])] + v[m];
        if (k >= k_low) acc += weights[k - k_low] * absorbed;
        if (k + 1 == k_high) break;
        std::fill(next.begin(), next.end(), 0.0);
        next[m] = v[m];
        for (size_t i = 0; i < m; ++i) {
            if (v[i] == 0.0) continue;
            double hit = 0.0;
            const double total = tr.for_state(
                state_list[i],
                [&](uint32_t s2, double rate) {
                    next[static_cast<size_t>(index[s2])] += v[i] * rate / rate_max;
                },
                &hit);
            next[m] += v[i] * hit / rate_max;
            next[i] += v[i] * (1.0 - total / rate_max);
        }
        v.swap(next);
    }
    return acc;
}

}  // namespace

double exact_hit_probability(const GeneratorModel& model, const Configuration& initial,
                             int target) {
    const int n = check_model(model);
    if (target < 0 || target >= n) throw ConfigError("oracle: target out of range");
    const Configuration init = normalize_configuration(initial, n);
    const uint32_t init_mask = config_mask(init);
    if (init_mask & (1u << target)) return 1.0;
    if (init_mask == 0) return 0.0;
    if (model.lambda == 0.0) return 0.0;

    // Unknowns: nonempty configurations avoiding the target.
    const uint32_t full = (n >= 32) ? ~0u : ((1u << n) - 1);
    std::vector<uint32_t> states;
    std::vector<int32_t> index(static_cast<size_t>(full) + 1, -1);
    for (uint32_t s = 1; s <= full; ++s) {
        if (s & (1u << target)) continue;
        index[s] = static_cast<int32_t>(states.size());
        states.push_back(s);
    }
    std::vector<double> rhs(states.size(), 0.0);
    Transitions tr{*model.graph, model.lambda, target};
    const std::vector<double> x = solve_first_step(tr, states, index, rhs, model.use_iterative);
    return x[static_cast<size_t>(index[init_mask])];
}

double exact_hit_probability_by(const GeneratorModel& model, const Configuration& initial,
                                int target, double t) {
    const int n = check_model(model);
    if (target < 0 || target >= n) throw ConfigError("oracle: target out of range");
    if (t < 0.0) throw ConfigError("oracle: t must be nonnegative");
    const Configuration init = normalize_configuration(initial, n);
    const uint32_t init_mask = config_mask(init);
    if (init_mask & (1u << target)) return 1.0;
    if (init_mask == 0 || model.lambda == 0.0) return 0.0;

    const uint32_t full = (1u << n) - 1;
    std::vector<uint32_t> states;
    std::vector<int32_t> index(static_cast<size_t>(full) + 1, -1);
    for (uint32_t s = 0; s <= full; ++s) {
        if (s & (1u << target)) continue;
        index[s] = static_cast<int32_t>(states.size());
        states.push_back(s);
    }
    Transitions tr{*model.graph, model.lambda, target};
    return absorbed_mass_at(tr, n, init_mask, states, index, /*to_hit=*/true, t);
}

double exact_expected_extinction(const GeneratorModel& model, const Configuration& initial) {
    const int n = check_model(model);
    const Configuration init = normalize_configuration(initial, n);
    const uint32_t init_mask = config_mask(init);
    if (init_mask == 0) return 0.0;

    const uint32_t full = (1u << n) - 1;
    std::vector<uint32_t> states;
    std::vector<int32_t> index(static_cast<size_t>(full) + 1, -1);
    for (uint32_t s = 1; s <= full; ++s) {
        index[s] = static_cast<int32_t>(states.size());
        states.push_back(s);
    }
    std::vector<double> rhs(states.size(), 1.0);  // +1 unit of expected time per jump equation
    Transitions tr{*model.graph, model.lambda, -1};
    const std::vector<double> x = solve_first_step(tr, states, index, rhs, model.use_iterative);
    return x[static_cast<size_t>(index[init_mask])];
}

double exact_survival_at(const GeneratorModel& model, const Configuration& initial, double t) {
    const int n = check_model(model);
    if (t < 0.0) throw ConfigError("oracle: t must be nonnegative");
    const Configuration init = normalize_configuration(initial, n);
    const uint32_t init_mask = config_mask(init);
    if (init_mask == 0) return 0.0;
    if (t == 0.0) return 1.0;

    const uint32_t full = (1u << n) - 1;
    std::vector<uint32_t> states(static_cast<size_t>(full) + 1);
    std::vector<int32_t> index(static_cast<size_t>(full) + 1);
    for (uint32_t s = 0; s <= full; ++s) {
        states[s] = s;
        index[s] = static_cast<int32_t>(s);
    }
    Transitions tr{*model.graph, model.lambda, -1};
    const double dead = absorbed_mass_at(tr, n, init_mask, states, index, /*to_hit=*/false, t);
    return 1.0 - dead;
}

}  // namespace cproc
