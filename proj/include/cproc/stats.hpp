#pragma once
#include <cstdint>
#include <vector>

namespace cproc {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Inverse standard normal CDF (Acklam's rational approximation, |eps| < 1.2e-9).
double normal_quantile(double p);

// Student-t quantile via the Cornish-Fisher expansion around the normal
// quantile; accurate to a few 1e-4 for df >= 3, which is ample for Monte
// Carlo interval construction.
double student_t_quantile(double p, double df);

// Wilson score interval for a binomial proportion. Exact at the boundaries:
// k == 0 gives low == 0 and k == n gives high == 1.
Interval wilson_interval(int64_t k, int64_t n, double confidence = 0.95);

double wilson_half_width(int64_t k, int64_t n, double confidence = 0.95);

// t-interval for a sample mean.
struct MeanSummary {
    double mean = 0.0;
    double stddev = 0.0;
    int64_t n = 0;
    Interval ci;
};
MeanSummary mean_t_interval(const std::vector<double>& values, double confidence = 0.95);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace cproc
