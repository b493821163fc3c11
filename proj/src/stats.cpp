#include "cproc/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cproc/errors.hpp"

namespace cproc {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must be in (0,1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double student_t_quantile(double p, double df) {
    if (df <= 0.0) throw ConfigError("student_t_quantile: df must be positive");
    const double z = normal_quantile(p);
    const double z3 = z * z * z;
    const double z5 = z3 * z * z;
    const double z7 = z5 * z * z;
    double t = z;
    t += (z3 + z) / (4.0 * df);
    t += (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * df * df);
    t += (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * df * df * df);
    return t;
}

Interval wilson_interval(int64_t k, int64_t n, double confidence) {
    if (n <= 0) throw ConfigError("wilson_interval: n must be positive");
    if (k < 0 || k > n) throw ConfigError("wilson_interval: k out of range");
    const double z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double hw =
        z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval ci;
    ci.low = std::max(0.0, center - hw);
    ci.high = std::min(1.0, center + hw);
    if (k == 0) ci.low = 0.0;
    if (k == n) ci.high = 1.0;
    return ci;
}

double wilson_half_width(int64_t k, int64_t n, double confidence) {
    const Interval ci = wilson_interval(k, n, confidence);
    return (ci.high - ci.low) / 2.0;
}

MeanSummary mean_t_interval(const std::vector<double>& values, double confidence) {
    if (values.empty()) throw ConfigError("mean_t_interval: no values");
    MeanSummary s;
    s.n = static_cast<int64_t>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n == 1) {
        s.stddev = 0.0;
        s.ci = {s.mean, s.mean};
        return s;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    const double t = student_t_quantile(1.0 - (1.0 - confidence) / 2.0,
                                        static_cast<double>(s.n - 1));
    const double hw = t * s.stddev / std::sqrt(static_cast<double>(s.n));
    s.ci = {s.mean - hw, s.mean + hw};
    return s;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ConfigError("fit_line: need at least two points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double vxx = sxx - sx * sx / n;
    const double vxy = sxy - sx * sy / n;
    const double vyy = syy - sy * sy / n;
    if (vxx <= 0.0) throw ConfigError("fit_line: degenerate x values");
    LineFit f;
    f.slope = vxy / vxx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r_squared = (vyy <= 0.0) ? 1.0 : std::clamp(vxy * vxy / (vxx * vyy), 0.0, 1.0);
    return f;
}

}  // namespace cproc
