#include "rrcdsp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrcdsp {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace {

// Acklam's inverse-normal rational approximation.
double acklam_quantile(double p) {
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

    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    double x = acklam_quantile(p);
    // One Halley refinement against the exact CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

Moments summarize(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2)
        throw std::invalid_argument("summarize: need at least 2 samples");

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double nd = static_cast<double>(n);
    Moments out;
    out.mean = mean;
    out.std_dev = std::sqrt(m2 / (nd - 1.0));
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;

    if (n >= 4 && m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.ex_kurtosis = m4 / (m2 * m2) - 3.0;
        out.shape_defined = true;
    } else {
        out.skewness = std::numeric_limits<double>::quiet_NaN();
        out.ex_kurtosis = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t bins) {
    if (bins < 2)
        throw std::invalid_argument("histogram: need at least 2 bins");
    if (samples.empty())
        throw std::invalid_argument("histogram: empty sample set");

    double lo = samples[0], hi = samples[0];
    for (double v : samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0; // constant sample: one occupied unit-width bin

    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double v : samples) {
        auto k = static_cast<std::size_t>((v - lo) / width);
        if (k >= bins) k = bins - 1;
        ++counts[k];
    }

    std::vector<HistogramBin> out(bins);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * width);
    for (std::size_t k = 0; k < bins; ++k) {
        out[k].center = lo + (static_cast<double>(k) + 0.5) * width;
        out[k].density = static_cast<double>(counts[k]) * norm;
    }
    return out;
}

double fraction_at_or_above(std::span<const double> samples, double threshold) {
    if (samples.empty())
        throw std::invalid_argument("fraction_at_or_above: empty sample set");
    std::size_t hits = 0;
    for (double v : samples)
        if (v >= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

} // namespace rrcdsp
