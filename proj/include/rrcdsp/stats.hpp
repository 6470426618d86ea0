#pragma once
// Scalar sample statistics and the standard-normal CDF / quantile pair used
// to translate between EMI targets and reliability levels.

#include <cstddef>
#include <span>
#include <vector>

namespace rrcdsp {

/// Phi(z): standard normal CDF. Accurate to ~1e-15 via erfc.
double normal_cdf(double z);

/// Phi^-1(p), p in (0,1). Acklam's rational approximation refined with one
/// Halley step; absolute error well below 1e-9.
double normal_quantile(double p);

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;       // unbiased (n-1) standard deviation
    double skewness = 0.0;      // m3 / m2^{3/2}
    double ex_kurtosis = 0.0;   // m4 / m2^2 - 3
    bool shape_defined = false; // false when variance is 0 or n < 4
};

/// Mean/std for n >= 2; skewness and excess kurtosis when n >= 4 and the
/// sample is not degenerate (otherwise shape_defined stays false).
Moments summarize(std::span<const double> samples);

struct HistogramBin {
    double center;
    double density;
};

/// Normalized histogram over [min, max] of the samples; densities integrate
/// to 1 over the bin widths. A degenerate (constant) sample gets a single
/// occupied unit-width bin.
std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t bins);

/// Fraction of samples >= threshold (ties count as successes).
double fraction_at_or_above(std::span<const double> samples, double threshold);

} // namespace rrcdsp
