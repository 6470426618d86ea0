#pragma once
// Gaussian-process regression with a squared-exponential kernel whose
// roughness enters as 10^omega_i per input dimension, homoscedastic relative
// noise delta^2 folded into the correlation matrix, and a zero-mean prior.
//
// Covariance convention: cov = sigma2 * (R + delta2 * I), so the physical
// noise variance is sigma2 * delta2. Inputs are affinely standardized to
// [0, 1] per column inside fit(); the map is stored so callers always work
// in physical units.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrcdsp/rng.hpp"

namespace rrcdsp::gp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dataset {
    Matrix inputs;                         // n rows x D columns, physical units
    Vector outputs;                        // n responses
    std::vector<std::string> column_names; // optional metadata
    std::vector<std::string> column_units;

    Dataset() = default;
    Dataset(Matrix x, Vector y,
            std::vector<std::string> names = {},
            std::vector<std::string> units = {});

    Eigen::Index size() const { return inputs.rows(); }
    Eigen::Index dim() const { return inputs.cols(); }
};

struct Hyperparameters {
    Vector omega;   // D roughness exponents: kernel uses 10^omega_i
    double sigma2;  // prior variance, > 0
    double delta2;  // relative noise variance, >= 0

    void validate(Eigen::Index dim) const;
};

struct FitConfig {
    double omega_lo = -6.0, omega_hi = 6.0;          // per dimension
    double log10_sigma2_lo = -6.0, log10_sigma2_hi = 6.0;
    double log10_delta2_lo = -12.0, log10_delta2_hi = 0.0;
    int restarts = 10;
    std::uint64_t seed = 0;
    int max_evals_per_dim = 400; // Nelder-Mead budget
};

struct FitReport {
    double log_likelihood = 0.0;
    int restarts = 0;
    int total_evals = 0;
    double jitter = 0.0; // jitter applied to factorize the final model, 0 if none
};

/// Affine per-column map from physical inputs onto [0, 1].
struct Standardizer {
    Vector offset; // column minimum
    Vector scale;  // column range, 1 where the column is constant

    static Standardizer from(const Matrix& inputs);
    Matrix apply(const Matrix& x) const;
    Vector apply_row(const Vector& x) const;
};

struct Prediction {
    double mean;
    double variance; // latent posterior variance, clamped at 0
};

class TrainedGP {
public:
    TrainedGP(Dataset data, Standardizer std_map, Hyperparameters hyper, FitReport report);

    Prediction predict(const Vector& x) const;
    double sample_posterior(const Vector& x, CounterRng& rng) const;

    const Dataset& dataset() const { return data_; }
    const Hyperparameters& hyper() const { return hyper_; }
    const Standardizer& standardizer() const { return std_map_; }
    const FitReport& fit_report() const { return report_; }
    Eigen::Index dim() const { return data_.dim(); }

    /// Lower-triangular Cholesky factor of R_delta (plus any jitter).
    const Matrix& chol() const { return chol_; }
    const Vector& weights() const { return weights_; }

private:
    Dataset data_;
    Standardizer std_map_;
    Hyperparameters hyper_;
    FitReport report_;
    Matrix std_inputs_; // standardized training inputs
    Matrix chol_;
    Vector weights_;    // R_delta^{-1} y
};

/// exp(-sum_i 10^{omega_i} (x_i - x'_i)^2); symmetric, 1 at zero distance.
double correlation(const Vector& x, const Vector& x_prime, const Vector& omega);

/// sigma2 * (R + delta2 * I) over the dataset rows, in the given units.
Matrix build_covariance(const Dataset& data, const Hyperparameters& hyper);

/// Gaussian log marginal likelihood of the outputs under the zero-mean prior.
/// Factorization falls back to a jitter ladder (1e-10 .. 1e-6 of the mean
/// diagonal) before reporting failure.
double log_likelihood(const Dataset& data, const Hyperparameters& hyper);

/// Maximum-likelihood fit: multistart Nelder-Mead over (omega, log10 delta2)
/// with sigma2 profiled in closed form at every step. Deterministic for a
/// fixed seed; restart k always starts from the same point regardless of the
/// total restart count.
TrainedGP fit(const Dataset& data, const FitConfig& config = {});

struct FactorResult {
    Matrix chol;
    double jitter; // 0 when the matrix factorized cleanly
};

/// Cholesky of R_delta with the jitter ladder. Throws on total failure.
FactorResult factor_correlation(const Matrix& std_inputs, const Vector& omega, double delta2);

} // namespace rrcdsp::gp
