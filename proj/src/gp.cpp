#include "rrcdsp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rrcdsp::gp {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

Matrix correlation_matrix(const Matrix& x, const Vector& omega) {
    const Eigen::Index n = x.rows();
    Vector w = omega.unaryExpr([](double o) { return std::pow(10.0, o); });
    Matrix r = Matrix::Ones(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < x.cols(); ++k) {
                const double d = x(i, k) - x(j, k);
                s += w(k) * d * d;
            }
            const double c = std::exp(-s);
            r(i, j) = c;
            r(j, i) = c;
        }
    }
    return r;
}

} // namespace

Dataset::Dataset(Matrix x, Vector y, std::vector<std::string> names, std::vector<std::string> units)
    : inputs(std::move(x)), outputs(std::move(y)),
      column_names(std::move(names)), column_units(std::move(units)) {
    if (inputs.rows() < 1) throw std::invalid_argument("Dataset: need at least one row");
    if (inputs.rows() != outputs.size())
        throw std::invalid_argument("Dataset: inputs/outputs row count mismatch");
    require_finite(inputs, "Dataset inputs");
    require_finite(outputs, "Dataset outputs");
    if (!column_names.empty() && column_names.size() != static_cast<std::size_t>(inputs.cols()))
        throw std::invalid_argument("Dataset: column_names size mismatch");
}

void Hyperparameters::validate(Eigen::Index dim) const {
    if (omega.size() != dim) throw std::invalid_argument("Hyperparameters: omega dimension mismatch");
    if (!omega.allFinite()) throw std::invalid_argument("Hyperparameters: non-finite omega");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("Hyperparameters: sigma2 must be positive and finite");
    if (delta2 < 0.0 || !std::isfinite(delta2))
        throw std::invalid_argument("Hyperparameters: delta2 must be non-negative and finite");
}

Standardizer Standardizer::from(const Matrix& inputs) {
    Standardizer s;
    s.offset = inputs.colwise().minCoeff();
    Vector hi = inputs.colwise().maxCoeff();
    s.scale = hi - s.offset;
    for (Eigen::Index k = 0; k < s.scale.size(); ++k)
        if (s.scale(k) <= 0.0) s.scale(k) = 1.0;
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    return (x.rowwise() - offset.transpose()).array().rowwise() / scale.transpose().array();
}

Vector Standardizer::apply_row(const Vector& x) const {
    return (x - offset).cwiseQuotient(scale);
}

double correlation(const Vector& x, const Vector& x_prime, const Vector& omega) {
    if (x.size() != x_prime.size() || x.size() != omega.size())
        throw std::invalid_argument("correlation: dimension mismatch");
    require_finite(x, "correlation x");
    require_finite(x_prime, "correlation x'");
    require_finite(omega, "correlation omega");
    double s = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double d = x(k) - x_prime(k);
        s += std::pow(10.0, omega(k)) * d * d;
    }
    return std::exp(-s);
}

Matrix build_covariance(const Dataset& data, const Hyperparameters& hyper) {
    hyper.validate(data.dim());
    Matrix r = correlation_matrix(data.inputs, hyper.omega);
    r.diagonal().array() += hyper.delta2;
    return hyper.sigma2 * r;
}

FactorResult factor_correlation(const Matrix& std_inputs, const Vector& omega, double delta2) {
    Matrix r_delta = correlation_matrix(std_inputs, omega);
    r_delta.diagonal().array() += delta2;
    const double mean_diag = r_delta.diagonal().mean();

    Eigen::LLT<Matrix> llt(r_delta);
    if (llt.info() == Eigen::Success)
        return {Matrix(llt.matrixL()), 0.0};

    for (double j = 1e-10 * mean_diag; j <= 1e-6 * mean_diag; j *= 2.0) {
        Matrix attempt = r_delta;
        attempt.diagonal().array() += j;
        llt.compute(attempt);
        if (llt.info() == Eigen::Success)
            return {Matrix(llt.matrixL()), j};
    }
    std::ostringstream msg;
    msg << "factorization failed after max jitter (delta2=" << delta2
        << ", omega=[" << omega.transpose() << "])";
    throw std::runtime_error(msg.str());
}

namespace {

// Log likelihood given a factorized R_delta; sigma2 fixed by the caller.
double log_likelihood_from_factor(const Matrix& chol, const Vector& y, double sigma2) {
    const auto n = static_cast<double>(y.size());
    const Vector alpha = chol.triangularView<Eigen::Lower>().solve(y);
    const double quad = alpha.squaredNorm() / sigma2;
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < chol.rows(); ++i) log_det += std::log(chol(i, i));
    log_det = 2.0 * log_det + n * std::log(sigma2);
    return -0.5 * (quad + log_det + n * std::log(2.0 * std::numbers::pi));
}

} // namespace

double log_likelihood(const Dataset& data, const Hyperparameters& hyper) {
    hyper.validate(data.dim());
    const auto factor = factor_correlation(data.inputs, hyper.omega, hyper.delta2);
    return log_likelihood_from_factor(factor.chol, data.outputs, hyper.sigma2);
}

TrainedGP::TrainedGP(Dataset data, Standardizer std_map, Hyperparameters hyper, FitReport report)
    : data_(std::move(data)), std_map_(std::move(std_map)),
      hyper_(std::move(hyper)), report_(report) {
    hyper_.validate(data_.dim());
    std_inputs_ = std_map_.apply(data_.inputs);
    auto factor = factor_correlation(std_inputs_, hyper_.omega, hyper_.delta2);
    chol_ = std::move(factor.chol);
    report_.jitter = std::max(report_.jitter, factor.jitter);
    weights_ = chol_.triangularView<Eigen::Lower>().solve(data_.outputs);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
}

Prediction TrainedGP::predict(const Vector& x) const {
    if (x.size() != data_.dim())
        throw std::invalid_argument("predict: input dimension mismatch");
    require_finite(x, "predict input");

    const Vector xs = std_map_.apply_row(x);
    const Eigen::Index n = data_.size();
    Vector w = hyper_.omega.unaryExpr([](double o) { return std::pow(10.0, o); });
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
            const double d = xs(k) - std_inputs_(i, k);
            s += w(k) * d * d;
        }
        r(i) = std::exp(-s);
    }

    Prediction out;
    out.mean = r.dot(weights_);
    const Vector v = chol_.triangularView<Eigen::Lower>().solve(r);
    out.variance = std::max(0.0, hyper_.sigma2 * (1.0 - v.squaredNorm()));
    return out;
}

double TrainedGP::sample_posterior(const Vector& x, CounterRng& rng) const {
    const Prediction p = predict(x);
    const double z = rng.normal();
    return p.mean + std::sqrt(p.variance) * z;
}

namespace {

struct Objective {
    const Matrix& std_inputs;
    const Vector& y;
    const FitConfig& cfg;
    mutable int evals = 0;

    // theta = (omega_0..omega_{D-1}, log10 delta2); sigma2 profiled.
    double neg_ll(const Vector& theta, double* sigma2_out = nullptr) const {
        ++evals;
        const Eigen::Index d = std_inputs.cols();
        const Vector omega = theta.head(d);
        const double delta2 = std::pow(10.0, theta(d));
        try {
            const auto factor = factor_correlation(std_inputs, omega, delta2);
            const Vector alpha = factor.chol.triangularView<Eigen::Lower>().solve(y);
            const auto n = static_cast<double>(y.size());
            double sigma2 = alpha.squaredNorm() / n;
            const double lo = std::pow(10.0, cfg.log10_sigma2_lo);
            const double hi = std::pow(10.0, cfg.log10_sigma2_hi);
            sigma2 = std::clamp(sigma2, lo, hi);
            if (sigma2_out) *sigma2_out = sigma2;
            return -log_likelihood_from_factor(factor.chol, y, sigma2);
        } catch (const std::runtime_error&) {
            return 1e300; // factorization failed even with jitter
        }
    }

    Vector clamp(Vector theta) const {
        const Eigen::Index d = std_inputs.cols();
        for (Eigen::Index k = 0; k < d; ++k)
            theta(k) = std::clamp(theta(k), cfg.omega_lo, cfg.omega_hi);
        theta(d) = std::clamp(theta(d), cfg.log10_delta2_lo, cfg.log10_delta2_hi);
        return theta;
    }
};

// Nelder-Mead with box clamping; deterministic for a fixed start.
Vector nelder_mead(const Objective& obj, Vector start, int max_evals, double* best_val) {
    const Eigen::Index dim = start.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

    std::vector<Vector> pts;
    std::vector<double> vals;
    pts.push_back(obj.clamp(start));
    vals.push_back(obj.neg_ll(pts[0]));
    for (Eigen::Index k = 0; k < dim; ++k) {
        Vector p = pts[0];
        p(k) += (p(k) < 0.0 ? 0.75 : -0.75);
        p = obj.clamp(p);
        pts.push_back(p);
        vals.push_back(obj.neg_ll(p));
    }

    auto order = [&] {
        std::vector<std::size_t> idx(pts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<Vector> p2(pts.size());
        std::vector<double> v2(vals.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = vals[idx[i]];
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    int evals = static_cast<int>(pts.size());
    while (evals < max_evals) {
        order();
        if (vals.back() - vals.front() < 1e-10) break;

        Vector centroid = Vector::Zero(dim);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= static_cast<double>(dim);

        const Vector reflected = obj.clamp(centroid + alpha * (centroid - pts.back()));
        const double fr = obj.neg_ll(reflected);
        ++evals;

        if (fr < vals.front()) {
            const Vector expanded = obj.clamp(centroid + gamma * (reflected - centroid));
            const double fe = obj.neg_ll(expanded);
            ++evals;
            if (fe < fr) {
                pts.back() = expanded;
                vals.back() = fe;
            } else {
                pts.back() = reflected;
                vals.back() = fr;
            }
        } else if (fr < vals[vals.size() - 2]) {
            pts.back() = reflected;
            vals.back() = fr;
        } else {
            const Vector contracted = obj.clamp(centroid + rho * (pts.back() - centroid));
            const double fc = obj.neg_ll(contracted);
            ++evals;
            if (fc < vals.back()) {
                pts.back() = contracted;
                vals.back() = fc;
            } else {
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = obj.clamp(pts[0] + shrink * (pts[i] - pts[0]));
                    vals[i] = obj.neg_ll(pts[i]);
                    ++evals;
                }
            }
        }
    }
    order();
    if (best_val) *best_val = vals.front();
    return pts.front();
}

} // namespace

TrainedGP fit(const Dataset& data, const FitConfig& config) {
    if (data.size() < 2) throw std::invalid_argument("fit: need at least 2 training points");
    if (config.restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");

    const Standardizer std_map = Standardizer::from(data.inputs);
    const Matrix std_inputs = std_map.apply(data.inputs);
    const Eigen::Index d = data.dim();

    Objective obj{std_inputs, data.outputs, config};
    const int budget = config.max_evals_per_dim * static_cast<int>(d + 1);

    double best_neg = std::numeric_limits<double>::infinity();
    Vector best_theta;
    int succeeded = 0;

    for (int k = 0; k < config.restarts; ++k) {
        Vector start(d + 1);
        if (k == 0) {
            // heuristic start: moderate length scale, small noise
            start.head(d).setConstant(0.5);
            start(d) = -6.0;
        } else {
            auto rng = CounterRng::from(config.seed, 0xF17u, static_cast<std::uint64_t>(k));
            for (Eigen::Index i = 0; i < d; ++i)
                start(i) = rng.uniform(config.omega_lo, config.omega_hi);
            start(d) = rng.uniform(config.log10_delta2_lo, config.log10_delta2_hi);
        }
        double val = 0.0;
        const Vector theta = nelder_mead(obj, start, budget, &val);
        if (val < 1e299) ++succeeded;
        if (val < best_neg) {
            best_neg = val;
            best_theta = theta;
        }
    }
    if (succeeded == 0)
        throw std::runtime_error("fit: all restarts failed to factorize the covariance");

    Hyperparameters hyper;
    hyper.omega = best_theta.head(d);
    hyper.delta2 = std::pow(10.0, best_theta(d));
    obj.neg_ll(best_theta, &hyper.sigma2);

    FitReport report;
    report.log_likelihood = -best_neg;
    report.restarts = config.restarts;
    report.total_evals = obj.evals;
    return TrainedGP(data, std_map, hyper, report);
}

} // namespace rrcdsp::gp
