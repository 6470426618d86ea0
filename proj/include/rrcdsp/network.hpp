#pragma once
// Acyclic chains of subsystem models (trained GPs, GP ensembles, or named
// analytic stages) with Monte-Carlo uncertainty propagation. A full
// propagation runs three coupled passes from one seed:
//   full        external inputs drawn, models drawn from their posteriors
//   mean-only   external inputs drawn, models evaluated at posterior means
//   fixed-input external inputs held at their means, models drawn
// std_pa comes from the mean-only pass, std_pr from the fixed-input pass,
// std_total from the full pass. The passes share external-input draws via
// counter-keyed substreams, so results are independent of worker count.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rrcdsp/gp.hpp"
#include "rrcdsp/rng.hpp"
#include "rrcdsp/stats.hpp"

namespace rrcdsp::net {

/// Deterministic scalar stage identified by a registry name, so networks
/// that use one can be rebuilt from persisted form.
struct AnalyticStage {
    std::string name;
    std::vector<double> params;
    int arity = 1;
    std::function<double(const std::vector<double>&, const std::vector<double>&)> fn;

    double operator()(const std::vector<double>& inputs) const { return fn(params, inputs); }
};

/// Look up a registered analytic stage; throws for unknown names.
AnalyticStage make_stage(const std::string& name, std::vector<double> params);

/// Uniform-choice ensemble of trained GPs over the same inputs. The
/// posterior mean is the equal-weight mean of the members; a posterior draw
/// picks one member uniformly and draws from it.
struct GpEnsemble {
    std::vector<std::shared_ptr<const gp::TrainedGP>> members;
};

struct Binding {
    enum class Kind { External, Node } kind;
    std::string ref; // external variable name or upstream node id
};

struct SubsystemNode {
    std::string id;
    std::variant<std::shared_ptr<const gp::TrainedGP>, GpEnsemble, AnalyticStage> model;
    std::vector<Binding> bindings; // one per model input, in input order

    int input_dim() const;
};

struct ExternalVariable {
    std::string name;
    std::string units;
};

struct SubsystemNetwork {
    std::vector<SubsystemNode> nodes; // topological order
    std::string output_node;
    std::vector<ExternalVariable> externals;

    void validate() const;
    std::size_t node_index(const std::string& id) const;
};

enum class DistributionFamily { Normal };

struct VariableUncertainty {
    DistributionFamily family = DistributionFamily::Normal;
    double sigma_pa = 0.0; // parametric spread, same units as the variable
};

/// Per-external-variable uncertainty description.
using UncertaintySpec = std::map<std::string, VariableUncertainty>;

enum class PropagationMode { Full, MeanOnly, FixedInput };

struct OutputDistribution {
    std::vector<double> samples; // from the requested mode's pass
    double mean = 0.0;
    double std_total = 0.0;
    std::optional<double> std_pr; // model-uncertainty component (Full mode)
    std::optional<double> std_pa; // parametric component (Full or MeanOnly)
    double skewness = 0.0;
    double ex_kurtosis = 0.0;
    bool shape_defined = false;
    std::size_t n = 0;
};

/// Monte-Carlo propagation of the design point through the network.
/// `design` must provide a mean value for every external variable.
OutputDistribution propagate(const SubsystemNetwork& net,
                             const std::map<std::string, double>& design,
                             const UncertaintySpec& unc, PropagationMode mode,
                             std::size_t n_samples, std::uint64_t seed);

/// Fraction of stored samples at or above the target (ties succeed).
double empirical_reliability(const OutputDistribution& dist, double y_target);

/// Write samples as "index,value" rows.
void write_samples_csv(const OutputDistribution& dist, const std::string& path);

/// Write a normalized histogram as "bin_center,density" rows.
void write_histogram_csv(const OutputDistribution& dist, std::size_t bins,
                         const std::string& path);

} // namespace rrcdsp::net
