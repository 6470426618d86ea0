#pragma once
// Analytic ground-truth models for the hot-rod-rolling chain:
// deformation-stage recrystallization -> grain growth -> transformation
// microstructure on the cooling bed -> yield strength. Three published
// yield-strength correlations are kept behind a selector so the surrogate
// layer can study disagreement between them.
//
// Public interfaces take temperature in degrees Fahrenheit and cooling rate
// in degrees Fahrenheit per second; conversions to the Kelvin-based source
// correlations happen internally. Constant provenance lives in
// constants_table() and docs/model-constants.md.

#include <cstdint>
#include <string>
#include <vector>

#include "rrcdsp/gp.hpp"
#include "rrcdsp/rng.hpp"

namespace rrcdsp::rolling {

struct RollingState {
    double strain;             // dimensionless, > 0
    double strain_rate;        // 1/s, > 0
    double temperature_f;      // deg F
    double interpass_time_s;   // s, > 0
    double initial_grain_um;   // prior austenite grain size, um

    void validate() const;
};

struct Composition {
    double carbon_wt = 0.10;    // wt%
    double manganese_wt = 0.65; // wt%

    void validate() const;
};

struct Microstructure {
    double ferrite_grain_um;   // > 0
    double ferrite_fraction;   // in [0, 1]
    double pearlite_spacing_um; // > 0
};

enum class ModelSelector { Middle, Upper, Lower, All };

struct GrainResult {
    double grain_size_um;
    double fraction; // recrystallized fraction in [0, 1]
};

/// Declared validity window for the yield-strength level ordering
/// upper >= middle >= lower. Verified by scan; see docs/model-constants.md.
struct ValidityWindow {
    double carbon_lo = 0.05, carbon_hi = 0.15;          // wt%
    double manganese_lo = 0.50, manganese_hi = 0.80;    // wt%
    double ferrite_grain_lo = 3.0, ferrite_grain_hi = 20.0;   // um
    double ferrite_fraction_lo = 0.80, ferrite_fraction_hi = 0.96;
    double pearlite_spacing_lo = 0.22, pearlite_spacing_hi = 0.50; // um
    double temperature_lo = 1000.0, temperature_hi = 2000.0;   // deg F
};

const ValidityWindow& validity_window();

/// Dynamic recrystallization during the deformation pass.
GrainResult drx_grain(const RollingState& state);

/// Metadynamic recrystallization after the pass; depends only on strain
/// rate, temperature, and interpass time.
GrainResult mdrx_grain(const RollingState& state);

/// Rule-of-mixtures austenite grain size once both recrystallization stages
/// have acted (unrecrystallized material keeps the initial grain size).
double post_recrystallization_size(const RollingState& state);

/// Isothermal austenite grain growth; returns the input size at time 0 and
/// is non-decreasing in time.
double grain_growth(double post_mdrx_um, double time_s, double temperature_f);

/// Transformation products after cooling: ferrite grain size, ferrite
/// fraction, pearlite interlamellar spacing.
Microstructure cooling_microstructure(double final_austenite_um, const Composition& comp,
                                      double cooling_rate_f_per_s);

/// Yield strength in MPa from one of the three sourced correlations.
/// ModelSelector::All is not a single model and is rejected here.
double yield_strength(ModelSelector model, const Microstructure& micro, const Composition& comp);

/// Full chain: recrystallization -> growth -> cooling -> yield strength.
/// Exactly equal to composing the stage functions; growth time is the
/// interpass time (transport delay to the cooling bed).
double full_chain(const RollingState& state, const Composition& comp,
                  double cooling_rate_f_per_s, ModelSelector model);

struct ChainDefaults {
    double strain = 1.3;
    double strain_rate = 2.0;        // 1/s
    double interpass_time_s = 0.3;
    double initial_grain_um = 150.0;
    Composition comp{};
    double cooling_rate_f_per_s = 15.0;
};

const ChainDefaults& chain_defaults();

/// Training data for the surrogate layer: n stratified-uniform temperature
/// samples over [t_lo, t_hi] with the remaining inputs at chain defaults.
/// selector == All assigns each row's output to one of the three yield
/// models chosen uniformly from the seeded rng.
gp::Dataset generate_training_data(double t_lo_f, double t_hi_f, ModelSelector selector,
                                   int n, std::uint64_t seed);

/// Stratified (Latin-hypercube style) samples: one point per equal stratum
/// per dimension, strata randomly paired across dimensions.
gp::Matrix stratified_samples(const std::vector<std::pair<double, double>>& bounds,
                              int n, std::uint64_t seed);

struct ConstantRecord {
    std::string name;
    double value;
    std::string units;
    std::string source;
};

/// Machine-readable provenance for every model constant.
const std::vector<ConstantRecord>& constants_table();

} // namespace rrcdsp::rolling
