#pragma once
// Study harness: builds the four training cases of the rolling chain as GP
// networks, runs the 36-row experiment matrix in both constraint modes, and
// emits the 1450 F yield-strength histograms.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrcdsp/decision.hpp"
#include "rrcdsp/network.hpp"
#include "rrcdsp/rolling.hpp"

namespace rrcdsp::experiment {

enum class CaseId { A, B, C, D };

char case_letter(CaseId id);
CaseId case_from_letter(char c);

/// How model disagreement enters the yield node when all three candidate
/// models are in play. Ensemble keeps one trained GP per candidate and picks
/// uniformly per draw; Pooled trains a single GP on rows whose outputs are
/// assigned to candidates uniformly at random.
enum class ModelMixing { Ensemble, Pooled };

struct CaseConfig {
    CaseId case_id = CaseId::A;
    rolling::ModelSelector selector = rolling::ModelSelector::Middle;
    int samples_per_dim = 50;
    std::uint64_t seed = 0;

    /// The fixed case table: (A: Middle, 50), (B: Middle, 5),
    /// (C: All, 50), (D: All, 5).
    static CaseConfig standard(CaseId id, std::uint64_t seed);
};

struct HarnessConfig {
    double t_lo_f = 1000.0;
    double t_hi_f = 2000.0;
    int grid_points = 101;
    std::size_t mc_samples = 10000;
    double sigma_pa_f = 5.0;
    std::uint64_t master_seed = 0;
    ModelMixing mixing = ModelMixing::Ensemble;
    bool literal_sparse_n = false; // Case D trains on n = 5 rows per node
    decision::SpreadCombiner combiner = decision::SpreadCombiner::Additive;
};

struct ExperimentSpec {
    CaseConfig case_config;
    double lrl_mpa = 0.0;
    double alpha_target = 0.0;
    double emi_target = 0.0; // quantile of alpha_target
    std::uint64_t seed = 0;
};

struct ModeResult {
    double d_minus = 0.0;
    double d_plus = 0.0;
    double alpha_achieved = 0.0;
    double t_opt_f = 0.0;
};

struct ExperimentRecord {
    int exp_id = 0;
    ExperimentSpec spec;
    std::optional<ModeResult> robust;      // empty = NA
    std::optional<ModeResult> reliability; // empty = NA
};

/// Seed fan-out from the master seed (splitmix64 mixing; see rng.hpp):
/// case seeds hash the case letter, row seeds hash the row index.
std::uint64_t case_seed(std::uint64_t master, CaseId id);
std::uint64_t row_seed(std::uint64_t master, int row_index);

/// Train one GP per stage of the rolling chain (temperature -> recrystallized
/// size -> final austenite -> ferrite grain -> yield strength) and wire them
/// into a network with temperature as the single uncertain external.
net::SubsystemNetwork build_case(const CaseConfig& config, const HarnessConfig& harness);

/// Number of build_case calls per case since the last reset (test hook for
/// the caching contract).
int build_count(CaseId id);
void reset_build_counts();

/// Run one experiment row on a prebuilt network: a shared sweep, then both
/// mode reductions.
ExperimentRecord run_experiment_on(const net::SubsystemNetwork& network,
                                   const ExperimentSpec& spec, const HarnessConfig& harness);

/// Convenience: build (or reuse) the case network, then run the row.
ExperimentRecord run_experiment(const ExperimentSpec& spec, const HarnessConfig& harness);

/// The 36 (case, LRL, alpha) tuples of the study, in report order.
std::vector<ExperimentSpec> default_matrix(std::uint64_t master_seed);

/// Run every spec; case networks are built once and shared. Records keep the
/// input order. Failed rows keep their slot with both modes NA and the error
/// recorded.
struct MatrixRun {
    std::vector<ExperimentRecord> records;
    std::vector<std::string> errors; // "row N: message", empty when clean
};
MatrixRun run_matrix(const std::vector<ExperimentSpec>& specs, const HarnessConfig& harness);

/// Propagate each case at the probe temperature and return the output
/// distribution (N samples); used for the histogram emission.
net::OutputDistribution case_distribution(const net::SubsystemNetwork& network,
                                          const HarnessConfig& harness,
                                          double temperature_f, std::size_t n_samples,
                                          std::uint64_t seed);

} // namespace rrcdsp::experiment
