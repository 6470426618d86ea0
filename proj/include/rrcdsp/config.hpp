#pragma once
// Run configuration: a sectioned key-value text file. Unknown sections or
// keys are hard errors; every diagnostic carries file and line. emit() and
// parse() round-trip exactly.

#include <cstdint>
#include <string>

#include "rrcdsp/decision.hpp"
#include "rrcdsp/experiment.hpp"

namespace rrcdsp::io {

struct RunConfig {
    // [gp]
    int restarts = 10;

    // [uncertainty]
    double sigma_pa = 5.0; // deg F spread on temperature
    std::string family = "normal";

    // [cdsp]
    double t_min = 1000.0;
    double t_max = 2000.0;
    int grid_points = 101;
    std::size_t mc_samples = 10000;
    double lrl = 270.0;
    double alpha_target = 0.99; // emi_target derived unless given explicitly
    double emi_target = 0.0;    // 0 = derive from alpha_target
    std::string emi_denominator = "additive"; // or "rss"

    // [experiment]
    std::uint64_t master_seed = 20250810;
    std::string case_id = "A";
    std::string model_mixing = "ensemble"; // or "pooled"
    bool literal_sparse_n = false;
    std::size_t histogram_samples = 100000;
    int histogram_bins = 60;

    // [output]
    std::string output_dir = "out";

    bool operator==(const RunConfig&) const = default;

    experiment::HarnessConfig harness() const;
    decision::SpreadCombiner combiner() const;
};

/// Parse and fully validate a config file; throws std::runtime_error with
/// "<path>:<line>: <message>" diagnostics.
RunConfig parse_config(const std::string& path);

/// Render a config (with comments) that parses back to the same values.
std::string emit_config(const RunConfig& config);

} // namespace rrcdsp::io
