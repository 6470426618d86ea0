#include "rrcdsp/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "rrcdsp/parallel.hpp"
#include "rrcdsp/stats.hpp"

namespace rrcdsp::experiment {

namespace {

constexpr std::uint64_t kTrainTag = 0x7214u;
constexpr std::uint64_t kHistTag = 0x4157u;

std::array<std::atomic<int>, 4> g_build_counts{};

std::size_t case_ordinal(CaseId id) { return static_cast<std::size_t>(id); }

struct Range {
    double lo, hi;

    Range padded(double frac, double floor_at) const {
        const double pad = (hi - lo) * frac;
        return {std::max(floor_at, lo - pad), hi + pad};
    }
};

Range output_range(const std::vector<double>& values) {
    Range r{values.front(), values.front()};
    for (double v : values) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

} // namespace

char case_letter(CaseId id) {
    switch (id) {
    case CaseId::A: return 'A';
    case CaseId::B: return 'B';
    case CaseId::C: return 'C';
    case CaseId::D: return 'D';
    }
    throw std::invalid_argument("case_letter: bad case id");
}

CaseId case_from_letter(char c) {
    switch (c) {
    case 'A': case 'a': return CaseId::A;
    case 'B': case 'b': return CaseId::B;
    case 'C': case 'c': return CaseId::C;
    case 'D': case 'd': return CaseId::D;
    }
    throw std::invalid_argument("case_from_letter: expected A, B, C or D");
}

CaseConfig CaseConfig::standard(CaseId id, std::uint64_t seed) {
    CaseConfig c;
    c.case_id = id;
    c.seed = seed;
    switch (id) {
    case CaseId::A: c.selector = rolling::ModelSelector::Middle; c.samples_per_dim = 50; break;
    case CaseId::B: c.selector = rolling::ModelSelector::Middle; c.samples_per_dim = 5; break;
    case CaseId::C: c.selector = rolling::ModelSelector::All; c.samples_per_dim = 50; break;
    case CaseId::D: c.selector = rolling::ModelSelector::All; c.samples_per_dim = 5; break;
    }
    return c;
}

std::uint64_t case_seed(std::uint64_t master, CaseId id) {
    const char letter = case_letter(id);
    return mix_key(master, fnv1a64("case"), fnv1a64(std::string_view(&letter, 1)));
}

std::uint64_t row_seed(std::uint64_t master, int row_index) {
    return mix_key(master, fnv1a64("row"), static_cast<std::uint64_t>(row_index));
}

namespace {

using rolling::ChainDefaults;
using rolling::ModelSelector;
using rolling::RollingState;

RollingState state_at(double t_f, const ChainDefaults& d) {
    return {d.strain, d.strain_rate, t_f, d.interpass_time_s, d.initial_grain_um};
}

// Stage wrappers over the analytic chain, single output each.
double stage_rex(double t_f, const ChainDefaults& d) {
    return rolling::post_recrystallization_size(state_at(t_f, d));
}

double stage_growth(double t_f, double rex_um, const ChainDefaults& d) {
    return rolling::grain_growth(rex_um, d.interpass_time_s, t_f);
}

double stage_ferrite(double austenite_um, const ChainDefaults& d) {
    return rolling::cooling_microstructure(austenite_um, d.comp, d.cooling_rate_f_per_s)
        .ferrite_grain_um;
}

double stage_yield(double ferrite_um, ModelSelector model, const ChainDefaults& d) {
    const auto base =
        rolling::cooling_microstructure(20.0, d.comp, d.cooling_rate_f_per_s);
    rolling::Microstructure micro{ferrite_um, base.ferrite_fraction, base.pearlite_spacing_um};
    return rolling::yield_strength(model, micro, d.comp);
}

int node_samples(const CaseConfig& config, const HarnessConfig& harness, int input_dim) {
    if (harness.literal_sparse_n && config.case_id == CaseId::D) return 5;
    return config.samples_per_dim * input_dim;
}

std::shared_ptr<const gp::TrainedGP> fit_node(const gp::Dataset& data, std::uint64_t seed) {
    gp::FitConfig cfg;
    cfg.seed = seed;
    return std::make_shared<const gp::TrainedGP>(gp::fit(data, cfg));
}

std::shared_ptr<const gp::TrainedGP>
train_1d(double lo, double hi, int n, std::uint64_t seed,
         const std::function<double(double)>& truth,
         const std::string& name, const std::string& unit) {
    const gp::Matrix x = rolling::stratified_samples({{lo, hi}}, n, seed);
    gp::Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = truth(x(i, 0));
    return fit_node(gp::Dataset(x, y, {name}, {unit}), mix_key(seed, 0xF1u));
}

std::shared_ptr<const gp::TrainedGP>
train_2d(Range r0, Range r1, int n, std::uint64_t seed,
         const std::function<double(double, double)>& truth,
         const std::vector<std::string>& names, const std::vector<std::string>& units) {
    const gp::Matrix x = rolling::stratified_samples({{r0.lo, r0.hi}, {r1.lo, r1.hi}}, n, seed);
    gp::Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = truth(x(i, 0), x(i, 1));
    return fit_node(gp::Dataset(x, y, names, units), mix_key(seed, 0xF1u));
}

} // namespace

net::SubsystemNetwork build_case(const CaseConfig& config, const HarnessConfig& harness) {
    g_build_counts[case_ordinal(config.case_id)].fetch_add(1);

    const ChainDefaults& d = rolling::chain_defaults();
    const double t_lo = harness.t_lo_f, t_hi = harness.t_hi_f;

    // Derive per-node input windows by scanning the analytic chain over the
    // temperature window, then pad so posterior draws stay in-window.
    const int probe = 256;
    std::vector<double> rex_vals(probe), austenite_vals(probe), ferrite_vals(probe);
    for (int i = 0; i < probe; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / (probe - 1);
        rex_vals[i] = stage_rex(t, d);
        austenite_vals[i] = stage_growth(t, rex_vals[i], d);
        ferrite_vals[i] = stage_ferrite(austenite_vals[i], d);
    }
    const Range rex_range = output_range(rex_vals).padded(0.25, 0.05);
    // growth is monotone in both inputs, so the box corners bound its output
    const Range austenite_range =
        Range{stage_growth(t_lo, rex_range.lo, d), stage_growth(t_hi, rex_range.hi, d)}
            .padded(0.25, 0.05);
    const Range ferrite_range =
        Range{stage_ferrite(austenite_range.lo, d), stage_ferrite(austenite_range.hi, d)}
            .padded(0.25, 0.5);

    const std::uint64_t base = mix_key(config.seed, kTrainTag);

    net::SubsystemNetwork network;
    network.externals = {{"temperature", "F"}};
    network.output_node = "yield";

    net::SubsystemNode rex;
    rex.id = "rex";
    rex.model = train_1d(t_lo, t_hi, node_samples(config, harness, 1), mix_key(base, 0u),
                         [&](double t) { return stage_rex(t, d); }, "temperature", "F");
    rex.bindings = {{net::Binding::Kind::External, "temperature"}};

    net::SubsystemNode growth;
    growth.id = "growth";
    growth.model = train_2d({t_lo, t_hi}, rex_range, node_samples(config, harness, 2),
                            mix_key(base, 1u),
                            [&](double t, double rex_um) { return stage_growth(t, rex_um, d); },
                            {"temperature", "rex_size"}, {"F", "um"});
    growth.bindings = {{net::Binding::Kind::External, "temperature"},
                       {net::Binding::Kind::Node, "rex"}};

    net::SubsystemNode ferrite;
    ferrite.id = "ferrite";
    ferrite.model = train_1d(austenite_range.lo, austenite_range.hi,
                             node_samples(config, harness, 1), mix_key(base, 2u),
                             [&](double dg) { return stage_ferrite(dg, d); },
                             "austenite_size", "um");
    ferrite.bindings = {{net::Binding::Kind::Node, "growth"}};

    net::SubsystemNode yield_node;
    yield_node.id = "yield";
    yield_node.bindings = {{net::Binding::Kind::Node, "ferrite"}};
    const int yield_n = node_samples(config, harness, 1);

    if (config.selector != ModelSelector::All) {
        yield_node.model = train_1d(
            ferrite_range.lo, ferrite_range.hi, yield_n, mix_key(base, 3u),
            [&](double f) { return stage_yield(f, config.selector, d); }, "ferrite_size", "um");
    } else if (harness.mixing == ModelMixing::Ensemble) {
        // One candidate GP per yield model; disagreement between them is the
        // model uncertainty.
        net::GpEnsemble ensemble;
        const std::array<ModelSelector, 3> members = {ModelSelector::Middle,
                                                      ModelSelector::Upper,
                                                      ModelSelector::Lower};
        for (std::size_t m = 0; m < members.size(); ++m) {
            ensemble.members.push_back(train_1d(
                ferrite_range.lo, ferrite_range.hi, yield_n,
                mix_key(base, 3u, static_cast<std::uint64_t>(m)),
                [&, m](double f) { return stage_yield(f, members[m], d); }, "ferrite_size",
                "um"));
        }
        yield_node.model = std::move(ensemble);
    } else {
        // Pooled: one GP on rows assigned to candidate models uniformly.
        const std::uint64_t seed = mix_key(base, 3u);
        const gp::Matrix x =
            rolling::stratified_samples({{ferrite_range.lo, ferrite_range.hi}}, yield_n, seed);
        auto rng = CounterRng::from(seed, 0x3D0Du);
        gp::Vector y(yield_n);
        for (int i = 0; i < yield_n; ++i) {
            const std::array<ModelSelector, 3> members = {ModelSelector::Middle,
                                                          ModelSelector::Upper,
                                                          ModelSelector::Lower};
            y(i) = stage_yield(x(i, 0), members[rng.below(3)], d);
        }
        yield_node.model =
            fit_node(gp::Dataset(x, y, {"ferrite_size"}, {"um"}), mix_key(seed, 0xF1u));
    }

    network.nodes = {std::move(rex), std::move(growth), std::move(ferrite),
                     std::move(yield_node)};
    network.validate();
    return network;
}

int build_count(CaseId id) { return g_build_counts[case_ordinal(id)].load(); }

void reset_build_counts() {
    for (auto& c : g_build_counts) c.store(0);
}

ExperimentRecord run_experiment_on(const net::SubsystemNetwork& network,
                                   const ExperimentSpec& spec, const HarnessConfig& harness) {
    decision::CdspProblem problem;
    problem.network = network;
    problem.uncertainty = {{"temperature", {net::DistributionFamily::Normal,
                                            harness.sigma_pa_f}}};
    problem.design_variable = "temperature";
    problem.lo = harness.t_lo_f;
    problem.hi = harness.t_hi_f;
    problem.grid_points = harness.grid_points;
    problem.y_target = spec.lrl_mpa;
    problem.alpha_target = spec.alpha_target;
    problem.emi_target = 0.0; // derive from alpha
    problem.mc_samples = harness.mc_samples;
    problem.seed = spec.seed;
    problem.combiner = harness.combiner;
    problem.reconcile_targets();

    auto shared_sweep = decision::sweep(problem);
    const auto robust =
        decision::solve_from_sweep(problem, shared_sweep, decision::ConstraintMode::Robust);
    const auto reliable = decision::solve_from_sweep(problem, std::move(shared_sweep),
                                                     decision::ConstraintMode::Reliability);

    ExperimentRecord record;
    record.spec = spec;
    record.spec.emi_target = problem.emi_target;
    if (robust.feasible)
        record.robust = ModeResult{*robust.d_minus, *robust.d_plus, *robust.alpha_achieved,
                                   *robust.optimal_design};
    if (reliable.feasible)
        record.reliability = ModeResult{*reliable.d_minus, *reliable.d_plus,
                                        *reliable.alpha_achieved, *reliable.optimal_design};
    return record;
}

ExperimentRecord run_experiment(const ExperimentSpec& spec, const HarnessConfig& harness) {
    const auto network = build_case(spec.case_config, harness);
    return run_experiment_on(network, spec, harness);
}

std::vector<ExperimentSpec> default_matrix(std::uint64_t master_seed) {
    struct Block {
        CaseId id;
        std::array<double, 3> lrls;
        std::array<double, 3> alphas;
    };
    const std::array<Block, 4> blocks = {{
        {CaseId::A, {200.0, 270.0, 280.0}, {0.99, 0.95, 0.90}},
        {CaseId::B, {200.0, 270.0, 280.0}, {0.99, 0.95, 0.90}},
        {CaseId::C, {150.0, 180.0, 200.0}, {0.99, 0.90, 0.85}},
        {CaseId::D, {150.0, 180.0, 200.0}, {0.99, 0.90, 0.85}},
    }};

    std::vector<ExperimentSpec> specs;
    int row = 1;
    for (const auto& block : blocks) {
        for (double alpha : block.alphas) {
            for (double lrl : block.lrls) {
                ExperimentSpec spec;
                spec.case_config =
                    CaseConfig::standard(block.id, case_seed(master_seed, block.id));
                spec.lrl_mpa = lrl;
                spec.alpha_target = alpha;
                spec.emi_target = decision::emi_target_from_alpha(alpha);
                spec.seed = row_seed(master_seed, row);
                specs.push_back(spec);
                ++row;
            }
        }
    }
    return specs;
}

MatrixRun run_matrix(const std::vector<ExperimentSpec>& specs, const HarnessConfig& harness) {
    if (specs.empty()) throw std::invalid_argument("run_matrix: no specs");

    // Build each distinct case network once, serially.
    std::map<std::uint64_t, net::SubsystemNetwork> cache;
    auto key_of = [](const CaseConfig& c) {
        return mix_key(c.seed, static_cast<std::uint64_t>(c.case_id),
                       static_cast<std::uint64_t>(c.samples_per_dim),
                       static_cast<std::uint64_t>(c.selector));
    };
    for (const auto& spec : specs) {
        const auto key = key_of(spec.case_config);
        if (!cache.count(key)) cache.emplace(key, build_case(spec.case_config, harness));
    }

    MatrixRun run;
    run.records.resize(specs.size());
    std::vector<std::string> errors(specs.size());
    parallel_for(specs.size(), [&](std::size_t i) {
        const auto& spec = specs[i];
        try {
            run.records[i] = run_experiment_on(cache.at(key_of(spec.case_config)), spec, harness);
        } catch (const std::exception& err) {
            run.records[i].spec = spec;
            errors[i] = "row " + std::to_string(i + 1) + ": " + err.what();
        }
        run.records[i].exp_id = static_cast<int>(i + 1);
    });
    for (auto& e : errors)
        if (!e.empty()) run.errors.push_back(std::move(e));
    return run;
}

net::OutputDistribution case_distribution(const net::SubsystemNetwork& network,
                                          const HarnessConfig& harness,
                                          double temperature_f, std::size_t n_samples,
                                          std::uint64_t seed) {
    const net::UncertaintySpec unc = {
        {"temperature", {net::DistributionFamily::Normal, harness.sigma_pa_f}}};
    return net::propagate(network, {{"temperature", temperature_f}}, unc,
                          net::PropagationMode::Full, n_samples, mix_key(seed, kHistTag));
}

} // namespace rrcdsp::experiment
