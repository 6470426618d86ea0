#include "rrcdsp/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "rrcdsp/parallel.hpp"

namespace rrcdsp::net {

namespace {

// Stream tags for counter-keyed rng substreams.
constexpr std::uint64_t kExternalTag = 0xE7u;
constexpr std::uint64_t kNodeTag = 0x40DEu;

} // namespace

AnalyticStage make_stage(const std::string& name, std::vector<double> params) {
    AnalyticStage stage;
    stage.name = name;
    stage.params = std::move(params);

    auto need = [&](std::size_t n) {
        if (stage.params.size() != n)
            throw std::invalid_argument("make_stage: " + name + " expects " +
                                        std::to_string(n) + " parameters");
    };

    if (name == "identity") {
        need(0);
        stage.arity = 1;
        stage.fn = [](const std::vector<double>&, const std::vector<double>& in) { return in[0]; };
    } else if (name == "affine") {
        // a * u + b
        need(2);
        stage.arity = 1;
        stage.fn = [](const std::vector<double>& p, const std::vector<double>& in) {
            return p[0] * in[0] + p[1];
        };
    } else if (name == "exp_affine") {
        // s * exp(k * (u - u0))
        need(3);
        stage.arity = 1;
        stage.fn = [](const std::vector<double>& p, const std::vector<double>& in) {
            return p[0] * std::exp(p[1] * (in[0] - p[2]));
        };
    } else if (name == "gauss_minus_exp") {
        // a + c * (u1 - u0) - s * exp(k * u2): a weak design trend minus a
        // lognormal tail carried by the second input.
        need(5);
        stage.arity = 2;
        stage.fn = [](const std::vector<double>& p, const std::vector<double>& in) {
            return p[0] + p[1] * (in[0] - p[2]) - p[3] * std::exp(p[4] * in[1]);
        };
    } else {
        throw std::invalid_argument("make_stage: unknown stage '" + name + "'");
    }
    return stage;
}

int SubsystemNode::input_dim() const {
    if (std::holds_alternative<std::shared_ptr<const gp::TrainedGP>>(model))
        return static_cast<int>(std::get<std::shared_ptr<const gp::TrainedGP>>(model)->dim());
    if (std::holds_alternative<GpEnsemble>(model)) {
        const auto& ens = std::get<GpEnsemble>(model);
        if (ens.members.empty()) throw std::invalid_argument("GpEnsemble: no members");
        return static_cast<int>(ens.members.front()->dim());
    }
    return std::get<AnalyticStage>(model).arity;
}

void SubsystemNetwork::validate() const {
    if (nodes.empty()) throw std::invalid_argument("SubsystemNetwork: no nodes");

    std::set<std::string> external_names;
    for (const auto& e : externals)
        if (!external_names.insert(e.name).second)
            throw std::invalid_argument("SubsystemNetwork: duplicate external '" + e.name + "'");

    std::set<std::string> seen;
    std::set<std::string> consumed;
    for (const auto& node : nodes) {
        if (!seen.insert(node.id).second)
            throw std::invalid_argument("SubsystemNetwork: duplicate node id '" + node.id + "'");
        if (static_cast<int>(node.bindings.size()) != node.input_dim())
            throw std::invalid_argument("SubsystemNetwork: node '" + node.id +
                                        "' binding arity mismatch");
        for (const auto& b : node.bindings) {
            if (b.kind == Binding::Kind::External) {
                if (!external_names.count(b.ref))
                    throw std::invalid_argument("SubsystemNetwork: node '" + node.id +
                                                "' binds unknown external '" + b.ref + "'");
                consumed.insert(b.ref);
            } else if (!seen.count(b.ref) || b.ref == node.id) {
                // topological order makes forward or self references cycles
                throw std::invalid_argument("SubsystemNetwork: node '" + node.id +
                                            "' binds '" + b.ref + "' out of order");
            }
        }
    }
    if (!seen.count(output_node))
        throw std::invalid_argument("SubsystemNetwork: output node '" + output_node + "' missing");
    for (const auto& e : externals)
        if (!consumed.count(e.name))
            throw std::invalid_argument("SubsystemNetwork: external '" + e.name + "' never consumed");

    for (const auto& node : nodes)
        if (std::holds_alternative<GpEnsemble>(node.model)) {
            const auto& ens = std::get<GpEnsemble>(node.model);
            for (const auto& m : ens.members)
                if (m->dim() != ens.members.front()->dim())
                    throw std::invalid_argument("SubsystemNetwork: ensemble member dims differ");
        }
}

std::size_t SubsystemNetwork::node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    throw std::invalid_argument("SubsystemNetwork: unknown node '" + id + "'");
}

namespace {

struct PassSettings {
    bool draw_externals; // otherwise hold at design means
    bool draw_models;    // otherwise evaluate posterior means
};

double eval_model(const SubsystemNode& node, const std::vector<double>& inputs,
                  bool draw, CounterRng& rng) {
    if (std::holds_alternative<AnalyticStage>(node.model))
        return std::get<AnalyticStage>(node.model)(inputs);

    gp::Vector x = Eigen::Map<const gp::Vector>(inputs.data(),
                                                static_cast<Eigen::Index>(inputs.size()));
    if (std::holds_alternative<std::shared_ptr<const gp::TrainedGP>>(node.model)) {
        const auto& model = *std::get<std::shared_ptr<const gp::TrainedGP>>(node.model);
        return draw ? model.sample_posterior(x, rng) : model.predict(x).mean;
    }

    const auto& ens = std::get<GpEnsemble>(node.model);
    if (draw) {
        const auto pick = ens.members[rng.below(ens.members.size())];
        return pick->sample_posterior(x, rng);
    }
    double mean = 0.0;
    for (const auto& m : ens.members) mean += m->predict(x).mean;
    return mean / static_cast<double>(ens.members.size());
}

// Bindings resolved to integer slots so the per-sample loop does no string
// lookups. External draws are keyed by (seed, tag, sample, variable index)
// and node draws by (seed, tag, sample, node index), so the three passes of
// a full propagation reuse the same randomness wherever they share a source
// of uncertainty.
struct CompiledPlan {
    struct Input {
        bool external;
        std::size_t index;
    };
    std::vector<std::vector<Input>> node_inputs;
    std::vector<double> external_means;
    std::vector<double> external_sigmas;
    std::size_t output_index = 0;

    CompiledPlan(const SubsystemNetwork& net, const std::map<std::string, double>& design,
                 const UncertaintySpec& unc) {
        std::map<std::string, std::size_t> ext_slot;
        for (std::size_t i = 0; i < net.externals.size(); ++i) {
            const auto& e = net.externals[i];
            ext_slot[e.name] = i;
            external_means.push_back(design.at(e.name));
            const auto it = unc.find(e.name);
            external_sigmas.push_back(it == unc.end() ? 0.0 : it->second.sigma_pa);
        }
        node_inputs.resize(net.nodes.size());
        for (std::size_t i = 0; i < net.nodes.size(); ++i) {
            for (const auto& b : net.nodes[i].bindings) {
                if (b.kind == Binding::Kind::External)
                    node_inputs[i].push_back({true, ext_slot.at(b.ref)});
                else
                    node_inputs[i].push_back({false, net.node_index(b.ref)});
            }
        }
        output_index = net.node_index(net.output_node);
    }
};

double run_sample(const SubsystemNetwork& net, const CompiledPlan& plan,
                  const PassSettings& pass, std::uint64_t seed, std::uint64_t sample) {
    std::vector<double> externals(plan.external_means.size());
    for (std::size_t v = 0; v < externals.size(); ++v) {
        externals[v] = plan.external_means[v];
        if (pass.draw_externals && plan.external_sigmas[v] > 0.0) {
            auto rng = CounterRng::from(seed, kExternalTag, sample, static_cast<std::uint64_t>(v));
            externals[v] += plan.external_sigmas[v] * rng.normal();
        }
    }

    std::vector<double> node_values(net.nodes.size());
    std::vector<double> inputs;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        inputs.clear();
        for (const auto& in : plan.node_inputs[i])
            inputs.push_back(in.external ? externals[in.index] : node_values[in.index]);
        auto rng = CounterRng::from(seed, kNodeTag, sample, static_cast<std::uint64_t>(i));
        try {
            node_values[i] = eval_model(net.nodes[i], inputs, pass.draw_models, rng);
        } catch (const std::exception& err) {
            throw std::runtime_error("propagate: node '" + net.nodes[i].id + "' failed: " +
                                     err.what());
        }
    }
    return node_values[plan.output_index];
}

std::vector<double> run_pass(const SubsystemNetwork& net, const CompiledPlan& plan,
                             const PassSettings& pass, std::size_t n, std::uint64_t seed) {
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        out[i] = run_sample(net, plan, pass, seed, static_cast<std::uint64_t>(i));
    }, 256);
    return out;
}

double sample_std(const std::vector<double>& v) {
    return summarize(v).std_dev;
}

} // namespace

OutputDistribution propagate(const SubsystemNetwork& net,
                             const std::map<std::string, double>& design,
                             const UncertaintySpec& unc, PropagationMode mode,
                             std::size_t n_samples, std::uint64_t seed) {
    net.validate();
    if (n_samples < 100) throw std::invalid_argument("propagate: need at least 100 samples");
    for (const auto& e : net.externals)
        if (!design.count(e.name))
            throw std::invalid_argument("propagate: unbound external variable '" + e.name + "'");
    for (const auto& [name, spec] : unc) {
        if (spec.family != DistributionFamily::Normal)
            throw std::invalid_argument("propagate: unsupported distribution family for '" + name + "'");
        if (!(spec.sigma_pa >= 0.0) || !std::isfinite(spec.sigma_pa))
            throw std::invalid_argument("propagate: bad sigma_pa for '" + name + "'");
    }

    constexpr PassSettings kFull{true, true};
    constexpr PassSettings kMeanOnly{true, false};
    constexpr PassSettings kFixedInput{false, true};

    const CompiledPlan plan(net, design, unc);

    OutputDistribution out;
    switch (mode) {
    case PropagationMode::Full: {
        out.samples = run_pass(net, plan, kFull, n_samples, seed);
        const auto mean_only = run_pass(net, plan, kMeanOnly, n_samples, seed);
        const auto fixed_input = run_pass(net, plan, kFixedInput, n_samples, seed);
        out.std_pa = sample_std(mean_only);
        out.std_pr = sample_std(fixed_input);
        break;
    }
    case PropagationMode::MeanOnly:
        out.samples = run_pass(net, plan, kMeanOnly, n_samples, seed);
        out.std_pa = sample_std(out.samples);
        break;
    case PropagationMode::FixedInput:
        out.samples = run_pass(net, plan, kFixedInput, n_samples, seed);
        out.std_pr = sample_std(out.samples);
        break;
    }

    const Moments m = summarize(out.samples);
    out.mean = m.mean;
    out.std_total = m.std_dev;
    out.skewness = m.skewness;
    out.ex_kurtosis = m.ex_kurtosis;
    out.shape_defined = m.shape_defined;
    out.n = n_samples;
    return out;
}

double empirical_reliability(const OutputDistribution& dist, double y_target) {
    if (dist.samples.size() < 100)
        throw std::invalid_argument("empirical_reliability: need at least 100 samples");
    return fraction_at_or_above(dist.samples, y_target);
}

void write_samples_csv(const OutputDistribution& dist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_samples_csv: cannot open " + path);
    out << "index,value\n";
    char buf[64];
    for (std::size_t i = 0; i < dist.samples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", i, dist.samples[i]);
        out << buf;
    }
}

void write_histogram_csv(const OutputDistribution& dist, std::size_t bins,
                         const std::string& path) {
    const auto hist = histogram(dist.samples, bins);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_histogram_csv: cannot open " + path);
    out << "bin_center,density\n";
    char buf[64];
    for (const auto& b : hist) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", b.center, b.density);
        out << buf;
    }
}

} // namespace rrcdsp::net
