#include "rrcdsp/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rrcdsp::io {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& message) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& path, int line, const std::string& key,
                    const std::string& value) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(value.c_str(), &end);
    if (errno != 0 || end == value.c_str() || *end != '\0' || !std::isfinite(v))
        fail(path, line, "key '" + key + "': expected a finite number, got '" + value + "'");
    return v;
}

long long parse_int(const std::string& path, int line, const std::string& key,
                    const std::string& value) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        fail(path, line, "key '" + key + "': expected an integer, got '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& path, int line, const std::string& key,
                        const std::string& value) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        fail(path, line, "key '" + key + "': expected an unsigned integer, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& path, int line, const std::string& key,
                const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(path, line, "key '" + key + "': expected true or false, got '" + value + "'");
}

} // namespace

experiment::HarnessConfig RunConfig::harness() const {
    experiment::HarnessConfig h;
    h.t_lo_f = t_min;
    h.t_hi_f = t_max;
    h.grid_points = grid_points;
    h.mc_samples = mc_samples;
    h.sigma_pa_f = sigma_pa;
    h.master_seed = master_seed;
    h.mixing = model_mixing == "pooled" ? experiment::ModelMixing::Pooled
                                        : experiment::ModelMixing::Ensemble;
    h.literal_sparse_n = literal_sparse_n;
    h.combiner = combiner();
    return h;
}

decision::SpreadCombiner RunConfig::combiner() const {
    return emi_denominator == "rss" ? decision::SpreadCombiner::RootSumSquare
                                    : decision::SpreadCombiner::Additive;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_config: cannot open " + path);

    RunConfig cfg;
    bool emi_given = false, alpha_given = false;
    std::string section;
    std::string raw;
    int line = 0;

    while (std::getline(in, raw)) {
        ++line;
        std::string text = raw;
        if (const auto hash = text.find('#'); hash != std::string::npos)
            text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;

        if (text.front() == '[') {
            if (text.back() != ']') fail(path, line, "unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            if (section != "gp" && section != "uncertainty" && section != "cdsp" &&
                section != "experiment" && section != "output")
                fail(path, line, "unknown section '" + section + "'");
            continue;
        }

        const auto eq = text.find('=');
        if (eq == std::string::npos) fail(path, line, "expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) fail(path, line, "empty key");
        if (section.empty()) fail(path, line, "key '" + key + "' outside any section");

        if (section == "gp") {
            if (key == "restarts") cfg.restarts = static_cast<int>(parse_int(path, line, key, value));
            else fail(path, line, "unknown key '" + key + "' in [gp]");
        } else if (section == "uncertainty") {
            if (key == "sigma_pa") cfg.sigma_pa = parse_double(path, line, key, value);
            else if (key == "family") cfg.family = value;
            else fail(path, line, "unknown key '" + key + "' in [uncertainty]");
        } else if (section == "cdsp") {
            if (key == "t_min") cfg.t_min = parse_double(path, line, key, value);
            else if (key == "t_max") cfg.t_max = parse_double(path, line, key, value);
            else if (key == "grid_points") cfg.grid_points = static_cast<int>(parse_int(path, line, key, value));
            else if (key == "mc_samples") cfg.mc_samples = static_cast<std::size_t>(parse_int(path, line, key, value));
            else if (key == "lrl") cfg.lrl = parse_double(path, line, key, value);
            else if (key == "alpha_target") { cfg.alpha_target = parse_double(path, line, key, value); alpha_given = true; }
            else if (key == "emi_target") { cfg.emi_target = parse_double(path, line, key, value); emi_given = true; }
            else if (key == "emi_denominator") cfg.emi_denominator = value;
            else fail(path, line, "unknown key '" + key + "' in [cdsp]");
        } else if (section == "experiment") {
            if (key == "master_seed") cfg.master_seed = parse_u64(path, line, key, value);
            else if (key == "case") cfg.case_id = value;
            else if (key == "model_mixing") cfg.model_mixing = value;
            else if (key == "literal_sparse_n") cfg.literal_sparse_n = parse_bool(path, line, key, value);
            else if (key == "histogram_samples") cfg.histogram_samples = static_cast<std::size_t>(parse_int(path, line, key, value));
            else if (key == "histogram_bins") cfg.histogram_bins = static_cast<int>(parse_int(path, line, key, value));
            else fail(path, line, "unknown key '" + key + "' in [experiment]");
        } else { // output
            if (key == "dir") cfg.output_dir = value;
            else fail(path, line, "unknown key '" + key + "' in [output]");
        }

        // Range checks, reported at the offending line.
        if (key == "restarts" && cfg.restarts < 1) fail(path, line, "key 'restarts': must be >= 1");
        if (key == "sigma_pa" && !(cfg.sigma_pa >= 0.0)) fail(path, line, "key 'sigma_pa': must be >= 0");
        if (key == "family" && cfg.family != "normal")
            fail(path, line, "key 'family': only 'normal' is implemented");
        if (key == "grid_points" && cfg.grid_points < 2) fail(path, line, "key 'grid_points': must be >= 2");
        if (key == "mc_samples" && cfg.mc_samples < 100) fail(path, line, "key 'mc_samples': must be >= 100");
        if (key == "alpha_target" && !(cfg.alpha_target > 0.0 && cfg.alpha_target < 1.0))
            fail(path, line, "key 'alpha_target': must lie in (0, 1)");
        if (key == "emi_target" && !(cfg.emi_target > 0.0))
            fail(path, line, "key 'emi_target': must be > 0");
        if (key == "emi_denominator" && cfg.emi_denominator != "additive" && cfg.emi_denominator != "rss")
            fail(path, line, "key 'emi_denominator': expected 'additive' or 'rss'");
        if (key == "case" && cfg.case_id != "A" && cfg.case_id != "B" && cfg.case_id != "C" &&
            cfg.case_id != "D" && cfg.case_id != "all")
            fail(path, line, "key 'case': expected A, B, C, D or all");
        if (key == "model_mixing" && cfg.model_mixing != "ensemble" && cfg.model_mixing != "pooled")
            fail(path, line, "key 'model_mixing': expected 'ensemble' or 'pooled'");
        if (key == "histogram_bins" && cfg.histogram_bins < 2)
            fail(path, line, "key 'histogram_bins': must be >= 2");
        if (key == "histogram_samples" && cfg.histogram_samples < 100)
            fail(path, line, "key 'histogram_samples': must be >= 100");
    }

    if (!(cfg.t_min < cfg.t_max))
        throw std::runtime_error(path + ": t_min must be below t_max");
    if (emi_given && alpha_given) {
        if (std::abs(decision::alpha_from_emi_target(cfg.emi_target) - cfg.alpha_target) > 1e-6)
            throw std::runtime_error(path + ": emi_target and alpha_target disagree beyond 1e-6");
    } else if (emi_given) {
        cfg.alpha_target = decision::alpha_from_emi_target(cfg.emi_target);
    } else {
        cfg.emi_target = decision::emi_target_from_alpha(cfg.alpha_target);
    }
    return cfg;
}

std::string emit_config(const RunConfig& cfg) {
    std::ostringstream out;
    char buf[128];
    auto num = [&](double v) {
        // full precision so emit -> parse is an exact round trip
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "# rrcdsp run configuration\n"
        << "\n[gp]\n"
        << "restarts = " << cfg.restarts << "\n"
        << "\n[uncertainty]\n"
        << "sigma_pa = " << num(cfg.sigma_pa) << "  # deg F spread on temperature\n"
        << "family = " << cfg.family << "\n"
        << "\n[cdsp]\n"
        << "t_min = " << num(cfg.t_min) << "\n"
        << "t_max = " << num(cfg.t_max) << "\n"
        << "grid_points = " << cfg.grid_points << "\n"
        << "mc_samples = " << cfg.mc_samples << "\n"
        << "lrl = " << num(cfg.lrl) << "  # MPa, lower requirement limit\n"
        << "alpha_target = " << num(cfg.alpha_target) << "\n"
        << "emi_target = " << num(cfg.emi_target) << "\n"
        << "emi_denominator = " << cfg.emi_denominator << "  # additive | rss\n"
        << "\n[experiment]\n"
        << "master_seed = " << cfg.master_seed << "\n"
        << "case = " << cfg.case_id << "\n"
        << "model_mixing = " << cfg.model_mixing << "  # ensemble | pooled\n"
        << "literal_sparse_n = " << (cfg.literal_sparse_n ? "true" : "false") << "\n"
        << "histogram_samples = " << cfg.histogram_samples << "\n"
        << "histogram_bins = " << cfg.histogram_bins << "\n"
        << "\n[output]\n"
        << "dir = " << cfg.output_dir << "\n";
    return out.str();
}

} // namespace rrcdsp::io
