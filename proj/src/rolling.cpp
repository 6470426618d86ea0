#include "rrcdsp/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rrcdsp::rolling {

namespace {

constexpr double kGasConstant = 8.314;      // J/(mol K)
constexpr double kQDeformation = 312000.0;  // J/mol, Zener-Hollomon activation
constexpr double kDrxCoeff = 16000.0;       // um, d_drx = 16000 Z^-0.23
constexpr double kDrxExponent = -0.23;
constexpr double kMdrxCoeff = 26000.0;      // um, d_mdrx = 26000 Z^-0.23
constexpr double kMdrxExponent = -0.23;
constexpr double kPeakStrainCoeff = 6.97e-4;
constexpr double kPeakStrainGrainExp = 0.3;
constexpr double kPeakStrainZExp = 0.17;
constexpr double kCriticalStrainRatio = 0.8;
constexpr double kDrxAvramiRate = 0.8;
constexpr double kDrxAvramiExp = 1.4;
constexpr double kMdrxHalfTimeCoeff = 1.1;  // s
constexpr double kMdrxHalfTimeZExp = -0.8;
constexpr double kQMdrx = 230000.0;         // J/mol
constexpr double kGrowthCoeff = 1.5e27;     // um^7/s
constexpr double kQGrowth = 400000.0;       // J/mol
constexpr double kGrowthExponent = 7.0;

// Ferrite grain size after transformation, C-Mn regression:
// d_alpha = (-0.4 + 6.37 Ceq) + (24.2 - 59 Ceq) CR^-0.5 + 22 (1 - e^{-0.015 d_gamma})
constexpr double kFerriteA0 = -0.4, kFerriteA1 = 6.37;
constexpr double kFerriteB0 = 24.2, kFerriteB1 = -59.0;
constexpr double kFerriteC = 22.0, kFerriteCExp = 0.015;

// Equilibrium lever rule on the Fe-C eutectoid.
constexpr double kEutectoidCarbon = 0.77;  // wt%
constexpr double kFerriteSolubility = 0.02; // wt%

// Pearlite interlamellar spacing: inverse-undercooling power law in the
// cooling rate.
constexpr double kSpacingCoeff = 0.5;  // um at 1 K/s
constexpr double kSpacingExponent = -0.3;

double fahrenheit_to_kelvin(double t_f) { return (t_f - 32.0) / 1.8 + 273.15; }

double zener_hollomon(double strain_rate, double t_k) {
    return strain_rate * std::exp(kQDeformation / (kGasConstant * t_k));
}

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::domain_error(std::string("rolling: ") + field + " must be positive and finite");
}

} // namespace

void RollingState::validate() const {
    require_positive(strain, "strain");
    require_positive(strain_rate, "strain_rate");
    require_positive(interpass_time_s, "interpass_time");
    require_positive(initial_grain_um, "initial_grain_size");
    if (!std::isfinite(temperature_f) || temperature_f < 800.0 || temperature_f > 2400.0)
        throw std::domain_error("rolling: temperature outside validity window [800, 2400] F");
}

void Composition::validate() const {
    if (!(carbon_wt >= 0.0) || carbon_wt >= kEutectoidCarbon)
        throw std::domain_error("rolling: carbon outside hypo-eutectoid range [0, 0.77)");
    if (!(manganese_wt >= 0.0) || manganese_wt > 2.0)
        throw std::domain_error("rolling: manganese outside validity range [0, 2]");
}

const ValidityWindow& validity_window() {
    static const ValidityWindow w{};
    return w;
}

GrainResult drx_grain(const RollingState& state) {
    state.validate();
    const double t_k = fahrenheit_to_kelvin(state.temperature_f);
    const double z = zener_hollomon(state.strain_rate, t_k);
    const double size = kDrxCoeff * std::pow(z, kDrxExponent);

    const double peak_strain = kPeakStrainCoeff *
                               std::pow(state.initial_grain_um, kPeakStrainGrainExp) *
                               std::pow(z, kPeakStrainZExp);
    const double critical = kCriticalStrainRatio * peak_strain;
    double fraction = 0.0;
    if (state.strain > critical) {
        const double u = (state.strain - critical) / peak_strain;
        fraction = 1.0 - std::exp(-kDrxAvramiRate * std::pow(u, kDrxAvramiExp));
    }
    return {size, std::clamp(fraction, 0.0, 1.0)};
}

GrainResult mdrx_grain(const RollingState& state) {
    state.validate();
    const double t_k = fahrenheit_to_kelvin(state.temperature_f);
    const double z = zener_hollomon(state.strain_rate, t_k);
    const double size = kMdrxCoeff * std::pow(z, kMdrxExponent);
    const double half_time = kMdrxHalfTimeCoeff * std::pow(z, kMdrxHalfTimeZExp) *
                             std::exp(kQMdrx / (kGasConstant * t_k));
    const double fraction = 1.0 - std::exp(-std::numbers::ln2 * state.interpass_time_s / half_time);
    return {size, std::clamp(fraction, 0.0, 1.0)};
}

double post_recrystallization_size(const RollingState& state) {
    const GrainResult d = drx_grain(state);
    const GrainResult m = mdrx_grain(state);
    const double after_drx = d.fraction * d.grain_size_um +
                             (1.0 - d.fraction) * state.initial_grain_um;
    return m.fraction * m.grain_size_um + (1.0 - m.fraction) * after_drx;
}

double grain_growth(double post_mdrx_um, double time_s, double temperature_f) {
    require_positive(post_mdrx_um, "post_mdrx_size");
    if (time_s < 0.0 || !std::isfinite(time_s))
        throw std::domain_error("rolling: growth time must be non-negative");
    if (temperature_f < 800.0 || temperature_f > 2400.0)
        throw std::domain_error("rolling: temperature outside validity window [800, 2400] F");
    const double t_k = fahrenheit_to_kelvin(temperature_f);
    const double grown = std::pow(post_mdrx_um, kGrowthExponent) +
                         kGrowthCoeff * time_s * std::exp(-kQGrowth / (kGasConstant * t_k));
    return std::pow(grown, 1.0 / kGrowthExponent);
}

Microstructure cooling_microstructure(double final_austenite_um, const Composition& comp,
                                      double cooling_rate_f_per_s) {
    require_positive(final_austenite_um, "final_austenite_size");
    require_positive(cooling_rate_f_per_s, "cooling_rate");
    comp.validate();

    const double cr_k = cooling_rate_f_per_s / 1.8;
    const double ceq = comp.carbon_wt + comp.manganese_wt / 6.0;

    Microstructure out;
    out.ferrite_grain_um = (kFerriteA0 + kFerriteA1 * ceq) +
                           (kFerriteB0 + kFerriteB1 * ceq) / std::sqrt(cr_k) +
                           kFerriteC * (1.0 - std::exp(-kFerriteCExp * final_austenite_um));
    if (!(out.ferrite_grain_um > 0.0))
        throw std::domain_error("rolling: ferrite grain size fell outside validity range");
    out.ferrite_fraction = std::clamp(
        (kEutectoidCarbon - comp.carbon_wt) / (kEutectoidCarbon - kFerriteSolubility), 0.0, 1.0);
    out.pearlite_spacing_um = kSpacingCoeff * std::pow(cr_k, kSpacingExponent);
    return out;
}

double yield_strength(ModelSelector model, const Microstructure& micro, const Composition& comp) {
    comp.validate();
    if (!(micro.ferrite_grain_um > 0.0) || !(micro.pearlite_spacing_um > 0.0) ||
        micro.ferrite_fraction < 0.0 || micro.ferrite_fraction > 1.0)
        throw std::domain_error("rolling: microstructure outside physical bounds");

    const double d_mm = micro.ferrite_grain_um / 1000.0;
    const double s_mm = micro.pearlite_spacing_um / 1000.0;
    const double hp_d = 1.0 / std::sqrt(d_mm); // Hall-Petch term, mm^-1/2
    const double xf = micro.ferrite_fraction;

    switch (model) {
    case ModelSelector::Upper:
        // Hodgson-Gibbs C-Mn yield strength (solute terms beyond Mn at zero).
        return 62.6 + 26.1 * comp.manganese_wt + 19.7 * hp_d;
    case ModelSelector::Middle: {
        // Gladman ferrite-pearlite law with cube-root phase weighting.
        const double fw = std::cbrt(xf);
        const double ferrite = 35.4 + 58.5 * comp.manganese_wt + 17.4 * hp_d;
        const double pearlite = 178.6 + 3.85 / std::sqrt(s_mm);
        return fw * ferrite + (1.0 - fw) * pearlite;
    }
    case ModelSelector::Lower: {
        // Kuziak ferrite-pearlite law, linear phase weighting; spacing term
        // on the micrometre scale (see docs/model-constants.md).
        const double ferrite = 77.7 + 59.9 * comp.manganese_wt + 9.1 * hp_d;
        const double pearlite = 145.5 + 3.5 / std::sqrt(micro.pearlite_spacing_um);
        return xf * ferrite + (1.0 - xf) * pearlite;
    }
    case ModelSelector::All:
        throw std::invalid_argument("yield_strength: All is not a single model");
    }
    throw std::invalid_argument("yield_strength: unknown model selector");
}

double full_chain(const RollingState& state, const Composition& comp,
                  double cooling_rate_f_per_s, ModelSelector model) {
    const double rex = post_recrystallization_size(state);
    const double austenite = grain_growth(rex, state.interpass_time_s, state.temperature_f);
    const Microstructure micro = cooling_microstructure(austenite, comp, cooling_rate_f_per_s);
    return yield_strength(model, micro, comp);
}

const ChainDefaults& chain_defaults() {
    static const ChainDefaults d{};
    return d;
}

gp::Matrix stratified_samples(const std::vector<std::pair<double, double>>& bounds,
                              int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("stratified_samples: n must be >= 1");
    const auto dims = static_cast<Eigen::Index>(bounds.size());
    gp::Matrix out(n, dims);
    for (Eigen::Index k = 0; k < dims; ++k) {
        auto rng = CounterRng::from(seed, 0x51A7u, static_cast<std::uint64_t>(k));
        // one sample per stratum, then a Fisher-Yates pairing shuffle
        std::vector<double> column(n);
        for (int i = 0; i < n; ++i)
            column[i] = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n);
        for (int i = n - 1; i > 0; --i) {
            const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(column[i], column[j]);
        }
        const auto [lo, hi] = bounds[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i)
            out(i, k) = lo + (hi - lo) * column[static_cast<std::size_t>(i)];
    }
    return out;
}

gp::Dataset generate_training_data(double t_lo_f, double t_hi_f, ModelSelector selector,
                                   int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("generate_training_data: n must be >= 2");
    if (!(t_lo_f < t_hi_f)) throw std::invalid_argument("generate_training_data: bad window");

    const ChainDefaults& defaults = chain_defaults();
    const gp::Matrix temps = stratified_samples({{t_lo_f, t_hi_f}}, n, seed);
    auto model_rng = CounterRng::from(seed, 0x3D0Du);

    gp::Vector y(n);
    for (int i = 0; i < n; ++i) {
        ModelSelector m = selector;
        if (selector == ModelSelector::All) {
            switch (model_rng.below(3)) {
            case 0: m = ModelSelector::Middle; break;
            case 1: m = ModelSelector::Upper; break;
            default: m = ModelSelector::Lower; break;
            }
        }
        const RollingState state{defaults.strain, defaults.strain_rate, temps(i, 0),
                                 defaults.interpass_time_s, defaults.initial_grain_um};
        y(i) = full_chain(state, defaults.comp, defaults.cooling_rate_f_per_s, m);
    }
    return gp::Dataset(temps, y, {"temperature"}, {"F"});
}

const std::vector<ConstantRecord>& constants_table() {
    static const std::vector<ConstantRecord> table = {
        {"gas_constant", kGasConstant, "J/(mol K)", "CODATA"},
        {"deformation_activation_energy", kQDeformation, "J/mol",
         "Zener-Hollomon activation for C-Mn austenite; Kuziak, Cheng, Glowacki & Pietrzyk (1997)"},
        {"drx_size_coeff", kDrxCoeff, "um",
         "Dynamically recrystallized grain size, C-Mn; Hodgson & Gibbs (1992)"},
        {"drx_size_exponent", kDrxExponent, "-", "Hodgson & Gibbs (1992)"},
        {"mdrx_size_coeff", kMdrxCoeff, "um",
         "Metadynamically recrystallized grain size, C-Mn; Hodgson & Gibbs (1992)"},
        {"mdrx_size_exponent", kMdrxExponent, "-", "Hodgson & Gibbs (1992)"},
        {"peak_strain_coeff", kPeakStrainCoeff, "-",
         "Peak strain eps_p = 6.97e-4 d0^0.3 Z^0.17; Hodgson & Gibbs (1992)"},
        {"peak_strain_grain_exponent", kPeakStrainGrainExp, "-", "Hodgson & Gibbs (1992)"},
        {"peak_strain_z_exponent", kPeakStrainZExp, "-", "Hodgson & Gibbs (1992)"},
        {"critical_strain_ratio", kCriticalStrainRatio, "-",
         "eps_c = 0.8 eps_p; Sellars-type onset criterion"},
        {"drx_avrami_rate", kDrxAvramiRate, "-", "Sellars-type Avrami kinetics, calibrated"},
        {"drx_avrami_exponent", kDrxAvramiExp, "-", "Sellars-type Avrami kinetics, calibrated"},
        {"mdrx_half_time_coeff", kMdrxHalfTimeCoeff, "s",
         "t_0.5 = 1.1 Z^-0.8 exp(230000/RT); Hodgson & Gibbs (1992)"},
        {"mdrx_half_time_z_exponent", kMdrxHalfTimeZExp, "-", "Hodgson & Gibbs (1992)"},
        {"mdrx_activation_energy", kQMdrx, "J/mol", "Hodgson & Gibbs (1992)"},
        {"grain_growth_coeff", kGrowthCoeff, "um^7/s",
         "d^7 growth law for C-Mn; Hodgson & Gibbs (1992)"},
        {"grain_growth_activation_energy", kQGrowth, "J/mol", "Hodgson & Gibbs (1992)"},
        {"grain_growth_exponent", kGrowthExponent, "-", "Hodgson & Gibbs (1992)"},
        {"ferrite_size_a0", kFerriteA0, "um", "Ferrite grain size regression, C-Mn; Kuziak et al. (1997)"},
        {"ferrite_size_a1", kFerriteA1, "um/Ceq", "Kuziak et al. (1997)"},
        {"ferrite_size_b0", kFerriteB0, "um (K/s)^0.5", "Kuziak et al. (1997)"},
        {"ferrite_size_b1", kFerriteB1, "um (K/s)^0.5 / Ceq", "Kuziak et al. (1997)"},
        {"ferrite_size_c", kFerriteC, "um", "Kuziak et al. (1997)"},
        {"ferrite_size_c_exponent", kFerriteCExp, "1/um", "Kuziak et al. (1997)"},
        {"eutectoid_carbon", kEutectoidCarbon, "wt%", "Fe-C equilibrium diagram"},
        {"ferrite_solubility", kFerriteSolubility, "wt%", "Fe-C equilibrium diagram"},
        {"pearlite_spacing_coeff", kSpacingCoeff, "um",
         "Inverse-undercooling spacing law (Marder & Bramfitt form), calibrated to C-Mn cooling rates"},
        {"pearlite_spacing_exponent", kSpacingExponent, "-", "calibrated, see above"},
        {"yield_upper_const", 62.6, "MPa", "Hodgson & Gibbs (1992) yield strength"},
        {"yield_upper_mn", 26.1, "MPa/wt%", "Hodgson & Gibbs (1992)"},
        {"yield_upper_hall_petch", 19.7, "MPa mm^0.5", "Hodgson & Gibbs (1992)"},
        {"yield_middle_ferrite_const", 35.4, "MPa", "Gladman, McIvor & Pickering (1972)"},
        {"yield_middle_mn", 58.5, "MPa/wt%", "Gladman, McIvor & Pickering (1972)"},
        {"yield_middle_hall_petch", 17.4, "MPa mm^0.5", "Gladman, McIvor & Pickering (1972)"},
        {"yield_middle_pearlite_const", 178.6, "MPa", "Gladman, McIvor & Pickering (1972)"},
        {"yield_middle_spacing", 3.85, "MPa mm^0.5", "Gladman, McIvor & Pickering (1972)"},
        {"yield_lower_ferrite_const", 77.7, "MPa", "Kuziak et al. (1997)"},
        {"yield_lower_mn", 59.9, "MPa/wt%", "Kuziak et al. (1997)"},
        {"yield_lower_hall_petch", 9.1, "MPa mm^0.5", "Kuziak et al. (1997)"},
        {"yield_lower_pearlite_const", 145.5, "MPa", "Kuziak et al. (1997)"},
        {"yield_lower_spacing", 3.5, "MPa um^0.5",
         "Kuziak et al. (1997); micrometre spacing scale adopted, see docs/model-constants.md"},
    };
    return table;
}

} // namespace rrcdsp::rolling
