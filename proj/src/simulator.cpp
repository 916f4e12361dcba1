#include "cmimp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmimp/error.hpp"
#include "text_util.hpp"

namespace cmimp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double omega(double f_hz) { return kTwoPi * f_hz; }

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::invalid_argument, message);
}

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool positive(double v) { return std::isfinite(v) && v > 0.0; }

Complex interpolate_table(std::span<const double> f, std::span<const Complex> z, double f_hz,
                          const char* what) {
    if (f.empty() || f_hz < f.front() || f_hz > f.back()) {
        throw Error(ErrorCode::span, std::string(what) + ": table does not cover " + std::to_string(f_hz) + " Hz");
    }
    auto upper = std::upper_bound(f.begin(), f.end(), f_hz);
    std::size_t hi = static_cast<std::size_t>(upper - f.begin());
    if (f[hi - 1] == f_hz) return z[hi - 1];
    const std::size_t j0 = hi - 1;
    const double w = (std::log(f_hz) - std::log(f[j0])) / (std::log(f[hi]) - std::log(f[j0]));
    return z[j0] + w * (z[hi] - z[j0]);
}

void validate_table(std::span<const double> f, std::span<const Complex> z, const char* what) {
    require(!f.empty() && f.size() == z.size(), std::string(what) + ": table is empty or ragged");
    for (std::size_t i = 0; i < f.size(); ++i) {
        require(positive(f[i]) && (i == 0 || f[i] > f[i - 1]),
                std::string(what) + ": table frequencies must be positive and strictly increasing");
        require(std::isfinite(z[i].real()) && std::isfinite(z[i].imag()),
                std::string(what) + ": table impedance is not finite");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

void ProbeModel::validate() const {
    require(positive(turns_ratio), "probe: turns ratio must be finite and > 0");
    require(magnetizing_inductance_h > 0.0 && !std::isnan(magnetizing_inductance_h),
            "probe: magnetizing inductance must be > 0 (infinite for an ideal core)");
    require(nonneg(leakage_inductance_h), "probe: leakage inductance must be finite and >= 0");
    require(nonneg(parasitic_capacitance_f), "probe: parasitic capacitance must be finite and >= 0");
    require(nonneg(winding_resistance_ohm), "probe: winding resistance must be finite and >= 0");
}

Complex evaluate(const ImpedanceModel& model, double f_hz) {
    using namespace impedance_model;
    const double w = omega(f_hz);
    return std::visit(
        [&](const auto& m) -> Complex {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return {m.r_ohm, 0.0};
            } else if constexpr (std::is_same_v<T, SeriesRL>) {
                return {m.r_ohm, w * m.l_h};
            } else if constexpr (std::is_same_v<T, ParallelRC>) {
                return 1.0 / Complex(1.0 / m.r_ohm, w * m.c_f);
            } else {
                return interpolate_table(m.frequency_hz, m.z_ohm, f_hz, "impedance table");
            }
        },
        model);
}

void validate(const ImpedanceModel& model, const char* what) {
    using namespace impedance_model;
    const std::string name(what);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                require(nonneg(m.r_ohm), name + ": resistance must be finite and >= 0");
            } else if constexpr (std::is_same_v<T, SeriesRL>) {
                require(nonneg(m.r_ohm) && nonneg(m.l_h), name + ": R and L must be finite and >= 0");
            } else if constexpr (std::is_same_v<T, ParallelRC>) {
                require(positive(m.r_ohm) && nonneg(m.c_f), name + ": parallel RC needs R > 0 and C >= 0");
            } else {
                validate_table(m.frequency_hz, m.z_ohm, what);
            }
        },
        model);
}

void LisnCableModel::validate() const {
    cmimp::validate(z_cm_lisn, "LISN impedance");
    cmimp::validate(z_cm_cable, "cable impedance");
}

void CircuitModel::validate() const {
    probe.validate();
    lisn_cable.validate();
    if (noise) {
        require(nonneg(noise->relative_amplitude), "noise amplitude must be finite and >= 0");
    }
    if (sap_attenuation_db) {
        require(std::isfinite(*sap_attenuation_db), "SAP attenuation must be finite");
    }
}

Impedance evaluate(const TerminationModel& term, double f_hz) {
    using namespace termination;
    const double w = omega(f_hz);
    return std::visit(
        [&](const auto& t) -> Impedance {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Open>) {
                return Impedance::open();
            } else if constexpr (std::is_same_v<T, Short>) {
                return Impedance(0.0);
            } else if constexpr (std::is_same_v<T, Resistor>) {
                return Impedance(t.r_ohm);
            } else if constexpr (std::is_same_v<T, SeriesRlc>) {
                Complex z{t.r_ohm.value_or(0.0), w * t.l_h.value_or(0.0)};
                if (t.c_f) z += 1.0 / Complex(0.0, w * *t.c_f);
                return Impedance(z);
            } else if constexpr (std::is_same_v<T, ParallelRlc>) {
                Complex y{0.0, 0.0};
                if (t.r_ohm) y += 1.0 / *t.r_ohm;
                if (t.l_h) y += 1.0 / Complex(0.0, w * *t.l_h);
                if (t.c_f) y += Complex(0.0, w * *t.c_f);
                if (y == Complex(0.0, 0.0)) return Impedance::open();
                return Impedance(1.0 / y);
            } else {
                return Impedance(interpolate_table(t.frequency_hz, t.z_ohm, f_hz, "termination table"));
            }
        },
        term);
}

namespace {

void validate(const TerminationModel& term) {
    using namespace termination;
    std::visit(
        [](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Resistor>) {
                require(nonneg(t.r_ohm), "termination: resistance must be finite and >= 0");
            } else if constexpr (std::is_same_v<T, SeriesRlc>) {
                require(!t.r_ohm || nonneg(*t.r_ohm), "termination: series R must be >= 0");
                require(!t.l_h || nonneg(*t.l_h), "termination: series L must be >= 0");
                require(!t.c_f || positive(*t.c_f), "termination: series C must be > 0");
            } else if constexpr (std::is_same_v<T, ParallelRlc>) {
                require(!t.r_ohm || positive(*t.r_ohm), "termination: parallel R must be > 0");
                require(!t.l_h || positive(*t.l_h), "termination: parallel L must be > 0");
                require(!t.c_f || nonneg(*t.c_f), "termination: parallel C must be >= 0");
            } else if constexpr (std::is_same_v<T, Table>) {
                validate_table(t.frequency_hz, t.z_ohm, "termination table");
            }
        },
        term);
}

}  // namespace

TerminationModel parse_termination(std::string_view spec) {
    const std::string s = text::upper(spec);
    auto bad = [&](const std::string& why) {
        return Error(ErrorCode::invalid_argument, "termination '" + std::string(spec) + "': " + why);
    };
    if (s == "OPEN") return termination::Open{};
    if (s == "SHORT") return termination::Short{};
    if (s.rfind("R=", 0) == 0) {
        auto r = text::parse_double(std::string_view(s).substr(2));
        if (!r || *r < 0.0) throw bad("resistance must be a number >= 0");
        return termination::Resistor{*r};
    }
    auto colon = s.find(':');
    if (colon == std::string::npos) throw bad("expected OPEN, SHORT, R=<ohms>, SERIES:... or PARALLEL:...");
    const std::string kind = s.substr(0, colon);
    if (kind != "SERIES" && kind != "PARALLEL") throw bad("unknown kind '" + kind + "'");
    std::optional<double> r, l, c;
    std::string_view rest = std::string_view(s).substr(colon + 1);
    while (!rest.empty()) {
        auto comma = rest.find(',');
        auto item = rest.substr(0, comma);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw bad("expected NAME=value");
        auto value = text::parse_double(item.substr(eq + 1));
        if (!value) throw bad("bad number in '" + std::string(item) + "'");
        auto name = item.substr(0, eq);
        if (name == "R") r = value;
        else if (name == "L") l = value;
        else if (name == "C") c = value;
        else throw bad("unknown element '" + std::string(name) + "'");
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (!r && !l && !c) throw bad("no elements given");
    TerminationModel out = kind == "SERIES" ? TerminationModel(termination::SeriesRlc{r, l, c})
                                            : TerminationModel(termination::ParallelRlc{r, l, c});
    validate(out);
    return out;
}

// ---------------------------------------------------------------------------
// Networks

AbcdSweep probe_abcd(const ProbeModel& probe, const FrequencyGrid& grid) {
    probe.validate();
    const double n = probe.turns_ratio;
    const AbcdMatrix ratio{n, 0.0, 0.0, 1.0 / n};
    const bool ideal_core = std::isinf(probe.magnetizing_inductance_h);
    std::vector<AbcdMatrix> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = omega(grid[i]);
        AbcdMatrix m = abcd_of_shunt({0.0, w * probe.parasitic_capacitance_f}) *
                       abcd_of_series({probe.winding_resistance_ohm, w * probe.leakage_inductance_h});
        if (!ideal_core) {
            m = m * abcd_of_shunt(1.0 / Complex(0.0, w * probe.magnetizing_inductance_h));
        }
        out[i] = m * ratio;
    }
    return AbcdSweep(grid, std::move(out), true);
}

AbcdSweep lisn_cable_abcd(const LisnCableModel& model, const FrequencyGrid& grid) {
    model.validate();
    std::vector<AbcdMatrix> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = abcd_of_series(evaluate(model.z_cm_lisn, grid[i]) + evaluate(model.z_cm_cable, grid[i]));
    }
    return AbcdSweep(grid, std::move(out), true);
}

AbcdSweep sap_chain_abcd(double attenuation_db, const ReferenceImpedance& z0, const FrequencyGrid& grid) {
    require(std::isfinite(attenuation_db), "SAP attenuation must be finite");
    // Matched attenuator with voltage loss factor k: A = D = (k + 1/k) / 2,
    // B = z0 (k - 1/k) / 2, C = (k - 1/k) / (2 z0).
    const double k = std::pow(10.0, attenuation_db / 20.0);
    const double even = 0.5 * (k + 1.0 / k);
    const double odd = 0.5 * (k - 1.0 / k);
    const AbcdMatrix m{even, z0.ohms() * odd, odd / z0.ohms(), even};
    return AbcdSweep(grid, std::vector<AbcdMatrix>(grid.size(), m), true);
}

AbcdSweep network_abcd(const CircuitModel& model, const FrequencyGrid& grid) {
    model.validate();
    AbcdSweep net = cascade(probe_abcd(model.probe, grid), lisn_cable_abcd(model.lisn_cable, grid));
    if (model.sap_attenuation_db) {
        net = cascade(sap_chain_abcd(*model.sap_attenuation_db, model.z0, grid), net);
    }
    return net;
}

// ---------------------------------------------------------------------------
// Simulation

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t index) const {
    // splitmix64 finalizer over a combined counter.
    std::uint64_t z = m_seed ^ (stream * 0xD1B54A32D192ED03ull) ^ (index * 0x9E3779B97F4A7C15ull);
    for (int round = 0; round < 2; ++round) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
    }
    return z;
}

double CounterRng::symmetric_unit(std::uint64_t stream, std::uint64_t index) const {
    const double unit = static_cast<double>(bits(stream, index) >> 11) * 0x1.0p-53;
    return 2.0 * unit - 1.0;
}

ComplexSweep simulate_gamma(const CircuitModel& model, const TerminationModel& term,
                            const FrequencyGrid& grid, bool with_noise) {
    validate(term);
    const AbcdSweep net = network_abcd(model, grid);
    std::vector<Complex> gamma(grid.size());
    std::vector<PointFlags> pf(grid.size(), flags::none);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Impedance zin = input_impedance(net[i], evaluate(term, grid[i]));
        if (auto g = gamma_from_z(zin, model.z0)) {
            gamma[i] = *g;
        } else {
            gamma[i] = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
            pf[i] = flags::singular;
        }
    }
    if (with_noise && model.noise && model.noise->relative_amplitude > 0.0) {
        const CounterRng rng(model.noise->seed);
        const double scale = model.noise->relative_amplitude / std::numbers::sqrt2;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (pf[i] & flags::singular) continue;
            const Complex u{rng.symmetric_unit(0, i), rng.symmetric_unit(1, i)};
            gamma[i] *= 1.0 + scale * u;
        }
    }
    return ComplexSweep(grid, std::move(gamma), SweepRole::reflection, std::move(pf));
}

OslSweeps simulate_osl(const CircuitModel& model, double z_std, const FrequencyGrid& grid, bool with_noise) {
    require(positive(z_std), "load standard value must be finite and > 0");
    return OslSweeps(simulate_gamma(model, termination::Open{}, grid, with_noise),
                     simulate_gamma(model, termination::Short{}, grid, with_noise),
                     simulate_gamma(model, termination::Resistor{z_std}, grid, with_noise));
}

}  // namespace cmimp
