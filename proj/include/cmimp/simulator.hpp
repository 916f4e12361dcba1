#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cmimp/characterization.hpp"
#include "cmimp/network.hpp"

namespace cmimp {

/// Clamp-on probe equivalent circuit, seen from the VNA side:
/// shunt C_p, series (R_w + j w L_lk), shunt magnetizing inductance L_m,
/// then an ideal n:1 ratio. An infinite L_m drops the magnetizing branch.
struct ProbeModel {
    double turns_ratio = 1.0;
    double magnetizing_inductance_h = std::numeric_limits<double>::infinity();
    double leakage_inductance_h = 0.0;
    double parasitic_capacitance_f = 0.0;
    double winding_resistance_ohm = 0.0;

    void validate() const;
};

namespace impedance_model {
struct Constant {
    double r_ohm = 0.0;
};
struct SeriesRL {
    double r_ohm = 0.0;
    double l_h = 0.0;
};
// R in parallel with C. c_f = 0 leaves the bare resistor.
struct ParallelRC {
    double r_ohm = 0.0;
    double c_f = 0.0;
};
// Tabulated complex impedance, interpolated on log frequency between
// table points. Evaluating outside the table throws SpanError.
struct Table {
    std::vector<double> frequency_hz;
    std::vector<Complex> z_ohm;
};
}  // namespace impedance_model

using ImpedanceModel = std::variant<impedance_model::Constant, impedance_model::SeriesRL,
                                    impedance_model::ParallelRC, impedance_model::Table>;

Complex evaluate(const ImpedanceModel& model, double f_hz);
void validate(const ImpedanceModel& model, const char* what);

/// The single common-mode loop through the LISN and the cable bundle.
struct LisnCableModel {
    ImpedanceModel z_cm_lisn = impedance_model::Constant{25.0};
    ImpedanceModel z_cm_cable = impedance_model::SeriesRL{0.1, 1e-6};

    void validate() const;
};

namespace termination {
struct Open {};
struct Short {};
struct Resistor {
    double r_ohm = 50.0;
};
// Elements set to nullopt are absent from the branch.
struct SeriesRlc {
    std::optional<double> r_ohm;
    std::optional<double> l_h;
    std::optional<double> c_f;
};
struct ParallelRlc {
    std::optional<double> r_ohm;
    std::optional<double> l_h;
    std::optional<double> c_f;
};
struct Table {
    std::vector<double> frequency_hz;
    std::vector<Complex> z_ohm;
};
}  // namespace termination

using TerminationModel = std::variant<termination::Open, termination::Short, termination::Resistor,
                                      termination::SeriesRlc, termination::ParallelRlc, termination::Table>;

Impedance evaluate(const TerminationModel& term, double f_hz);

/// Parses "OPEN", "SHORT", "R=50", "SERIES:R=1,L=1e-6,C=1e-9" or
/// "PARALLEL:R=1e3,C=1e-10". Tabulated terminations are built in code or
/// through the model/CSV readers.
TerminationModel parse_termination(std::string_view spec);

struct NoiseModel {
    // Relative perturbation bound: |delta gamma| <= amplitude |gamma|.
    double relative_amplitude = 0.0;
    std::uint64_t seed = 0;
};

struct CircuitModel {
    ProbeModel probe;
    LisnCableModel lisn_cable;
    ReferenceImpedance z0{50.0};
    std::optional<NoiseModel> noise;
    // Matched flat attenuation (positive) or gain (negative) ahead of the probe.
    std::optional<double> sap_attenuation_db;
    std::string description;

    void validate() const;
};

AbcdSweep probe_abcd(const ProbeModel& probe, const FrequencyGrid& grid);
AbcdSweep lisn_cable_abcd(const LisnCableModel& model, const FrequencyGrid& grid);
AbcdSweep sap_chain_abcd(double attenuation_db, const ReferenceImpedance& z0, const FrequencyGrid& grid);

/// sap * probe * lisn_cable, the whole fixed network between the VNA port
/// and the unknown impedance.
AbcdSweep network_abcd(const CircuitModel& model, const FrequencyGrid& grid);

/// Reflection seen by the VNA with `term` in place of the unknown impedance.
/// Noise from the model is applied last unless `with_noise` is false.
ComplexSweep simulate_gamma(const CircuitModel& model, const TerminationModel& term,
                            const FrequencyGrid& grid, bool with_noise = true);

/// Open, short and z_std-ohm load standards at the unknown's position.
OslSweeps simulate_osl(const CircuitModel& model, double z_std, const FrequencyGrid& grid,
                       bool with_noise = false);

/// Counter-based generator: value depends only on (seed, stream, index),
/// so points can be evaluated in any order or in parallel.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : m_seed(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const;
    // Uniform in [-1, 1).
    double symmetric_unit(std::uint64_t stream, std::uint64_t index) const;

private:
    std::uint64_t m_seed;
};

}  // namespace cmimp
