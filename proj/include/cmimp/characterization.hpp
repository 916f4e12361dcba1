#pragma once

#include <map>
#include <string>
#include <vector>

#include "cmimp/network.hpp"

namespace cmimp {

enum class Provenance { from_abcd, from_osl };

const char* to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view text);

struct KTriple {
    Complex k1;
    Complex k2;
    Complex k3;
};

/// Per-frequency (k1, k2, k3) coefficients of the bilinear map
///
///     Z = (k1 * gamma + k2) / (gamma + k3)
///
/// that de-embeds the fixed probe + LISN/cable network. Points flagged
/// SINGULAR hold NaN coefficients and must be skipped.
class KCalibration {
public:
    KCalibration(FrequencyGrid grid, std::vector<KTriple> k, ReferenceImpedance z0, double z_std,
                 std::vector<double> condition, std::vector<PointFlags> point_flags,
                 Provenance provenance, std::map<std::string, std::string> metadata = {});

    const FrequencyGrid& grid() const noexcept { return m_grid; }
    std::span<const KTriple> k() const noexcept { return m_k; }
    const KTriple& operator[](std::size_t i) const { return m_k[i]; }
    std::size_t size() const noexcept { return m_k.size(); }
    const ReferenceImpedance& z0() const noexcept { return m_z0; }
    double z_std() const noexcept { return m_z_std; }
    std::span<const double> condition() const noexcept { return m_condition; }
    std::span<const PointFlags> point_flags() const noexcept { return m_flags; }
    Provenance provenance() const noexcept { return m_provenance; }
    const std::map<std::string, std::string>& metadata() const noexcept { return m_metadata; }

    bool is_singular(std::size_t i) const { return (m_flags[i] & flags::singular) != 0; }
    std::size_t count_flagged(PointFlags which) const;

    KCalibration with_metadata(std::map<std::string, std::string> metadata) const;
    // Copy restricted to [first, first + count).
    KCalibration slice(std::size_t first, std::size_t count) const;

private:
    FrequencyGrid m_grid;
    std::vector<KTriple> m_k;
    ReferenceImpedance m_z0;
    double m_z_std;
    std::vector<double> m_condition;
    std::vector<PointFlags> m_flags;
    Provenance m_provenance;
    std::map<std::string, std::string> m_metadata;
};

/// Reflection sweeps measured with open, short and load standards in place
/// of the unknown impedance. All three share one grid.
class OslSweeps {
public:
    OslSweeps(ComplexSweep gamma_open, ComplexSweep gamma_short, ComplexSweep gamma_load);

    const ComplexSweep& open() const noexcept { return m_open; }
    const ComplexSweep& short_circuit() const noexcept { return m_short; }
    const ComplexSweep& load() const noexcept { return m_load; }
    const FrequencyGrid& grid() const noexcept { return m_open.grid(); }

private:
    ComplexSweep m_open;
    ComplexSweep m_short;
    ComplexSweep m_load;
};

struct OslThresholds {
    // |gamma_load - gamma_short| below this marks the bin SINGULAR.
    double tol_singular = 1e-12;
    // Below this (and above tol_singular) marks the bin ILL_CONDITIONED.
    double tol_cond = 1e-6;
};

/// k coefficients of a known network seen from a VNA with reference z0.
/// Bins with |z0 c + a| < 1e-300 are SINGULAR.
KCalibration k_from_abcd(const AbcdSweep& network, const ReferenceImpedance& z0);

/// k coefficients from open/short/load reflections, with z_std the value
/// of the load standard in ohms:
///
///     k1 = z_std (gL - gO) / (gL - gS)
///     k2 = z_std gS (gO - gL) / (gL - gS)
///     k3 = -gO
///
/// z0 is only recorded in the result; the formulas do not depend on it.
KCalibration k_from_osl(const OslSweeps& osl, double z_std,
                        const OslThresholds& thresholds = {},
                        const ReferenceImpedance& z0 = ReferenceImpedance(50.0));

// |gamma_load - gamma_short| per point.
std::vector<double> conditioning_metric(const OslSweeps& osl);
// |z0 c + a| per point.
std::vector<double> conditioning_metric(const AbcdSweep& network, const ReferenceImpedance& z0);

/// Centered moving average of real and imaginary parts. width must be odd;
/// the window shrinks symmetrically near the ends. width 1 is a copy.
ComplexSweep moving_average(const ComplexSweep& sweep, std::size_t width);

}  // namespace cmimp
