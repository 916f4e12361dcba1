#include "cmimp/network.hpp"

#include <cmath>
#include <string>

#include "cmimp/error.hpp"

namespace cmimp {

namespace {

constexpr double kTinyDenominator = 1e-300;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct FlagName {
    PointFlags bit;
    const char* name;
};

constexpr FlagName kFlagNames[] = {
    {flags::singular, "SINGULAR"},
    {flags::ill_conditioned, "ILL_CONDITIONED"},
    {flags::extrapolated, "EXTRAPOLATED"},
    {flags::active, "ACTIVE"},
    {flags::negative_resistance, "NEGATIVE_RESISTANCE"},
};

}  // namespace

std::string flags_to_string(PointFlags f) {
    std::string out;
    for (const auto& [bit, name] : kFlagNames) {
        if (f & bit) {
            if (!out.empty()) out += '|';
            out += name;
        }
    }
    return out;
}

PointFlags flags_from_string(std::string_view text) {
    PointFlags out = flags::none;
    while (!text.empty()) {
        auto bar = text.find('|');
        auto token = text.substr(0, bar);
        bool known = false;
        for (const auto& [bit, name] : kFlagNames) {
            if (token == name) {
                out |= bit;
                known = true;
            }
        }
        if (!known && !token.empty()) {
            throw Error(ErrorCode::invalid_argument, "unknown point flag '" + std::string(token) + "'");
        }
        if (bar == std::string_view::npos) break;
        text.remove_prefix(bar + 1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// FrequencyGrid

FrequencyGrid::FrequencyGrid(std::vector<double> points, Spacing spacing)
    : m_points(std::move(points)), m_spacing(spacing) {
    if (m_points.empty()) {
        throw Error(ErrorCode::invalid_argument, "frequency grid is empty");
    }
    for (std::size_t i = 0; i < m_points.size(); ++i) {
        if (!std::isfinite(m_points[i]) || m_points[i] <= 0.0) {
            throw Error(ErrorCode::invalid_argument,
                        "frequency grid point " + std::to_string(i) + " is not finite and positive");
        }
        if (i > 0 && !(m_points[i] > m_points[i - 1])) {
            throw Error(ErrorCode::invalid_argument,
                        "frequency grid is not strictly increasing at index " + std::to_string(i));
        }
    }
}

FrequencyGrid FrequencyGrid::linear(double start_hz, double stop_hz, std::size_t count) {
    if (count == 0) {
        throw Error(ErrorCode::invalid_argument, "grid needs at least one point");
    }
    std::vector<double> pts(count);
    if (count == 1) {
        pts[0] = start_hz;
    } else {
        double step = (stop_hz - start_hz) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) {
            pts[i] = start_hz + step * static_cast<double>(i);
        }
        pts.back() = stop_hz;
    }
    return FrequencyGrid(std::move(pts), Spacing::linear);
}

FrequencyGrid FrequencyGrid::logarithmic(double start_hz, double stop_hz, std::size_t count) {
    if (count == 0) {
        throw Error(ErrorCode::invalid_argument, "grid needs at least one point");
    }
    if (!(start_hz > 0.0) || !(stop_hz > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "logarithmic grid needs positive end points");
    }
    std::vector<double> pts(count);
    if (count == 1) {
        pts[0] = start_hz;
    } else {
        double lo = std::log(start_hz);
        double step = (std::log(stop_hz) - lo) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) {
            pts[i] = std::exp(lo + step * static_cast<double>(i));
        }
        pts.front() = start_hz;
        pts.back() = stop_hz;
    }
    return FrequencyGrid(std::move(pts), Spacing::logarithmic);
}

FrequencyGrid FrequencyGrid::from_points(std::vector<double> points_hz) {
    return FrequencyGrid(std::move(points_hz), Spacing::explicit_points);
}

FrequencyGrid FrequencyGrid::default_sweep() { return logarithmic(150e3, 30e6, 201); }

std::optional<std::size_t> FrequencyGrid::first_mismatch(const FrequencyGrid& other) const {
    std::size_t n = std::min(size(), other.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (m_points[i] != other.m_points[i]) return i;
    }
    if (size() != other.size()) return n;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

ReferenceImpedance::ReferenceImpedance(double ohms) : m_ohms(ohms) {
    if (!std::isfinite(ohms) || ohms <= 0.0) {
        throw Error(ErrorCode::invalid_argument, "reference impedance must be finite and > 0");
    }
}

bool AbcdMatrix::is_finite() const { return finite(a) && finite(b) && finite(c) && finite(d); }

bool AbcdMatrix::is_reciprocal() const {
    Complex ad = a * d;
    Complex bc = b * c;
    return std::abs(ad - bc - 1.0) <= 1e-12 * (1.0 + std::abs(ad) + std::abs(bc));
}

AbcdMatrix abcd_of_series(Complex z) {
    if (!finite(z)) throw Error(ErrorCode::invalid_argument, "series impedance is not finite");
    return {1.0, z, 0.0, 1.0};
}

AbcdMatrix abcd_of_shunt(Complex y) {
    if (!finite(y)) throw Error(ErrorCode::invalid_argument, "shunt admittance is not finite");
    return {1.0, 0.0, y, 1.0};
}

// ---------------------------------------------------------------------------

AbcdSweep::AbcdSweep(FrequencyGrid grid, std::vector<AbcdMatrix> matrices, bool reciprocal)
    : m_grid(std::move(grid)), m_matrices(std::move(matrices)), m_reciprocal(reciprocal) {
    if (m_matrices.size() != m_grid.size()) {
        throw Error(ErrorCode::invalid_argument, "ABCD sweep length does not match its grid");
    }
    for (std::size_t i = 0; i < m_matrices.size(); ++i) {
        if (!m_matrices[i].is_finite()) {
            throw Error(ErrorCode::invalid_argument,
                        "ABCD matrix at index " + std::to_string(i) + " is not finite");
        }
    }
}

AbcdSweep AbcdSweep::identity(FrequencyGrid grid) {
    std::vector<AbcdMatrix> m(grid.size(), AbcdMatrix::identity());
    return AbcdSweep(std::move(grid), std::move(m), true);
}

const char* to_string(SweepRole role) noexcept {
    switch (role) {
    case SweepRole::reflection: return "reflection";
    case SweepRole::impedance_ohm: return "impedance_ohm";
    case SweepRole::k_coefficient: return "k_coefficient";
    }
    return "unknown";
}

ComplexSweep::ComplexSweep(FrequencyGrid grid, std::vector<Complex> values, SweepRole role,
                           std::vector<PointFlags> point_flags)
    : m_grid(std::move(grid)), m_values(std::move(values)), m_role(role), m_flags(std::move(point_flags)) {
    if (m_values.size() != m_grid.size()) {
        throw Error(ErrorCode::invalid_argument, "sweep length does not match its grid");
    }
    if (m_flags.empty()) {
        m_flags.assign(m_values.size(), flags::none);
    } else if (m_flags.size() != m_values.size()) {
        throw Error(ErrorCode::invalid_argument, "sweep flag count does not match its grid");
    }
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        if (m_flags[i] & flags::singular) continue;
        if (!finite(m_values[i])) {
            throw Error(ErrorCode::invalid_argument,
                        "sweep value at index " + std::to_string(i) + " is not finite");
        }
        if (m_role == SweepRole::reflection) {
            if (std::abs(m_values[i]) > 1.0) {
                m_flags[i] |= flags::active;
            } else {
                m_flags[i] &= static_cast<PointFlags>(~flags::active);
            }
        }
    }
}

// ---------------------------------------------------------------------------

AbcdSweep cascade(const AbcdSweep& first, const AbcdSweep& second) {
    if (auto idx = first.grid().first_mismatch(second.grid())) {
        throw Error(ErrorCode::grid_mismatch,
                    "cascade: grids differ at index " + std::to_string(*idx));
    }
    std::vector<AbcdMatrix> out(first.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = first[i] * second[i];
    }
    return AbcdSweep(first.grid(), std::move(out), first.reciprocal() && second.reciprocal());
}

Impedance input_impedance(const AbcdMatrix& net, const Impedance& load) {
    if (load.is_open()) {
        if (std::abs(net.c) < kTinyDenominator) return Impedance::open();
        return Impedance(net.a / net.c);
    }
    Complex z = load.value();
    Complex den = net.c * z + net.d;
    if (std::abs(den) < kTinyDenominator) return Impedance::open();
    return Impedance((net.a * z + net.b) / den);
}

std::optional<Complex> gamma_from_z(const Impedance& z, const ReferenceImpedance& z0) {
    if (z.is_open()) return Complex(1.0, 0.0);
    Complex den = z.value() + z0.ohms();
    if (std::abs(den) < kTinyDenominator) return std::nullopt;
    return (z.value() - z0.ohms()) / den;
}

Impedance z_from_gamma(Complex gamma, const ReferenceImpedance& z0) {
    Complex den = 1.0 - gamma;
    if (std::abs(den) < 1e-12) return Impedance::open();
    return Impedance(z0.ohms() * (1.0 + gamma) / den);
}

}  // namespace cmimp
