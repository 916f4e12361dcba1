#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmimp {

using Complex = std::complex<double>;

// Per-point quality flags shared by every sweep type.
using PointFlags = std::uint8_t;
namespace flags {
inline constexpr PointFlags none = 0;
inline constexpr PointFlags singular = 1u << 0;
inline constexpr PointFlags ill_conditioned = 1u << 1;
inline constexpr PointFlags extrapolated = 1u << 2;
// |gamma| > 1 on a reflection sweep.
inline constexpr PointFlags active = 1u << 3;
// Extracted impedance with Re(z) < 0. Informational only.
inline constexpr PointFlags negative_resistance = 1u << 4;
}  // namespace flags

// "SINGULAR|ILL_CONDITIONED", empty string for none.
std::string flags_to_string(PointFlags f);
PointFlags flags_from_string(std::string_view text);

enum class Spacing { linear, logarithmic, explicit_points };

/// Strictly increasing list of positive, finite sweep frequencies in hertz.
class FrequencyGrid {
public:
    static FrequencyGrid linear(double start_hz, double stop_hz, std::size_t count);
    static FrequencyGrid logarithmic(double start_hz, double stop_hz, std::size_t count);
    static FrequencyGrid from_points(std::vector<double> points_hz);

    // 201 log-spaced points from 150 kHz to 30 MHz.
    static FrequencyGrid default_sweep();

    std::span<const double> points() const noexcept { return m_points; }
    double operator[](std::size_t i) const { return m_points[i]; }
    std::size_t size() const noexcept { return m_points.size(); }
    double front() const { return m_points.front(); }
    double back() const { return m_points.back(); }
    Spacing spacing() const noexcept { return m_spacing; }

    // Index of the first differing point, or nullopt when the grids are
    // identical point for point.
    std::optional<std::size_t> first_mismatch(const FrequencyGrid& other) const;

    // Exact comparison of the frequency points; spacing tag is ignored.
    friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
        return a.m_points == b.m_points;
    }

private:
    FrequencyGrid(std::vector<double> points, Spacing spacing);

    std::vector<double> m_points;
    Spacing m_spacing;
};

/// VNA reference impedance, real and positive.
class ReferenceImpedance {
public:
    explicit ReferenceImpedance(double ohms);
    double ohms() const noexcept { return m_ohms; }

private:
    double m_ohms;
};

/// Terminal impedance that may be the exact open circuit.
class Impedance {
public:
    Impedance(Complex z) : m_value(z), m_open(false) {}  // NOLINT implicit
    Impedance(double r) : m_value(r, 0.0), m_open(false) {}  // NOLINT implicit

    static Impedance open() { return Impedance(); }

    bool is_open() const noexcept { return m_open; }
    // Meaningless (NaN) for the open circuit.
    Complex value() const noexcept { return m_value; }

private:
    Impedance() : m_value(std::numeric_limits<double>::quiet_NaN(), 0.0), m_open(true) {}

    Complex m_value;
    bool m_open;
};

/// Transmission (ABCD) matrix: b in ohms, c in siemens.
struct AbcdMatrix {
    Complex a{1.0};
    Complex b{0.0};
    Complex c{0.0};
    Complex d{1.0};

    static AbcdMatrix identity() { return {}; }

    Complex determinant() const { return a * d - b * c; }
    bool is_finite() const;
    // |ad - bc - 1| <= 1e-12 (1 + |ad| + |bc|)
    bool is_reciprocal() const;

    friend AbcdMatrix operator*(const AbcdMatrix& x, const AbcdMatrix& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
};

AbcdMatrix abcd_of_series(Complex z);
AbcdMatrix abcd_of_shunt(Complex y);

class AbcdSweep {
public:
    AbcdSweep(FrequencyGrid grid, std::vector<AbcdMatrix> matrices, bool reciprocal);

    // Identity matrix at every grid point.
    static AbcdSweep identity(FrequencyGrid grid);

    const FrequencyGrid& grid() const noexcept { return m_grid; }
    std::span<const AbcdMatrix> matrices() const noexcept { return m_matrices; }
    const AbcdMatrix& operator[](std::size_t i) const { return m_matrices[i]; }
    std::size_t size() const noexcept { return m_matrices.size(); }
    bool reciprocal() const noexcept { return m_reciprocal; }

private:
    FrequencyGrid m_grid;
    std::vector<AbcdMatrix> m_matrices;
    bool m_reciprocal;
};

enum class SweepRole { reflection, impedance_ohm, k_coefficient };

const char* to_string(SweepRole role) noexcept;

/// One complex value per grid point with a role tag and per-point flags.
/// Reflection sweeps must be finite; |gamma| > 1 is flagged `active`.
/// Points flagged singular may hold NaN.
class ComplexSweep {
public:
    ComplexSweep(FrequencyGrid grid, std::vector<Complex> values, SweepRole role,
                 std::vector<PointFlags> point_flags = {});

    const FrequencyGrid& grid() const noexcept { return m_grid; }
    std::span<const Complex> values() const noexcept { return m_values; }
    Complex operator[](std::size_t i) const { return m_values[i]; }
    std::span<const PointFlags> point_flags() const noexcept { return m_flags; }
    std::size_t size() const noexcept { return m_values.size(); }
    SweepRole role() const noexcept { return m_role; }

private:
    FrequencyGrid m_grid;
    std::vector<Complex> m_values;
    SweepRole m_role;
    std::vector<PointFlags> m_flags;
};

/// Per-point product first * second. Throws GridMismatch naming the first
/// differing index.
AbcdSweep cascade(const AbcdSweep& first, const AbcdSweep& second);

/// (a z + b) / (c z + d), or a / c for the open load. A denominator below
/// 1e-300 yields Impedance::open() (infinite input impedance).
Impedance input_impedance(const AbcdMatrix& net, const Impedance& load);

/// (z - z0) / (z + z0); exactly 1 for the open circuit. nullopt when
/// z = -z0 (singular reflection).
std::optional<Complex> gamma_from_z(const Impedance& z, const ReferenceImpedance& z0);

/// z0 (1 + gamma) / (1 - gamma); open when |1 - gamma| < 1e-12.
Impedance z_from_gamma(Complex gamma, const ReferenceImpedance& z0);

}  // namespace cmimp
