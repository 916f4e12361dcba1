#pragma once

#include <string>
#include <vector>

#include "cmimp/characterization.hpp"
#include "cmimp/network.hpp"

namespace cmimp {

/// Extracted impedance per grid point. SINGULAR points hold NaN.
class ImpedanceSweep {
public:
    ImpedanceSweep(FrequencyGrid grid, std::vector<Complex> z, std::vector<PointFlags> point_flags);

    const FrequencyGrid& grid() const noexcept { return m_grid; }
    std::span<const Complex> z() const noexcept { return m_z; }
    Complex operator[](std::size_t i) const { return m_z[i]; }
    std::span<const PointFlags> point_flags() const noexcept { return m_flags; }
    std::size_t size() const noexcept { return m_z.size(); }

    bool is_singular(std::size_t i) const { return (m_flags[i] & flags::singular) != 0; }
    double magnitude_ohm(std::size_t i) const { return std::abs(m_z[i]); }
    double phase_deg(std::size_t i) const;
    std::size_t count_flagged(PointFlags which) const;

    ComplexSweep as_complex_sweep() const;

private:
    FrequencyGrid m_grid;
    std::vector<Complex> m_z;
    std::vector<PointFlags> m_flags;
};

/// Applies the bilinear map point by point. Calibration SINGULAR bins and
/// bins where |gamma + k3| < 1e-12 come out SINGULAR; ILL_CONDITIONED and
/// EXTRAPOLATED flags propagate. Grids must match exactly.
ImpedanceSweep extract_impedance(const ComplexSweep& gamma_m, const KCalibration& cal);

struct RealSweep {
    FrequencyGrid grid;
    std::vector<double> values;  // NaN at SINGULAR points
    std::vector<PointFlags> point_flags;
};

/// |dZ/dgamma| = |k1 k3 - k2| / |gamma + k3|^2, ohms per unit reflection.
RealSweep sensitivity(const KCalibration& cal, const ComplexSweep& gamma_m);

enum class ResampleMethod { linear_on_log_f, nearest };

/// Interpolates real and imaginary parts independently against ln(f).
/// Target points outside the source span throw SpanError unless
/// allow_extrapolation is set, in which case they are extrapolated from
/// the end segment and flagged EXTRAPOLATED. A target point whose
/// bracketing source points include a SINGULAR one becomes SINGULAR.
ComplexSweep resample(const ComplexSweep& sweep, const FrequencyGrid& target, ResampleMethod method,
                      bool allow_extrapolation = false);
ImpedanceSweep resample(const ImpedanceSweep& sweep, const FrequencyGrid& target,
                        ResampleMethod method, bool allow_extrapolation = false);

/// Points of `grid` inside [lo_hz, hi_hz]. SpanError when none are.
FrequencyGrid restrict_grid(const FrequencyGrid& grid, double lo_hz, double hi_hz);

struct Band {
    double lo_hz;
    double hi_hz;
};

struct LabeledRun {
    std::string label;
    ImpedanceSweep sweep;
};

enum class Verdict { consistent, inconsistent, no_data };

const char* to_string(Verdict v) noexcept;

struct PairBandStats {
    std::size_t band;
    std::size_t run_a;
    std::size_t run_b;
    std::size_t points;      // bins used (both runs non-singular)
    double max_db;           // max |20 log10(|Za| / |Zb|)|
    double mean_db;
    double max_phase_deg;    // max |phase_a - phase_b|, wrapped into [0, 180]
    Verdict verdict;
};

struct ComparisonReport {
    std::vector<std::string> labels;
    std::vector<Band> bands;
    FrequencyGrid common_grid;
    double threshold_db;
    std::vector<PairBandStats> stats;  // ordered by band, then (a, b) with a < b

    bool all_consistent() const;
    // Worst verdict over all pairs of one band.
    Verdict band_verdict(std::size_t band) const;
};

/// Pairwise banded comparison of extracted impedance runs. Runs are
/// resampled onto the coarsest grid restricted to the common span. An
/// empty band list means one band covering the common span.
ComparisonReport compare_sweeps(std::span<const LabeledRun> runs, std::vector<Band> bands,
                                double threshold_db = 3.0);

}  // namespace cmimp
