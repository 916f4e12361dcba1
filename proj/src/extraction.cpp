#include "cmimp/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cmimp/error.hpp"

namespace cmimp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPoleTolerance = 1e-12;
constexpr PointFlags kCarried = flags::singular | flags::ill_conditioned | flags::extrapolated;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b, const char* what) {
    if (auto idx = a.first_mismatch(b)) {
        throw Error(ErrorCode::grid_mismatch,
                    std::string(what) + ": grids differ at index " + std::to_string(*idx) +
                        " (resample first)");
    }
}

// Shared per-point preamble of extraction and sensitivity. Returns the
// flags; singular means the caller must not evaluate the map.
PointFlags pole_check(const ComplexSweep& gamma_m, const KCalibration& cal, std::size_t i) {
    PointFlags f = (cal.point_flags()[i] & kCarried) | (gamma_m.point_flags()[i] & kCarried);
    if (f & flags::singular) return flags::singular;
    if (std::abs(gamma_m[i] + cal[i].k3) < kPoleTolerance) return flags::singular;
    return f;
}

struct Resampled {
    std::vector<Complex> values;
    std::vector<PointFlags> point_flags;
};

Resampled resample_values(const FrequencyGrid& source, std::span<const Complex> values,
                          std::span<const PointFlags> source_flags, const FrequencyGrid& target,
                          ResampleMethod method, bool allow_extrapolation) {
    const auto src = source.points();
    const std::size_t n = src.size();
    Resampled out;
    out.values.resize(target.size());
    out.point_flags.assign(target.size(), flags::none);

    auto point = [&](std::size_t j) {
        return std::pair{values[j], static_cast<PointFlags>(source_flags[j] & kCarried)};
    };

    for (std::size_t t = 0; t < target.size(); ++t) {
        const double f = target[t];
        const bool outside = f < src.front() || f > src.back();
        if (outside && !allow_extrapolation) {
            throw Error(ErrorCode::span, "resample: target frequency " + std::to_string(f) +
                                             " Hz lies outside the source span and extrapolation is disabled");
        }
        auto upper = std::upper_bound(src.begin(), src.end(), f);
        std::size_t hi = static_cast<std::size_t>(upper - src.begin());
        Complex v;
        PointFlags pf;
        if (hi > 0 && src[hi - 1] == f) {
            std::tie(v, pf) = point(hi - 1);
        } else if (n == 1) {
            std::tie(v, pf) = point(0);
        } else {
            std::size_t j0 = hi == 0 ? 0 : std::min(hi - 1, n - 2);
            std::size_t j1 = j0 + 1;
            const double x = std::log(f);
            const double x0 = std::log(src[j0]);
            const double x1 = std::log(src[j1]);
            if (method == ResampleMethod::nearest) {
                std::size_t j = (x - x0) <= (x1 - x) ? j0 : j1;
                if (outside) j = f < src.front() ? 0 : n - 1;
                std::tie(v, pf) = point(j);
            } else {
                auto [v0, f0] = point(j0);
                auto [v1, f1] = point(j1);
                const double w = (x - x0) / (x1 - x0);
                pf = f0 | f1;
                v = (pf & flags::singular) ? Complex(kNaN, kNaN) : v0 + w * (v1 - v0);
            }
        }
        if (outside) pf |= flags::extrapolated;
        out.values[t] = (pf & flags::singular) ? Complex(kNaN, kNaN) : v;
        out.point_flags[t] = pf;
    }
    return out;
}

double wrapped_phase_difference(double a_deg, double b_deg) {
    double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

}  // namespace

ImpedanceSweep::ImpedanceSweep(FrequencyGrid grid, std::vector<Complex> z,
                               std::vector<PointFlags> point_flags)
    : m_grid(std::move(grid)), m_z(std::move(z)), m_flags(std::move(point_flags)) {
    if (m_flags.empty()) m_flags.assign(m_z.size(), flags::none);
    if (m_z.size() != m_grid.size() || m_flags.size() != m_grid.size()) {
        throw Error(ErrorCode::invalid_argument, "impedance sweep arrays do not match the grid length");
    }
    for (std::size_t i = 0; i < m_z.size(); ++i) {
        if (m_flags[i] & flags::singular) {
            m_z[i] = Complex(kNaN, kNaN);
            m_flags[i] &= static_cast<PointFlags>(~flags::negative_resistance);
            continue;
        }
        if (!finite(m_z[i])) {
            throw Error(ErrorCode::invalid_argument,
                        "impedance at unflagged index " + std::to_string(i) + " is not finite");
        }
        if (m_z[i].real() < 0.0) {
            m_flags[i] |= flags::negative_resistance;
        } else {
            m_flags[i] &= static_cast<PointFlags>(~flags::negative_resistance);
        }
    }
}

double ImpedanceSweep::phase_deg(std::size_t i) const {
    return std::arg(m_z[i]) * 180.0 / std::numbers::pi;
}

std::size_t ImpedanceSweep::count_flagged(PointFlags which) const {
    return static_cast<std::size_t>(
        std::count_if(m_flags.begin(), m_flags.end(), [which](PointFlags f) { return (f & which) != 0; }));
}

ComplexSweep ImpedanceSweep::as_complex_sweep() const {
    return ComplexSweep(m_grid, m_z, SweepRole::impedance_ohm, m_flags);
}

ImpedanceSweep extract_impedance(const ComplexSweep& gamma_m, const KCalibration& cal) {
    if (gamma_m.role() != SweepRole::reflection) {
        throw Error(ErrorCode::role_mismatch, std::string("extract: expected a reflection sweep, got ") +
                                                  to_string(gamma_m.role()));
    }
    require_same_grid(gamma_m.grid(), cal.grid(), "extract");
    const std::size_t n = gamma_m.size();
    std::vector<Complex> z(n, Complex(kNaN, kNaN));
    std::vector<PointFlags> pf(n);
    for (std::size_t i = 0; i < n; ++i) {
        pf[i] = pole_check(gamma_m, cal, i);
        if (pf[i] & flags::singular) continue;
        const auto& k = cal[i];
        const Complex g = gamma_m[i];
        z[i] = (k.k1 * g + k.k2) / (g + k.k3);
        if (!finite(z[i])) pf[i] = flags::singular;
    }
    return ImpedanceSweep(gamma_m.grid(), std::move(z), std::move(pf));
}

RealSweep sensitivity(const KCalibration& cal, const ComplexSweep& gamma_m) {
    if (gamma_m.role() != SweepRole::reflection) {
        throw Error(ErrorCode::role_mismatch, "sensitivity: expected a reflection sweep");
    }
    require_same_grid(gamma_m.grid(), cal.grid(), "sensitivity");
    const std::size_t n = gamma_m.size();
    RealSweep out{gamma_m.grid(), std::vector<double>(n, kNaN), std::vector<PointFlags>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.point_flags[i] = pole_check(gamma_m, cal, i);
        if (out.point_flags[i] & flags::singular) continue;
        const auto& k = cal[i];
        out.values[i] = std::abs(k.k1 * k.k3 - k.k2) / std::norm(gamma_m[i] + k.k3);
    }
    return out;
}

ComplexSweep resample(const ComplexSweep& sweep, const FrequencyGrid& target, ResampleMethod method,
                      bool allow_extrapolation) {
    auto r = resample_values(sweep.grid(), sweep.values(), sweep.point_flags(), target, method,
                             allow_extrapolation);
    return ComplexSweep(target, std::move(r.values), sweep.role(), std::move(r.point_flags));
}

ImpedanceSweep resample(const ImpedanceSweep& sweep, const FrequencyGrid& target, ResampleMethod method,
                        bool allow_extrapolation) {
    auto r = resample_values(sweep.grid(), sweep.z(), sweep.point_flags(), target, method,
                             allow_extrapolation);
    return ImpedanceSweep(target, std::move(r.values), std::move(r.point_flags));
}

FrequencyGrid restrict_grid(const FrequencyGrid& grid, double lo_hz, double hi_hz) {
    std::vector<double> pts;
    for (double f : grid.points()) {
        if (f >= lo_hz && f <= hi_hz) pts.push_back(f);
    }
    if (pts.empty()) {
        throw Error(ErrorCode::span, "no grid points inside [" + std::to_string(lo_hz) + ", " +
                                         std::to_string(hi_hz) + "] Hz");
    }
    return FrequencyGrid::from_points(std::move(pts));
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::consistent: return "CONSISTENT";
    case Verdict::inconsistent: return "INCONSISTENT";
    case Verdict::no_data: return "NO_DATA";
    }
    return "?";
}

bool ComparisonReport::all_consistent() const {
    return std::none_of(stats.begin(), stats.end(),
                        [](const PairBandStats& s) { return s.verdict == Verdict::inconsistent; });
}

Verdict ComparisonReport::band_verdict(std::size_t band) const {
    Verdict v = Verdict::no_data;
    for (const auto& s : stats) {
        if (s.band != band) continue;
        if (s.verdict == Verdict::inconsistent) return Verdict::inconsistent;
        if (s.verdict == Verdict::consistent) v = Verdict::consistent;
    }
    return v;
}

ComparisonReport compare_sweeps(std::span<const LabeledRun> runs, std::vector<Band> bands,
                                double threshold_db) {
    if (runs.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "compare: at least two runs are required");
    }
    if (!(threshold_db >= 0.0) || !std::isfinite(threshold_db)) {
        throw Error(ErrorCode::invalid_argument, "compare: threshold must be finite and >= 0");
    }
    double lo = runs[0].sweep.grid().front();
    double hi = runs[0].sweep.grid().back();
    for (const auto& r : runs) {
        lo = std::max(lo, r.sweep.grid().front());
        hi = std::min(hi, r.sweep.grid().back());
    }
    if (lo > hi) throw Error(ErrorCode::span, "compare: runs have no overlapping frequency span");

    // Coarsest = fewest points inside the common span.
    std::optional<FrequencyGrid> common;
    for (const auto& r : runs) {
        FrequencyGrid g = restrict_grid(r.sweep.grid(), lo, hi);
        if (!common || g.size() < common->size()) common = std::move(g);
    }

    if (bands.empty()) bands.push_back({lo, hi});
    for (std::size_t b = 0; b < bands.size(); ++b) {
        const auto& band = bands[b];
        if (!(band.lo_hz < band.hi_hz)) {
            throw Error(ErrorCode::invalid_argument, "compare: band " + std::to_string(b) + " is empty");
        }
        if (band.lo_hz < lo || band.hi_hz > hi) {
            throw Error(ErrorCode::span, "compare: band " + std::to_string(b) +
                                             " extends beyond the common span of the runs");
        }
        if (b > 0 && band.lo_hz < bands[b - 1].hi_hz) {
            throw Error(ErrorCode::invalid_argument, "compare: bands overlap or are not ascending");
        }
    }

    std::vector<ImpedanceSweep> aligned;
    aligned.reserve(runs.size());
    for (const auto& r : runs) {
        aligned.push_back(resample(r.sweep, *common, ResampleMethod::linear_on_log_f));
    }

    ComparisonReport report{{}, bands, *common, threshold_db, {}};
    for (const auto& r : runs) report.labels.push_back(r.label);

    const auto f = common->points();
    for (std::size_t b = 0; b < bands.size(); ++b) {
        for (std::size_t i = 0; i < aligned.size(); ++i) {
            for (std::size_t j = i + 1; j < aligned.size(); ++j) {
                PairBandStats s{b, i, j, 0, 0.0, 0.0, 0.0, Verdict::no_data};
                double sum = 0.0;
                for (std::size_t p = 0; p < f.size(); ++p) {
                    if (f[p] < bands[b].lo_hz || f[p] > bands[b].hi_hz) continue;
                    if (aligned[i].is_singular(p) || aligned[j].is_singular(p)) continue;
                    const double db = std::abs(20.0 * (std::log10(aligned[i].magnitude_ohm(p)) -
                                                       std::log10(aligned[j].magnitude_ohm(p))));
                    const double ph = wrapped_phase_difference(aligned[i].phase_deg(p), aligned[j].phase_deg(p));
                    s.max_db = std::max(s.max_db, db);
                    s.max_phase_deg = std::max(s.max_phase_deg, ph);
                    sum += db;
                    ++s.points;
                }
                if (s.points > 0) {
                    s.mean_db = sum / static_cast<double>(s.points);
                    s.verdict = s.max_db <= threshold_db ? Verdict::consistent : Verdict::inconsistent;
                } else {
                    s.max_db = s.mean_db = s.max_phase_deg = kNaN;
                }
                report.stats.push_back(s);
            }
        }
    }
    return report;
}

}  // namespace cmimp
