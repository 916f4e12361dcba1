#include "cmimp/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmimp/error.hpp"

namespace cmimp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const KTriple kNotAValue{{kNaN, kNaN}, {kNaN, kNaN}, {kNaN, kNaN}};

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

const char* to_string(Provenance p) noexcept {
    return p == Provenance::from_abcd ? "from_abcd" : "from_osl";
}

Provenance provenance_from_string(std::string_view text) {
    if (text == "from_abcd") return Provenance::from_abcd;
    if (text == "from_osl") return Provenance::from_osl;
    throw Error(ErrorCode::invalid_argument, "unknown provenance '" + std::string(text) + "'");
}

KCalibration::KCalibration(FrequencyGrid grid, std::vector<KTriple> k, ReferenceImpedance z0,
                           double z_std, std::vector<double> condition,
                           std::vector<PointFlags> point_flags, Provenance provenance,
                           std::map<std::string, std::string> metadata)
    : m_grid(std::move(grid)),
      m_k(std::move(k)),
      m_z0(z0),
      m_z_std(z_std),
      m_condition(std::move(condition)),
      m_flags(std::move(point_flags)),
      m_provenance(provenance),
      m_metadata(std::move(metadata)) {
    const std::size_t n = m_grid.size();
    if (m_k.size() != n || m_condition.size() != n || m_flags.size() != n) {
        throw Error(ErrorCode::invalid_argument, "calibration arrays do not match the grid length");
    }
    if (!std::isfinite(m_z_std) || m_z_std <= 0.0) {
        throw Error(ErrorCode::invalid_argument, "load standard value must be finite and > 0");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(m_condition[i] >= 0.0)) {
            throw Error(ErrorCode::invalid_argument,
                        "condition metric at index " + std::to_string(i) + " is negative or NaN");
        }
        if (m_flags[i] & flags::singular) {
            m_k[i] = kNotAValue;
        } else if (!finite(m_k[i].k1) || !finite(m_k[i].k2) || !finite(m_k[i].k3)) {
            throw Error(ErrorCode::invalid_argument,
                        "k coefficients at unflagged index " + std::to_string(i) + " are not finite");
        }
    }
}

std::size_t KCalibration::count_flagged(PointFlags which) const {
    std::size_t n = 0;
    for (auto f : m_flags) {
        if (f & which) ++n;
    }
    return n;
}

KCalibration KCalibration::with_metadata(std::map<std::string, std::string> metadata) const {
    KCalibration out = *this;
    out.m_metadata = std::move(metadata);
    return out;
}

KCalibration KCalibration::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > size()) {
        throw Error(ErrorCode::invalid_argument, "calibration slice out of range");
    }
    auto pts = m_grid.points().subspan(first, count);
    auto sub = [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        return V(v.begin() + static_cast<std::ptrdiff_t>(first),
                 v.begin() + static_cast<std::ptrdiff_t>(first + count));
    };
    return KCalibration(FrequencyGrid::from_points({pts.begin(), pts.end()}), sub(m_k), m_z0, m_z_std,
                        sub(m_condition), sub(m_flags), m_provenance, m_metadata);
}

OslSweeps::OslSweeps(ComplexSweep gamma_open, ComplexSweep gamma_short, ComplexSweep gamma_load)
    : m_open(std::move(gamma_open)), m_short(std::move(gamma_short)), m_load(std::move(gamma_load)) {
    for (const auto* s : {&m_open, &m_short, &m_load}) {
        if (s->role() != SweepRole::reflection) {
            throw Error(ErrorCode::role_mismatch, "standards must be reflection sweeps");
        }
    }
    if (auto idx = m_open.grid().first_mismatch(m_short.grid())) {
        throw Error(ErrorCode::grid_mismatch,
                    "open and short grids differ at index " + std::to_string(*idx));
    }
    if (auto idx = m_open.grid().first_mismatch(m_load.grid())) {
        throw Error(ErrorCode::grid_mismatch,
                    "open and load grids differ at index " + std::to_string(*idx));
    }
}

KCalibration k_from_abcd(const AbcdSweep& network, const ReferenceImpedance& z0) {
    const double r = z0.ohms();
    const std::size_t n = network.size();
    std::vector<KTriple> k(n);
    std::vector<double> condition(n);
    std::vector<PointFlags> pf(n, flags::none);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = network[i];
        Complex den = r * m.c + m.a;
        condition[i] = std::abs(den);
        if (condition[i] < 1e-300) {
            pf[i] = flags::singular;
            continue;
        }
        k[i] = {-(r * m.d + m.b) / den, -(r * m.d - m.b) / den, (r * m.c - m.a) / den};
    }
    return KCalibration(network.grid(), std::move(k), z0, z0.ohms(), std::move(condition),
                        std::move(pf), Provenance::from_abcd);
}

KCalibration k_from_osl(const OslSweeps& osl, double z_std, const OslThresholds& thresholds,
                        const ReferenceImpedance& z0) {
    if (!std::isfinite(z_std) || z_std <= 0.0) {
        throw Error(ErrorCode::invalid_argument, "load standard value must be finite and > 0");
    }
    if (!(thresholds.tol_singular > 0.0) || !(thresholds.tol_cond > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "conditioning thresholds must be positive");
    }
    const std::size_t n = osl.grid().size();
    std::vector<KTriple> k(n);
    std::vector<double> condition = conditioning_metric(osl);
    std::vector<PointFlags> pf(n, flags::none);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex go = osl.open()[i];
        const Complex gs = osl.short_circuit()[i];
        const Complex gl = osl.load()[i];
        const PointFlags input_flags =
            osl.open().point_flags()[i] | osl.short_circuit().point_flags()[i] | osl.load().point_flags()[i];
        if ((input_flags & flags::singular) || condition[i] < thresholds.tol_singular) {
            pf[i] = flags::singular;
            if (!std::isfinite(condition[i])) condition[i] = 0.0;
            continue;
        }
        if (condition[i] < thresholds.tol_cond) pf[i] |= flags::ill_conditioned;
        pf[i] |= input_flags & flags::extrapolated;
        const Complex den = gl - gs;
        k[i] = {z_std * (gl - go) / den, z_std * gs * (go - gl) / den, -go};
    }
    return KCalibration(osl.grid(), std::move(k), z0, z_std, std::move(condition), std::move(pf),
                        Provenance::from_osl);
}

std::vector<double> conditioning_metric(const OslSweeps& osl) {
    std::vector<double> out(osl.grid().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::abs(osl.load()[i] - osl.short_circuit()[i]);
    }
    return out;
}

std::vector<double> conditioning_metric(const AbcdSweep& network, const ReferenceImpedance& z0) {
    std::vector<double> out(network.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::abs(z0.ohms() * network[i].c + network[i].a);
    }
    return out;
}

ComplexSweep moving_average(const ComplexSweep& sweep, std::size_t width) {
    if (width == 0 || width % 2 == 0) {
        throw Error(ErrorCode::invalid_argument, "moving-average width must be odd and >= 1");
    }
    const std::size_t n = sweep.size();
    const std::size_t half = width / 2;
    std::vector<Complex> out(n);
    std::vector<PointFlags> pf(sweep.point_flags().begin(), sweep.point_flags().end());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t h = std::min({half, i, n - 1 - i});
        Complex sum{0.0, 0.0};
        PointFlags merged = flags::none;
        for (std::size_t j = i - h; j <= i + h; ++j) {
            sum += sweep[j];
            merged |= sweep.point_flags()[j] & flags::singular;
        }
        out[i] = sum / static_cast<double>(2 * h + 1);
        pf[i] |= merged;
    }
    return ComplexSweep(sweep.grid(), std::move(out), sweep.role(), std::move(pf));
}

}  // namespace cmimp
