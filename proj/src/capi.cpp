#include "cmimp/cmimp.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "cmimp/error.hpp"
#include "cmimp/sweep_io.hpp"
#include "text_util.hpp"

struct cmimp_grid {
    cmimp::FrequencyGrid value;
};
struct cmimp_sweep {
    cmimp::ComplexSweep value;
};
struct cmimp_calibration {
    cmimp::KCalibration value;
};
struct cmimp_impedance {
    cmimp::ImpedanceSweep value;
};
struct cmimp_model {
    cmimp::CircuitModel value;
};
struct cmimp_report {
    cmimp::ComparisonReport value;
};

namespace {

thread_local std::string g_last_error;

cmimp_status status_of(cmimp::ErrorCode code) {
    switch (code) {
    case cmimp::ErrorCode::invalid_argument: return CMIMP_E_INVALID_ARGUMENT;
    case cmimp::ErrorCode::grid_mismatch: return CMIMP_E_GRID_MISMATCH;
    case cmimp::ErrorCode::role_mismatch: return CMIMP_E_ROLE_MISMATCH;
    case cmimp::ErrorCode::span: return CMIMP_E_SPAN;
    case cmimp::ErrorCode::parse: return CMIMP_E_PARSE;
    case cmimp::ErrorCode::io: return CMIMP_E_IO;
    }
    return CMIMP_E_INTERNAL;
}

// Runs `body`, translating exceptions into a status and g_last_error.
template <class F>
cmimp_status guarded(F&& body) noexcept {
    try {
        g_last_error.clear();
        body();
        return CMIMP_OK;
    } catch (const cmimp::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown failure";
    }
    return CMIMP_E_INTERNAL;
}

void require(bool ok, const char* what) {
    if (!ok) throw cmimp::Error(cmimp::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void fill(cmimp_kpoint* out, const cmimp::KCalibration& cal, std::size_t i) {
    const auto& k = cal[i];
    *out = {cal.grid()[i], k.k1.real(), k.k1.imag(), k.k2.real(), k.k2.imag(), k.k3.real(), k.k3.imag(),
            cal.condition()[i], cal.point_flags()[i]};
}

cmimp::TerminationModel termination_from_spec(const std::string& spec) {
    if (spec.size() > 6 && cmimp::text::upper(spec.substr(0, 6)) == "TABLE:") {
        const std::string path = spec.substr(6);
        auto z = cmimp::parse_impedance_csv(cmimp::read_file(path), path);
        cmimp::termination::Table t;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z.is_singular(i)) continue;
            t.frequency_hz.push_back(z.grid()[i]);
            t.z_ohm.push_back(z[i]);
        }
        return t;
    }
    return cmimp::parse_termination(spec);
}

std::string verdict_word(cmimp::Verdict v) { return cmimp::to_string(v); }

std::string num(double v, const char* fmt = "%.4f") {
    if (std::isnan(v)) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v == 0.0 ? 0.0 : v);
    return buf;
}

}  // namespace

extern "C" {

const char* cmimp_version(void) { return "1.0.0"; }

const char* cmimp_last_error(void) { return g_last_error.c_str(); }

const char* cmimp_status_name(cmimp_status status) {
    switch (status) {
    case CMIMP_OK: return "OK";
    case CMIMP_E_INVALID_ARGUMENT: return "InvalidArgument";
    case CMIMP_E_GRID_MISMATCH: return "GridMismatch";
    case CMIMP_E_ROLE_MISMATCH: return "RoleMismatch";
    case CMIMP_E_SPAN: return "SpanError";
    case CMIMP_E_PARSE: return "ParseError";
    case CMIMP_E_IO: return "IoError";
    case CMIMP_E_INTERNAL: return "InternalError";
    }
    return "Unknown";
}

void cmimp_string_free(char* s) { std::free(s); }

cmimp_status cmimp_write_file(const char* path, const char* data, size_t length) {
    return guarded([&] {
        require(path && (data || length == 0), "null argument");
        cmimp::write_file_atomic(path, std::string_view(data ? data : "", length));
    });
}

// ---- grids ----------------------------------------------------------------

cmimp_status cmimp_grid_log(double start_hz, double stop_hz, size_t count, cmimp_grid** out) {
    return guarded([&] {
        require(out, "null output");
        *out = new cmimp_grid{cmimp::FrequencyGrid::logarithmic(start_hz, stop_hz, count)};
    });
}

cmimp_status cmimp_grid_linear(double start_hz, double stop_hz, size_t count, cmimp_grid** out) {
    return guarded([&] {
        require(out, "null output");
        *out = new cmimp_grid{cmimp::FrequencyGrid::linear(start_hz, stop_hz, count)};
    });
}

cmimp_status cmimp_grid_from_points(const double* hz, size_t count, cmimp_grid** out) {
    return guarded([&] {
        require(out && (hz || count == 0), "null argument");
        *out = new cmimp_grid{cmimp::FrequencyGrid::from_points(std::vector<double>(hz, hz + count))};
    });
}

cmimp_status cmimp_grid_parse(const char* spec, cmimp_grid** out) {
    return guarded([&] {
        require(spec && out, "null argument");
        auto parts = cmimp::text::split(spec, ':');
        if (parts.size() != 3 && parts.size() != 4) {
            throw cmimp::Error(cmimp::ErrorCode::invalid_argument,
                               std::string("grid spec '") + spec + "': expected start:stop:count[:log|lin]");
        }
        auto start = cmimp::text::parse_double(parts[0]);
        auto stop = cmimp::text::parse_double(parts[1]);
        auto count = cmimp::text::parse_double(parts[2]);
        if (!start || !stop || !count || *count < 1 || *count != std::floor(*count)) {
            throw cmimp::Error(cmimp::ErrorCode::invalid_argument,
                               std::string("grid spec '") + spec + "': bad number");
        }
        const std::string kind = parts.size() == 4 ? cmimp::text::upper(parts[3]) : "LOG";
        const auto n = static_cast<std::size_t>(*count);
        if (kind == "LOG") {
            *out = new cmimp_grid{cmimp::FrequencyGrid::logarithmic(*start, *stop, n)};
        } else if (kind == "LIN") {
            *out = new cmimp_grid{cmimp::FrequencyGrid::linear(*start, *stop, n)};
        } else {
            throw cmimp::Error(cmimp::ErrorCode::invalid_argument,
                               std::string("grid spec '") + spec + "': spacing must be log or lin");
        }
    });
}

size_t cmimp_grid_size(const cmimp_grid* grid) { return grid ? grid->value.size() : 0; }

double cmimp_grid_point(const cmimp_grid* grid, size_t index) {
    if (!grid || index >= grid->value.size()) return std::nan("");
    return grid->value[index];
}

void cmimp_grid_free(cmimp_grid* grid) { delete grid; }

cmimp_status cmimp_grid_overlap(const cmimp_grid* reference, const cmimp_grid* const* others, size_t count,
                                cmimp_grid** out) {
    return guarded([&] {
        require(reference && out && (others || count == 0), "null argument");
        double lo = reference->value.front();
        double hi = reference->value.back();
        for (size_t i = 0; i < count; ++i) {
            require(others[i], "null grid");
            lo = std::max(lo, others[i]->value.front());
            hi = std::min(hi, others[i]->value.back());
        }
        if (lo > hi) throw cmimp::Error(cmimp::ErrorCode::span, "grids have no overlapping span");
        *out = new cmimp_grid{cmimp::restrict_grid(reference->value, lo, hi)};
    });
}

// ---- sweeps ---------------------------------------------------------------

cmimp_status cmimp_sweep_create(const cmimp_grid* grid, const double* re, const double* im, cmimp_sweep** out) {
    return guarded([&] {
        require(grid && re && im && out, "null argument");
        std::vector<cmimp::Complex> v(grid->value.size());
        for (size_t i = 0; i < v.size(); ++i) v[i] = {re[i], im[i]};
        *out = new cmimp_sweep{cmimp::ComplexSweep(grid->value, std::move(v), cmimp::SweepRole::reflection)};
    });
}

cmimp_status cmimp_sweep_parse_touchstone(const char* text, size_t length, const char* source_name,
                                          cmimp_sweep** out, double* z0_ohm) {
    return guarded([&] {
        require((text || length == 0) && out, "null argument");
        auto doc = cmimp::parse_touchstone(std::string_view(text ? text : "", length),
                                           source_name ? source_name : "");
        *out = new cmimp_sweep{doc.to_sweep()};
        if (z0_ohm) *z0_ohm = doc.reference_ohm;
    });
}

cmimp_status cmimp_sweep_read_touchstone(const char* path, cmimp_sweep** out, double* z0_ohm) {
    return guarded([&] {
        require(path && out, "null argument");
        auto doc = cmimp::parse_touchstone(cmimp::read_file(path), path);
        *out = new cmimp_sweep{doc.to_sweep()};
        if (z0_ohm) *z0_ohm = doc.reference_ohm;
    });
}

cmimp_status cmimp_sweep_to_touchstone(const cmimp_sweep* sweep, double z0_ohm, cmimp_ts_format format,
                                       cmimp_freq_unit unit, int digits, const char* comment, char** out) {
    return guarded([&] {
        require(sweep && out, "null argument");
        require(format >= CMIMP_TS_RI && format <= CMIMP_TS_DB, "unknown Touchstone format");
        require(unit >= CMIMP_UNIT_HZ && unit <= CMIMP_UNIT_GHZ, "unknown frequency unit");
        cmimp::TouchstoneWriteOptions opt;
        opt.format = static_cast<cmimp::TouchstoneFormat>(format);
        opt.unit = static_cast<cmimp::FrequencyUnit>(unit);
        opt.digits = digits;
        if (comment) {
            for (auto line : cmimp::text::lines(comment)) opt.comments.emplace_back(line);
        }
        *out = dup_string(cmimp::write_touchstone(sweep->value, cmimp::ReferenceImpedance(z0_ohm), opt));
    });
}

size_t cmimp_sweep_size(const cmimp_sweep* sweep) { return sweep ? sweep->value.size() : 0; }

cmimp_status cmimp_sweep_point(const cmimp_sweep* sweep, size_t index, double* frequency_hz, double* re,
                               double* im, uint32_t* flags) {
    return guarded([&] {
        require(sweep && index < sweep->value.size(), "index out of range");
        if (frequency_hz) *frequency_hz = sweep->value.grid()[index];
        if (re) *re = sweep->value[index].real();
        if (im) *im = sweep->value[index].imag();
        if (flags) *flags = sweep->value.point_flags()[index];
    });
}

cmimp_status cmimp_sweep_grid(const cmimp_sweep* sweep, cmimp_grid** out) {
    return guarded([&] {
        require(sweep && out, "null argument");
        *out = new cmimp_grid{sweep->value.grid()};
    });
}

cmimp_status cmimp_sweep_resample(const cmimp_sweep* sweep, const cmimp_grid* target, cmimp_resample_method method,
                                  int allow_extrapolation, cmimp_sweep** out) {
    return guarded([&] {
        require(sweep && target && out, "null argument");
        auto m = method == CMIMP_RESAMPLE_NEAREST ? cmimp::ResampleMethod::nearest
                                                  : cmimp::ResampleMethod::linear_on_log_f;
        *out = new cmimp_sweep{cmimp::resample(sweep->value, target->value, m, allow_extrapolation != 0)};
    });
}

cmimp_status cmimp_sweep_smooth(const cmimp_sweep* sweep, size_t width, cmimp_sweep** out) {
    return guarded([&] {
        require(sweep && out, "null argument");
        *out = new cmimp_sweep{cmimp::moving_average(sweep->value, width)};
    });
}

void cmimp_sweep_free(cmimp_sweep* sweep) { delete sweep; }

// ---- characterization -----------------------------------------------------

cmimp_status cmimp_characterize(const cmimp_sweep* open, const cmimp_sweep* short_circuit, const cmimp_sweep* load,
                                double z_std_ohm, double z0_ohm, double tol_singular, double tol_cond,
                                cmimp_calibration** out) {
    return guarded([&] {
        require(open && short_circuit && load && out, "null argument");
        cmimp::OslSweeps osl(open->value, short_circuit->value, load->value);
        *out = new cmimp_calibration{cmimp::k_from_osl(osl, z_std_ohm, {tol_singular, tol_cond},
                                                       cmimp::ReferenceImpedance(z0_ohm))};
    });
}

cmimp_status cmimp_calibration_read(const char* path, cmimp_calibration** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new cmimp_calibration{cmimp::parse_calibration(cmimp::read_file(path), path)};
    });
}

cmimp_status cmimp_calibration_to_text(const cmimp_calibration* cal, char** out) {
    return guarded([&] {
        require(cal && out, "null argument");
        *out = dup_string(cmimp::write_calibration(cal->value));
    });
}

cmimp_status cmimp_calibration_set_metadata(cmimp_calibration* cal, const char* key, const char* value) {
    return guarded([&] {
        require(cal && key && value, "null argument");
        auto meta = cal->value.metadata();
        meta[key] = value;
        cal->value = cal->value.with_metadata(std::move(meta));
    });
}

size_t cmimp_calibration_size(const cmimp_calibration* cal) { return cal ? cal->value.size() : 0; }

cmimp_status cmimp_calibration_point(const cmimp_calibration* cal, size_t index, cmimp_kpoint* out) {
    return guarded([&] {
        require(cal && out && index < cal->value.size(), "index out of range");
        fill(out, cal->value, index);
    });
}

int cmimp_calibration_is_from_osl(const cmimp_calibration* cal) {
    return cal && cal->value.provenance() == cmimp::Provenance::from_osl ? 1 : 0;
}

cmimp_status cmimp_calibration_grid(const cmimp_calibration* cal, cmimp_grid** out) {
    return guarded([&] {
        require(cal && out, "null argument");
        *out = new cmimp_grid{cal->value.grid()};
    });
}

cmimp_status cmimp_calibration_to_curves_csv(const cmimp_calibration* cal, char** out) {
    return guarded([&] {
        require(cal && out, "null argument");
        using cmimp::text::fixed_digits;
        const auto& c = cal->value;
        std::string s = "frequency_hz,k1_re,k1_im,k1_mag,k2_re,k2_im,k2_mag,k3_re,k3_im,k3_mag,condition,flags\n";
        for (std::size_t i = 0; i < c.size(); ++i) {
            s += fixed_digits(c.grid()[i], 9);
            for (auto k : {c[i].k1, c[i].k2, c[i].k3}) {
                if (c.is_singular(i)) {
                    s += ",,,";
                } else {
                    s += ',' + fixed_digits(k.real(), 9) + ',' + fixed_digits(k.imag(), 9) + ',' +
                         fixed_digits(std::abs(k), 9);
                }
            }
            s += ',' + fixed_digits(c.condition()[i], 9) + ',' + cmimp::flags_to_string(c.point_flags()[i]) + '\n';
        }
        *out = dup_string(s);
    });
}

cmimp_status cmimp_calibration_restrict(const cmimp_calibration* cal, const cmimp_grid* grid,
                                        cmimp_calibration** out) {
    return guarded([&] {
        require(cal && grid && out, "null argument");
        const auto pts = cal->value.grid().points();
        auto first = std::lower_bound(pts.begin(), pts.end(), grid->value.front());
        const auto start = static_cast<std::size_t>(first - pts.begin());
        const std::size_t n = grid->value.size();
        if (start + n > pts.size()) {
            throw cmimp::Error(cmimp::ErrorCode::grid_mismatch, "grid is not a run of calibration points");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (pts[start + i] != grid->value[i]) {
                throw cmimp::Error(cmimp::ErrorCode::grid_mismatch,
                                   "grid point " + std::to_string(i) + " is not a calibration point");
            }
        }
        *out = new cmimp_calibration{cal->value.slice(start, n)};
    });
}

void cmimp_calibration_free(cmimp_calibration* cal) { delete cal; }

// ---- extraction -----------------------------------------------------------

cmimp_status cmimp_extract(const cmimp_sweep* gamma, const cmimp_calibration* cal, cmimp_impedance** out) {
    return guarded([&] {
        require(gamma && cal && out, "null argument");
        *out = new cmimp_impedance{cmimp::extract_impedance(gamma->value, cal->value)};
    });
}

cmimp_status cmimp_sensitivity(const cmimp_sweep* gamma, const cmimp_calibration* cal, double* values) {
    return guarded([&] {
        require(gamma && cal && values, "null argument");
        auto s = cmimp::sensitivity(cal->value, gamma->value);
        std::copy(s.values.begin(), s.values.end(), values);
    });
}

cmimp_status cmimp_impedance_read_csv(const char* path, cmimp_impedance** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new cmimp_impedance{cmimp::parse_impedance_csv(cmimp::read_file(path), path)};
    });
}

cmimp_status cmimp_impedance_to_csv(const cmimp_impedance* z, char** out) {
    return guarded([&] {
        require(z && out, "null argument");
        *out = dup_string(cmimp::write_impedance_csv(z->value));
    });
}

size_t cmimp_impedance_size(const cmimp_impedance* z) { return z ? z->value.size() : 0; }

cmimp_status cmimp_impedance_point(const cmimp_impedance* z, size_t index, cmimp_zpoint* out) {
    return guarded([&] {
        require(z && out && index < z->value.size(), "index out of range");
        const auto& s = z->value;
        *out = {s.grid()[index], s[index].real(), s[index].imag(), s.magnitude_ohm(index), s.phase_deg(index),
                s.point_flags()[index]};
    });
}

size_t cmimp_impedance_count_flagged(const cmimp_impedance* z, uint32_t mask) {
    return z ? z->value.count_flagged(static_cast<cmimp::PointFlags>(mask)) : 0;
}

void cmimp_impedance_free(cmimp_impedance* z) { delete z; }

// ---- comparison -----------------------------------------------------------

cmimp_status cmimp_compare(const cmimp_impedance* const* runs, const char* const* labels, size_t run_count,
                           const double* band_lo_hz, const double* band_hi_hz, size_t band_count,
                           double threshold_db, cmimp_report** out) {
    return guarded([&] {
        require(out && (runs || run_count == 0), "null argument");
        require(band_count == 0 || (band_lo_hz && band_hi_hz), "null band arrays");
        std::vector<cmimp::LabeledRun> r;
        for (size_t i = 0; i < run_count; ++i) {
            require(runs[i], "null run");
            std::string label = labels && labels[i] ? labels[i] : "run" + std::to_string(i + 1);
            r.push_back({std::move(label), runs[i]->value});
        }
        std::vector<cmimp::Band> bands;
        for (size_t b = 0; b < band_count; ++b) bands.push_back({band_lo_hz[b], band_hi_hz[b]});
        *out = new cmimp_report{cmimp::compare_sweeps(r, std::move(bands), threshold_db)};
    });
}

int cmimp_report_all_consistent(const cmimp_report* report) {
    return report && report->value.all_consistent() ? 1 : 0;
}

size_t cmimp_report_stats_count(const cmimp_report* report) { return report ? report->value.stats.size() : 0; }

cmimp_status cmimp_report_stats(const cmimp_report* report, size_t index, cmimp_pair_stats* out) {
    return guarded([&] {
        require(report && out && index < report->value.stats.size(), "index out of range");
        const auto& s = report->value.stats[index];
        int verdict = s.verdict == cmimp::Verdict::consistent ? 1 : s.verdict == cmimp::Verdict::inconsistent ? 0 : -1;
        *out = {s.band, s.run_a, s.run_b, s.points, s.max_db, s.mean_db, s.max_phase_deg, verdict};
    });
}

cmimp_status cmimp_report_to_text(const cmimp_report* report, const char* title, char** out) {
    return guarded([&] {
        require(report && out, "null argument");
        const auto& r = report->value;
        std::string s = "== ";
        s += title ? title : "comparison";
        s += " ==\n";
        s += "runs: ";
        for (std::size_t i = 0; i < r.labels.size(); ++i) s += (i ? ", " : "") + r.labels[i];
        s += "\nthreshold: " + num(r.threshold_db) + " dB\n";
        s += "common grid: " + std::to_string(r.common_grid.size()) + " points, " +
             cmimp::text::fixed_digits(r.common_grid.front(), 9) + " .. " +
             cmimp::text::fixed_digits(r.common_grid.back(), 9) + " Hz\n";
        for (std::size_t b = 0; b < r.bands.size(); ++b) {
            s += "band " + cmimp::text::fixed_digits(r.bands[b].lo_hz, 9) + " .. " +
                 cmimp::text::fixed_digits(r.bands[b].hi_hz, 9) + " Hz: " + verdict_word(r.band_verdict(b)) + "\n";
            for (const auto& st : r.stats) {
                if (st.band != b) continue;
                char line[512];
                std::snprintf(line, sizeof line, "  %-20s vs %-20s points %4zu  max %10s dB  mean %10s dB  phase %10s deg  %s\n",
                              r.labels[st.run_a].c_str(), r.labels[st.run_b].c_str(), st.points,
                              num(st.max_db).c_str(), num(st.mean_db).c_str(), num(st.max_phase_deg).c_str(),
                              verdict_word(st.verdict).c_str());
                s += line;
            }
        }
        *out = dup_string(s);
    });
}

cmimp_status cmimp_report_to_csv(const cmimp_report* report, const char* group, int with_header, char** out) {
    return guarded([&] {
        require(report && out, "null argument");
        const auto& r = report->value;
        std::string s;
        if (with_header) s = "group,band_lo_hz,band_hi_hz,run_a,run_b,points,max_db,mean_db,max_phase_deg,verdict\n";
        using cmimp::text::fixed_digits;
        for (const auto& st : r.stats) {
            s += std::string(group ? group : "") + ',' + fixed_digits(r.bands[st.band].lo_hz, 9) + ',' +
                 fixed_digits(r.bands[st.band].hi_hz, 9) + ',' + r.labels[st.run_a] + ',' + r.labels[st.run_b] + ',' +
                 std::to_string(st.points) + ',' + (std::isnan(st.max_db) ? "" : fixed_digits(st.max_db, 9)) + ',' +
                 (std::isnan(st.mean_db) ? "" : fixed_digits(st.mean_db, 9)) + ',' +
                 (std::isnan(st.max_phase_deg) ? "" : fixed_digits(st.max_phase_deg, 9)) + ',' +
                 verdict_word(st.verdict) + '\n';
        }
        *out = dup_string(s);
    });
}

void cmimp_report_free(cmimp_report* report) { delete report; }

cmimp_status cmimp_overlay_csv(const cmimp_impedance* const* runs, const char* const* labels, size_t run_count,
                               char** out) {
    return guarded([&] {
        require(out && (runs || run_count == 0), "null argument");
        using cmimp::text::fixed_digits;
        std::string s = "label,frequency_hz,mag_dbohm,phase_deg,flags\n";
        for (size_t r = 0; r < run_count; ++r) {
            require(runs[r], "null run");
            const auto& z = runs[r]->value;
            const std::string label = labels && labels[r] ? labels[r] : "run" + std::to_string(r + 1);
            for (std::size_t i = 0; i < z.size(); ++i) {
                s += label + ',' + fixed_digits(z.grid()[i], 9) + ',';
                if (!z.is_singular(i)) {
                    s += fixed_digits(20.0 * std::log10(z.magnitude_ohm(i)), 9) + ',' + fixed_digits(z.phase_deg(i), 9);
                } else {
                    s += ',';
                }
                s += ',' + cmimp::flags_to_string(z.point_flags()[i]) + '\n';
            }
        }
        *out = dup_string(s);
    });
}

// ---- model ----------------------------------------------------------------

cmimp_status cmimp_model_read(const char* path, cmimp_model** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new cmimp_model{cmimp::parse_model(cmimp::read_file(path), path)};
    });
}

cmimp_status cmimp_model_parse(const char* text, size_t length, cmimp_model** out) {
    return guarded([&] {
        require((text || length == 0) && out, "null argument");
        *out = new cmimp_model{cmimp::parse_model(std::string_view(text ? text : "", length))};
    });
}

cmimp_status cmimp_model_to_text(const cmimp_model* model, char** out) {
    return guarded([&] {
        require(model && out, "null argument");
        *out = dup_string(cmimp::write_model(model->value));
    });
}

double cmimp_model_z0(const cmimp_model* model) { return model ? model->value.z0.ohms() : std::nan(""); }

cmimp_status cmimp_model_set_z0(cmimp_model* model, double z0_ohm) {
    return guarded([&] {
        require(model, "null argument");
        model->value.z0 = cmimp::ReferenceImpedance(z0_ohm);
    });
}

cmimp_status cmimp_model_set_noise(cmimp_model* model, double relative_amplitude, uint64_t seed) {
    return guarded([&] {
        require(model, "null argument");
        cmimp::NoiseModel n = model->value.noise.value_or(cmimp::NoiseModel{});
        if (relative_amplitude >= 0.0) n.relative_amplitude = relative_amplitude;
        require(std::isfinite(n.relative_amplitude), "noise amplitude must be finite");
        n.seed = seed;
        model->value.noise = n;
    });
}

cmimp_status cmimp_simulate_gamma(const cmimp_model* model, const char* termination, const cmimp_grid* grid,
                                  cmimp_sweep** out) {
    return guarded([&] {
        require(model && termination && grid && out, "null argument");
        *out = new cmimp_sweep{cmimp::simulate_gamma(model->value, termination_from_spec(termination), grid->value)};
    });
}

cmimp_status cmimp_simulate_osl(const cmimp_model* model, double z_std_ohm, const cmimp_grid* grid, int with_noise,
                                cmimp_sweep** open, cmimp_sweep** short_circuit, cmimp_sweep** load) {
    return guarded([&] {
        require(model && grid && open && short_circuit && load, "null argument");
        auto osl = cmimp::simulate_osl(model->value, z_std_ohm, grid->value, with_noise != 0);
        auto o = std::make_unique<cmimp_sweep>(cmimp_sweep{osl.open()});
        auto s = std::make_unique<cmimp_sweep>(cmimp_sweep{osl.short_circuit()});
        auto l = std::make_unique<cmimp_sweep>(cmimp_sweep{osl.load()});
        *open = o.release();
        *short_circuit = s.release();
        *load = l.release();
    });
}

cmimp_status cmimp_model_calibration(const cmimp_model* model, const cmimp_grid* grid, cmimp_calibration** out) {
    return guarded([&] {
        require(model && grid && out, "null argument");
        *out = new cmimp_calibration{
            cmimp::k_from_abcd(cmimp::network_abcd(model->value, grid->value), model->value.z0)};
    });
}

void cmimp_model_free(cmimp_model* model) { delete model; }

}  // extern "C"
