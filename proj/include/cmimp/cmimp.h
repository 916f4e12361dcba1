/*
 * C interface to the cmimp library: in-circuit common-mode impedance
 * extraction with a single inductive probe.
 *
 * All objects are opaque handles created by cmimp_* functions and released
 * with the matching *_free. Every fallible call returns a cmimp_status;
 * on failure cmimp_last_error() describes the problem (per thread).
 * Strings returned through char** are heap-allocated and must be released
 * with cmimp_string_free.
 */
#ifndef CMIMP_H
#define CMIMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CMIMP_BUILDING)
#    define CMIMP_API __declspec(dllexport)
#  else
#    define CMIMP_API __declspec(dllimport)
#  endif
#else
#  define CMIMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmimp_status {
    CMIMP_OK = 0,
    CMIMP_E_INVALID_ARGUMENT = 1,
    CMIMP_E_GRID_MISMATCH = 2,
    CMIMP_E_ROLE_MISMATCH = 3,
    CMIMP_E_SPAN = 4,
    CMIMP_E_PARSE = 5,
    CMIMP_E_IO = 6,
    CMIMP_E_INTERNAL = 7
} cmimp_status;

/* Per-point flag bits. */
#define CMIMP_FLAG_SINGULAR 0x01u
#define CMIMP_FLAG_ILL_CONDITIONED 0x02u
#define CMIMP_FLAG_EXTRAPOLATED 0x04u
#define CMIMP_FLAG_ACTIVE 0x08u
#define CMIMP_FLAG_NEGATIVE_RESISTANCE 0x10u

typedef enum cmimp_ts_format { CMIMP_TS_RI = 0, CMIMP_TS_MA = 1, CMIMP_TS_DB = 2 } cmimp_ts_format;
typedef enum cmimp_freq_unit {
    CMIMP_UNIT_HZ = 0,
    CMIMP_UNIT_KHZ = 1,
    CMIMP_UNIT_MHZ = 2,
    CMIMP_UNIT_GHZ = 3
} cmimp_freq_unit;
typedef enum cmimp_resample_method {
    CMIMP_RESAMPLE_LINEAR_LOG_F = 0,
    CMIMP_RESAMPLE_NEAREST = 1
} cmimp_resample_method;

typedef struct cmimp_grid cmimp_grid;
typedef struct cmimp_sweep cmimp_sweep;             /* reflection sweep */
typedef struct cmimp_calibration cmimp_calibration; /* k1, k2, k3 per frequency */
typedef struct cmimp_impedance cmimp_impedance;     /* extracted impedance */
typedef struct cmimp_model cmimp_model;             /* synthetic circuit model */
typedef struct cmimp_report cmimp_report;           /* banded comparison */

typedef struct cmimp_kpoint {
    double frequency_hz;
    double k1_re, k1_im;
    double k2_re, k2_im;
    double k3_re, k3_im;
    double condition;
    uint32_t flags;
} cmimp_kpoint;

typedef struct cmimp_zpoint {
    double frequency_hz;
    double re_ohm, im_ohm;
    double mag_ohm, phase_deg;
    uint32_t flags;
} cmimp_zpoint;

typedef struct cmimp_pair_stats {
    size_t band;
    size_t run_a, run_b;
    size_t points;
    double max_db, mean_db, max_phase_deg;
    int consistent; /* 1 consistent, 0 inconsistent, -1 no data */
} cmimp_pair_stats;

/* ---- general ------------------------------------------------------------ */
CMIMP_API const char* cmimp_version(void);
CMIMP_API const char* cmimp_last_error(void);
CMIMP_API const char* cmimp_status_name(cmimp_status status);
CMIMP_API void cmimp_string_free(char* s);
/* Writes through a temporary file and rename. */
CMIMP_API cmimp_status cmimp_write_file(const char* path, const char* data, size_t length);

/* ---- frequency grids ---------------------------------------------------- */
CMIMP_API cmimp_status cmimp_grid_log(double start_hz, double stop_hz, size_t count, cmimp_grid** out);
CMIMP_API cmimp_status cmimp_grid_linear(double start_hz, double stop_hz, size_t count, cmimp_grid** out);
CMIMP_API cmimp_status cmimp_grid_from_points(const double* hz, size_t count, cmimp_grid** out);
/* "start:stop:count[:log|lin]", e.g. "150e3:30e6:201:log". */
CMIMP_API cmimp_status cmimp_grid_parse(const char* spec, cmimp_grid** out);
CMIMP_API size_t cmimp_grid_size(const cmimp_grid* grid);
CMIMP_API double cmimp_grid_point(const cmimp_grid* grid, size_t index);
CMIMP_API void cmimp_grid_free(cmimp_grid* grid);

/* ---- reflection sweeps -------------------------------------------------- */
CMIMP_API cmimp_status cmimp_sweep_create(const cmimp_grid* grid, const double* re, const double* im,
                                          cmimp_sweep** out);
CMIMP_API cmimp_status cmimp_sweep_read_touchstone(const char* path, cmimp_sweep** out, double* z0_ohm);
CMIMP_API cmimp_status cmimp_sweep_parse_touchstone(const char* text, size_t length, const char* source_name,
                                                    cmimp_sweep** out, double* z0_ohm);
CMIMP_API cmimp_status cmimp_sweep_to_touchstone(const cmimp_sweep* sweep, double z0_ohm, cmimp_ts_format format,
                                                 cmimp_freq_unit unit, int digits, const char* comment,
                                                 char** out);
CMIMP_API size_t cmimp_sweep_size(const cmimp_sweep* sweep);
CMIMP_API cmimp_status cmimp_sweep_point(const cmimp_sweep* sweep, size_t index, double* frequency_hz,
                                         double* re, double* im, uint32_t* flags);
CMIMP_API cmimp_status cmimp_sweep_grid(const cmimp_sweep* sweep, cmimp_grid** out);
CMIMP_API cmimp_status cmimp_sweep_resample(const cmimp_sweep* sweep, const cmimp_grid* target,
                                            cmimp_resample_method method, int allow_extrapolation,
                                            cmimp_sweep** out);
CMIMP_API cmimp_status cmimp_sweep_smooth(const cmimp_sweep* sweep, size_t width, cmimp_sweep** out);
CMIMP_API void cmimp_sweep_free(cmimp_sweep* sweep);

/* Points shared by several grids, restricted to their common span: the
 * points of `reference` inside [max(front), min(back)]. */
CMIMP_API cmimp_status cmimp_grid_overlap(const cmimp_grid* reference, const cmimp_grid* const* others,
                                          size_t count, cmimp_grid** out);

/* ---- characterization --------------------------------------------------- */
CMIMP_API cmimp_status cmimp_characterize(const cmimp_sweep* open, const cmimp_sweep* short_circuit,
                                          const cmimp_sweep* load, double z_std_ohm, double z0_ohm,
                                          double tol_singular, double tol_cond, cmimp_calibration** out);
CMIMP_API cmimp_status cmimp_calibration_read(const char* path, cmimp_calibration** out);
CMIMP_API cmimp_status cmimp_calibration_to_text(const cmimp_calibration* cal, char** out);
CMIMP_API cmimp_status cmimp_calibration_set_metadata(cmimp_calibration* cal, const char* key, const char* value);
CMIMP_API size_t cmimp_calibration_size(const cmimp_calibration* cal);
CMIMP_API cmimp_status cmimp_calibration_point(const cmimp_calibration* cal, size_t index, cmimp_kpoint* out);
CMIMP_API int cmimp_calibration_is_from_osl(const cmimp_calibration* cal);
CMIMP_API cmimp_status cmimp_calibration_grid(const cmimp_calibration* cal, cmimp_grid** out);
/* Plot-ready k curves: frequency, re/im/mag of each k, condition, flags. */
CMIMP_API cmimp_status cmimp_calibration_to_curves_csv(const cmimp_calibration* cal, char** out);
/* Calibration restricted to `grid`; every grid point must be a calibration
 * point (GRID_MISMATCH otherwise). */
CMIMP_API cmimp_status cmimp_calibration_restrict(const cmimp_calibration* cal, const cmimp_grid* grid,
                                                  cmimp_calibration** out);
CMIMP_API void cmimp_calibration_free(cmimp_calibration* cal);

/* ---- extraction --------------------------------------------------------- */
CMIMP_API cmimp_status cmimp_extract(const cmimp_sweep* gamma, const cmimp_calibration* cal,
                                     cmimp_impedance** out);
/* |dZ/dgamma| per point, NaN on singular points; `values` holds size() doubles. */
CMIMP_API cmimp_status cmimp_sensitivity(const cmimp_sweep* gamma, const cmimp_calibration* cal, double* values);
CMIMP_API cmimp_status cmimp_impedance_read_csv(const char* path, cmimp_impedance** out);
CMIMP_API cmimp_status cmimp_impedance_to_csv(const cmimp_impedance* z, char** out);
CMIMP_API size_t cmimp_impedance_size(const cmimp_impedance* z);
CMIMP_API cmimp_status cmimp_impedance_point(const cmimp_impedance* z, size_t index, cmimp_zpoint* out);
CMIMP_API size_t cmimp_impedance_count_flagged(const cmimp_impedance* z, uint32_t mask);
CMIMP_API void cmimp_impedance_free(cmimp_impedance* z);

/* ---- comparison --------------------------------------------------------- */
/* band_lo/band_hi may be NULL with band_count 0 for one full-span band. */
CMIMP_API cmimp_status cmimp_compare(const cmimp_impedance* const* runs, const char* const* labels, size_t run_count,
                                     const double* band_lo_hz, const double* band_hi_hz, size_t band_count,
                                     double threshold_db, cmimp_report** out);
CMIMP_API int cmimp_report_all_consistent(const cmimp_report* report);
CMIMP_API size_t cmimp_report_stats_count(const cmimp_report* report);
CMIMP_API cmimp_status cmimp_report_stats(const cmimp_report* report, size_t index, cmimp_pair_stats* out);
CMIMP_API cmimp_status cmimp_report_to_text(const cmimp_report* report, const char* title, char** out);
/* Rows: group,band_lo_hz,band_hi_hz,run_a,run_b,points,max_db,mean_db,max_phase_deg,verdict */
CMIMP_API cmimp_status cmimp_report_to_csv(const cmimp_report* report, const char* group, int with_header,
                                           char** out);
CMIMP_API void cmimp_report_free(cmimp_report* report);
/* Long-format overlay: label,frequency_hz,mag_dbohm,phase_deg,flags. */
CMIMP_API cmimp_status cmimp_overlay_csv(const cmimp_impedance* const* runs, const char* const* labels,
                                         size_t run_count, char** out);

/* ---- synthetic circuit model -------------------------------------------- */
CMIMP_API cmimp_status cmimp_model_read(const char* path, cmimp_model** out);
CMIMP_API cmimp_status cmimp_model_parse(const char* text, size_t length, cmimp_model** out);
CMIMP_API cmimp_status cmimp_model_to_text(const cmimp_model* model, char** out);
CMIMP_API double cmimp_model_z0(const cmimp_model* model);
CMIMP_API cmimp_status cmimp_model_set_z0(cmimp_model* model, double z0_ohm);
/* amplitude < 0 keeps the model's amplitude and only replaces the seed. */
CMIMP_API cmimp_status cmimp_model_set_noise(cmimp_model* model, double relative_amplitude, uint64_t seed);
/* Termination spec: OPEN, SHORT, R=<ohm>, SERIES:R=..,L=..,C=.., PARALLEL:...,
 * or TABLE:<impedance csv path>. */
CMIMP_API cmimp_status cmimp_simulate_gamma(const cmimp_model* model, const char* termination,
                                            const cmimp_grid* grid, cmimp_sweep** out);
CMIMP_API cmimp_status cmimp_simulate_osl(const cmimp_model* model, double z_std_ohm, const cmimp_grid* grid,
                                          int with_noise, cmimp_sweep** open, cmimp_sweep** short_circuit,
                                          cmimp_sweep** load);
/* k coefficients computed directly from the model's network. */
CMIMP_API cmimp_status cmimp_model_calibration(const cmimp_model* model, const cmimp_grid* grid,
                                               cmimp_calibration** out);
CMIMP_API void cmimp_model_free(cmimp_model* model);

#ifdef __cplusplus
}
#endif

#endif /* CMIMP_H */
