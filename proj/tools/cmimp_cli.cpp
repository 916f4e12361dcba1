// cmimp: command-line front end for single-probe common-mode impedance
// extraction. Links the C API only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_support.hpp"

using namespace cli;

namespace {

struct Globals {
    std::string config;
    std::string grid;
    double z0 = 0.0;
    double z_std = 0.0;
    std::int64_t seed = -1;
    bool resample = false;
    bool stamp = false;
    bool quiet = false;
};

struct SimulateArgs {
    std::string model, termination, out, format = "ri", unit = "hz", abcd_cal;
    double noise = -1.0;
    int digits = 9;
};

struct CharacterizeArgs {
    std::string open, short_circuit, load, out;
    double tol_singular = 0.0, tol_cond = 0.0;
    int smooth = 1;
    std::vector<std::string> meta;
};

struct ExtractArgs {
    std::string gamma, cal, out;
};

struct CompareArgs {
    std::vector<std::string> runs, groups;
    std::string bands, out, csv, overlay;
    double threshold = 0.0;
};

struct ReportArgs {
    std::string cal, out;
    std::vector<std::string> impedance;
};

// Settings after merging the config file with command-line overrides.
struct Session {
    SessionConfig cfg;
    const Globals* g = nullptr;

    void say(const std::string& line) const {
        if (cfg.verbosity > 0 && !g->quiet) std::cout << line << '\n';
    }
    Grid grid() const {
        cmimp_grid* out = nullptr;
        check(cmimp_grid_parse(cfg.grid.c_str(), &out), "grid '" + cfg.grid + "'");
        return Grid(out);
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

cmimp_ts_format parse_format(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "ri") return CMIMP_TS_RI;
    if (s == "ma") return CMIMP_TS_MA;
    if (s == "db") return CMIMP_TS_DB;
    throw Failure("unknown Touchstone format '" + s + "'");
}

cmimp_freq_unit parse_unit(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "hz") return CMIMP_UNIT_HZ;
    if (s == "khz") return CMIMP_UNIT_KHZ;
    if (s == "mhz") return CMIMP_UNIT_MHZ;
    if (s == "ghz") return CMIMP_UNIT_GHZ;
    throw Failure("unknown frequency unit '" + s + "'");
}

std::string take_text(const cmimp_calibration* cal) {
    char* out = nullptr;
    check(cmimp_calibration_to_text(cal, &out));
    return take(out);
}

Sweep read_sweep(const std::string& path, double* z0) {
    cmimp_sweep* s = nullptr;
    check(cmimp_sweep_read_touchstone(path.c_str(), &s, z0));
    return Sweep(s);
}

Grid grid_of(const cmimp_sweep* s) {
    cmimp_grid* g = nullptr;
    check(cmimp_sweep_grid(s, &g));
    return Grid(g);
}

Grid grid_of(const cmimp_calibration* c) {
    cmimp_grid* g = nullptr;
    check(cmimp_calibration_grid(c, &g));
    return Grid(g);
}

Sweep resample(const cmimp_sweep* s, const cmimp_grid* target) {
    cmimp_sweep* out = nullptr;
    check(cmimp_sweep_resample(s, target, CMIMP_RESAMPLE_LINEAR_LOG_F, 0, &out), "resample");
    return Sweep(out);
}

Model load_model(const std::string& path) {
    cmimp_model* m = nullptr;
    check(cmimp_model_read(path.c_str(), &m));
    return Model(m);
}

Impedance read_impedance(const std::string& path) {
    cmimp_impedance* z = nullptr;
    check(cmimp_impedance_read_csv(path.c_str(), &z));
    return Impedance(z);
}

std::string flag_counts(std::size_t singular, std::size_t ill, std::size_t extrapolated) {
    return "singular=" + std::to_string(singular) + " ill_conditioned=" + std::to_string(ill) +
           " extrapolated=" + std::to_string(extrapolated);
}

// ---- simulate -------------------------------------------------------------

int run_simulate(const Session& s, const SimulateArgs& a) {
    Model model = load_model(a.model);
    if (s.cfg.z0_ohm) check(cmimp_model_set_z0(model.get(), *s.cfg.z0_ohm));
    const double z0 = cmimp_model_z0(model.get());
    if (a.noise >= 0.0 || s.g->seed >= 0) {
        const std::uint64_t seed = s.g->seed >= 0 ? static_cast<std::uint64_t>(s.g->seed) : 0;
        check(cmimp_model_set_noise(model.get(), a.noise, seed));
    }
    Grid grid = s.grid();
    const auto format = parse_format(a.format);
    const auto unit = parse_unit(a.unit);
    if (a.digits < 1 || a.digits > 17) throw Failure("--digits must be within 1..17");

    std::string comment = " cmimp simulate termination=" + a.termination;
    if (s.g->stamp) comment += " created=" + utc_timestamp();

    auto emit = [&](const cmimp_sweep* sweep, const std::string& path) {
        char* text = nullptr;
        check(cmimp_sweep_to_touchstone(sweep, z0, format, unit, a.digits, comment.c_str(), &text));
        write_output(s.cfg.output_path(path), take(text));
        s.say("wrote " + s.cfg.output_path(path).string());
    };

    std::string term = a.termination;
    std::string upper = term;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    if (upper == "OSL") {
        cmimp_sweep *o = nullptr, *sh = nullptr, *l = nullptr;
        check(cmimp_simulate_osl(model.get(), s.cfg.z_std_ohm, grid.get(), 0, &o, &sh, &l));
        Sweep open(o), short_circuit(sh), load(l);
        comment = " cmimp simulate standards z_std=" + fmt("%.17g", s.cfg.z_std_ohm);
        if (s.g->stamp) comment += " created=" + utc_timestamp();
        emit(open.get(), a.out + "_open.s1p");
        emit(short_circuit.get(), a.out + "_short.s1p");
        emit(load.get(), a.out + "_load.s1p");
    } else {
        cmimp_sweep* g = nullptr;
        check(cmimp_simulate_gamma(model.get(), term.c_str(), grid.get(), &g), "termination '" + term + "'");
        Sweep gamma(g);
        emit(gamma.get(), a.out);
    }

    if (!a.abcd_cal.empty()) {
        cmimp_calibration* c = nullptr;
        check(cmimp_model_calibration(model.get(), grid.get(), &c));
        Calibration cal(c);
        write_output(s.cfg.output_path(a.abcd_cal), take_text(cal.get()));
        s.say("wrote " + s.cfg.output_path(a.abcd_cal).string());
    }
    return exit_ok;
}

// ---- characterize ---------------------------------------------------------

void print_conditioning(const Session& s, const cmimp_calibration* cal) {
    const std::size_t n = cmimp_calibration_size(cal);
    if (n == 0) return;
    cmimp_kpoint first{}, last{};
    check(cmimp_calibration_point(cal, 0, &first));
    check(cmimp_calibration_point(cal, n - 1, &last));
    // One row per decade of frequency.
    std::vector<double> edges{first.frequency_hz};
    for (double e = std::pow(10.0, std::floor(std::log10(first.frequency_hz)) + 1); e < last.frequency_hz; e *= 10) {
        edges.push_back(e);
    }
    edges.push_back(last.frequency_hz);
    s.say("conditioning |gamma_L - gamma_S| by band:");
    s.say("  band_lo_hz  band_hi_hz  points  min_condition  median_condition  ill_conditioned  singular");
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        std::vector<double> conds;
        std::size_t ill = 0, sing = 0;
        for (std::size_t i = 0; i < n; ++i) {
            cmimp_kpoint p{};
            check(cmimp_calibration_point(cal, i, &p));
            const bool last_band = b + 2 == edges.size();
            if (p.frequency_hz < edges[b] || (last_band ? p.frequency_hz > edges[b + 1] : p.frequency_hz >= edges[b + 1]))
                continue;
            conds.push_back(p.condition);
            if (p.flags & CMIMP_FLAG_ILL_CONDITIONED) ++ill;
            if (p.flags & CMIMP_FLAG_SINGULAR) ++sing;
        }
        if (conds.empty()) continue;
        std::sort(conds.begin(), conds.end());
        char line[160];
        std::snprintf(line, sizeof line, "  %10.4g  %10.4g  %6zu  %13.4g  %16.4g  %15zu  %8zu", edges[b], edges[b + 1],
                      conds.size(), conds.front(), conds[conds.size() / 2], ill, sing);
        s.say(line);
    }
}

int run_characterize(const Session& s, const CharacterizeArgs& a) {
    double z0_o = 0, z0_s = 0, z0_l = 0;
    Sweep open = read_sweep(a.open, &z0_o);
    Sweep short_circuit = read_sweep(a.short_circuit, &z0_s);
    Sweep load = read_sweep(a.load, &z0_l);
    if (z0_o != z0_s || z0_o != z0_l) throw Failure("standards use different reference impedances");
    const double z0 = s.cfg.z0_ohm.value_or(z0_o);

    Grid go = grid_of(open.get()), gs = grid_of(short_circuit.get()), gl = grid_of(load.get());
    if (!same_grid(go.get(), gs.get()) || !same_grid(go.get(), gl.get())) {
        if (!s.g->resample) {
            throw Failure("GridMismatch: standards are on different frequency grids (use --resample)");
        }
        const cmimp_grid* others[2] = {gs.get(), gl.get()};
        cmimp_grid* common = nullptr;
        check(cmimp_grid_overlap(go.get(), others, 2, &common), "standards");
        Grid target(common);
        open = resample(open.get(), target.get());
        short_circuit = resample(short_circuit.get(), target.get());
        load = resample(load.get(), target.get());
        s.say("resampled standards onto " + std::to_string(cmimp_grid_size(target.get())) + " common points");
    }
    if (a.smooth > 1) {
        auto smooth = [&](Sweep& sw) {
            cmimp_sweep* out = nullptr;
            check(cmimp_sweep_smooth(sw.get(), static_cast<std::size_t>(a.smooth), &out), "--smooth");
            sw = Sweep(out);
        };
        smooth(open);
        smooth(short_circuit);
        smooth(load);
    }

    const double tol_s = a.tol_singular > 0.0 ? a.tol_singular : s.cfg.tol_singular;
    const double tol_c = a.tol_cond > 0.0 ? a.tol_cond : s.cfg.tol_cond;
    cmimp_calibration* c = nullptr;
    check(cmimp_characterize(open.get(), short_circuit.get(), load.get(), s.cfg.z_std_ohm, z0, tol_s, tol_c, &c));
    Calibration cal(c);
    for (const auto& m : a.meta) {
        const auto eq = m.find('=');
        if (eq == std::string::npos || eq == 0) throw Failure("--meta expects key=value, got '" + m + "'");
        check(cmimp_calibration_set_metadata(cal.get(), m.substr(0, eq).c_str(), m.substr(eq + 1).c_str()));
    }
    if (a.smooth > 1) {
        check(cmimp_calibration_set_metadata(cal.get(), "smoothing_width", std::to_string(a.smooth).c_str()));
    }
    if (s.g->stamp) check(cmimp_calibration_set_metadata(cal.get(), "created", utc_timestamp().c_str()));

    write_output(s.cfg.output_path(a.out), take_text(cal.get()));

    std::size_t singular = 0, ill = 0, extrapolated = 0;
    const std::size_t n = cmimp_calibration_size(cal.get());
    for (std::size_t i = 0; i < n; ++i) {
        cmimp_kpoint p{};
        check(cmimp_calibration_point(cal.get(), i, &p));
        singular += (p.flags & CMIMP_FLAG_SINGULAR) != 0;
        ill += (p.flags & CMIMP_FLAG_ILL_CONDITIONED) != 0;
        extrapolated += (p.flags & CMIMP_FLAG_EXTRAPOLATED) != 0;
    }
    print_conditioning(s, cal.get());
    s.say("points=" + std::to_string(n) + " " + flag_counts(singular, ill, extrapolated));
    s.say("wrote " + s.cfg.output_path(a.out).string());
    if (singular > 0) {
        std::cerr << "cmimp: warning: " << singular << " singular bin(s) in calibration\n";
        return exit_singular;
    }
    return exit_ok;
}

// ---- extract --------------------------------------------------------------

int run_extract(const Session& s, const ExtractArgs& a) {
    double z0 = 0;
    Sweep gamma = read_sweep(a.gamma, &z0);
    cmimp_calibration* c = nullptr;
    check(cmimp_calibration_read(a.cal.c_str(), &c));
    Calibration cal(c);

    Grid gg = grid_of(gamma.get()), gc = grid_of(cal.get());
    if (!same_grid(gg.get(), gc.get())) {
        const cmimp_grid* others[1] = {gc.get()};
        cmimp_grid* common = nullptr;
        check(cmimp_grid_overlap(gg.get(), others, 1, &common), "measurement vs calibration");
        cmimp_grid_free(common);
        if (!s.g->resample) {
            throw Failure("GridMismatch: measurement and calibration grids differ (use --resample)");
        }
        gamma = resample(gamma.get(), gc.get());
        s.say("resampled measurement onto the calibration grid");
    }
    cmimp_impedance* z = nullptr;
    check(cmimp_extract(gamma.get(), cal.get(), &z));
    Impedance imp(z);
    char* csv = nullptr;
    check(cmimp_impedance_to_csv(imp.get(), &csv));
    write_output(s.cfg.output_path(a.out), take(csv));

    const auto count = [&](std::uint32_t f) { return cmimp_impedance_count_flagged(imp.get(), f); };
    s.say("points=" + std::to_string(cmimp_impedance_size(imp.get())) + " " +
          flag_counts(count(CMIMP_FLAG_SINGULAR), count(CMIMP_FLAG_ILL_CONDITIONED), count(CMIMP_FLAG_EXTRAPOLATED)) +
          " negative_resistance=" + std::to_string(count(CMIMP_FLAG_NEGATIVE_RESISTANCE)));
    s.say("wrote " + s.cfg.output_path(a.out).string());
    return exit_ok;
}

// ---- compare / report -----------------------------------------------------

struct Runs {
    std::vector<std::string> labels;
    std::vector<Impedance> sweeps;

    std::size_t index(const std::string& label) const {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw Failure("unknown run label '" + label + "'");
        return static_cast<std::size_t>(it - labels.begin());
    }
};

Runs load_runs(const std::vector<std::string>& args) {
    Runs r;
    for (const auto& arg : args) {
        auto [label, path] = split_labeled(arg);
        if (std::find(r.labels.begin(), r.labels.end(), label) != r.labels.end()) {
            throw Failure("duplicate run label '" + label + "'");
        }
        r.labels.push_back(label);
        r.sweeps.push_back(read_impedance(path));
    }
    return r;
}

std::string overlay_of(const Runs& runs) {
    std::vector<const cmimp_impedance*> ptrs;
    std::vector<const char*> labels;
    for (std::size_t i = 0; i < runs.sweeps.size(); ++i) {
        ptrs.push_back(runs.sweeps[i].get());
        labels.push_back(runs.labels[i].c_str());
    }
    char* out = nullptr;
    check(cmimp_overlay_csv(ptrs.data(), labels.data(), ptrs.size(), &out));
    return take(out);
}

int run_compare(const Session& s, const CompareArgs& a) {
    if (a.runs.size() < 2) throw Failure("compare needs at least two --run inputs");
    Runs runs = load_runs(a.runs);
    const double threshold = a.threshold > 0.0 ? a.threshold : s.cfg.threshold_db;
    std::vector<double> lo, hi;
    if (!a.bands.empty()) {
        for (auto [l, h] : parse_bands(a.bands)) {
            lo.push_back(l);
            hi.push_back(h);
        }
    }

    std::vector<std::vector<std::string>> groups;
    for (const auto& g : a.groups) {
        std::vector<std::string> members;
        std::stringstream ss(g);
        std::string item;
        while (std::getline(ss, item, ',')) members.push_back(item);
        if (members.size() < 2) throw Failure("group '" + g + "' needs at least two labels");
        groups.push_back(members);
    }
    if (groups.empty()) groups.push_back(runs.labels);

    std::string text, csv;
    bool all_consistent = true;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        std::vector<const cmimp_impedance*> ptrs;
        std::vector<const char*> labels;
        std::string name;
        for (const auto& label : groups[gi]) {
            const std::size_t k = runs.index(label);
            ptrs.push_back(runs.sweeps[k].get());
            labels.push_back(runs.labels[k].c_str());
            name += (name.empty() ? "" : "+") + label;
        }
        cmimp_report* r = nullptr;
        check(cmimp_compare(ptrs.data(), labels.data(), ptrs.size(), lo.empty() ? nullptr : lo.data(),
                            hi.empty() ? nullptr : hi.data(), lo.size(), threshold, &r),
              "group " + name);
        Report report(r);
        all_consistent = all_consistent && cmimp_report_all_consistent(report.get()) == 1;
        char* t = nullptr;
        check(cmimp_report_to_text(report.get(), ("group " + name).c_str(), &t));
        text += (gi ? "\n" : "") + take(t);
        char* c = nullptr;
        check(cmimp_report_to_csv(report.get(), name.c_str(), gi == 0 ? 1 : 0, &c));
        csv += take(c);
    }
    if (s.g->stamp) text = "created " + utc_timestamp() + "\n" + text;

    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_output(s.cfg.output_path(a.out), text);
        s.say("wrote " + s.cfg.output_path(a.out).string());
    }
    if (!a.csv.empty()) {
        write_output(s.cfg.output_path(a.csv), csv);
        s.say("wrote " + s.cfg.output_path(a.csv).string());
    }
    if (!a.overlay.empty()) {
        write_output(s.cfg.output_path(a.overlay), overlay_of(runs));
        s.say("wrote " + s.cfg.output_path(a.overlay).string());
    }
    s.say(all_consistent ? "verdict: CONSISTENT" : "verdict: INCONSISTENT");
    return all_consistent ? exit_ok : exit_inconsistent;
}

int run_report(const Session& s, const ReportArgs& a) {
    if (a.cal.empty() == a.impedance.empty()) throw Failure("report needs exactly one of --cal or --impedance");
    std::string content;
    if (!a.cal.empty()) {
        cmimp_calibration* c = nullptr;
        check(cmimp_calibration_read(a.cal.c_str(), &c));
        Calibration cal(c);
        char* out = nullptr;
        check(cmimp_calibration_to_curves_csv(cal.get(), &out));
        content = take(out);
    } else {
        content = overlay_of(load_runs(a.impedance));
    }
    if (a.out.empty()) {
        std::cout << content;
    } else {
        write_output(s.cfg.output_path(a.out), content);
        s.say("wrote " + s.cfg.output_path(a.out).string());
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"In-circuit common-mode impedance extraction with a single inductive probe"};
    app.set_version_flag("--version", std::string(cmimp_version()));
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "Session config (JSON); flags override it")->check(CLI::ExistingFile);
    app.add_option("--grid", g.grid, "Frequency grid start:stop:count[:log|lin]");
    app.add_option("--z0", g.z0, "Reference impedance in ohm (default: from the model or sweep file)");
    app.add_option("--z-std", g.z_std, "Load standard in ohm");
    app.add_option("--seed", g.seed, "Noise seed for simulate")->check(CLI::NonNegativeNumber);
    app.add_flag("--resample", g.resample, "Interpolate sweeps onto a common grid when grids differ");
    app.add_flag("--stamp", g.stamp, "Record a UTC timestamp in comments/metadata");
    app.add_flag("-q,--quiet", g.quiet, "Suppress summaries");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Synthesize reflection sweeps from a circuit model");
    simulate->add_option("--model", sim.model, "Model file (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--termination,-t", sim.termination,
                         "osl, OPEN, SHORT, R=<ohm>, SERIES:R=..,L=..,C=.., PARALLEL:..., TABLE:<csv>")
        ->required();
    simulate->add_option("--out,-o", sim.out, "Output .s1p (prefix for osl)")->required();
    simulate->add_option("--noise", sim.noise, "Relative noise amplitude (overrides the model)")
        ->check(CLI::NonNegativeNumber);
    simulate->add_option("--format", sim.format, "ri, ma or db");
    simulate->add_option("--unit", sim.unit, "hz, khz, mhz or ghz");
    simulate->add_option("--digits", sim.digits, "Significant digits");
    simulate->add_option("--abcd-cal", sim.abcd_cal, "Also write the calibration computed from the model network");

    CharacterizeArgs ch;
    auto* characterize = app.add_subcommand("characterize", "Compute k1, k2, k3 from open/short/load sweeps");
    characterize->add_option("--open", ch.open)->required();
    characterize->add_option("--short", ch.short_circuit)->required();
    characterize->add_option("--load", ch.load)->required();
    characterize->add_option("--out,-o", ch.out, "Calibration file")->required();
    characterize->add_option("--tol-singular", ch.tol_singular)->check(CLI::PositiveNumber);
    characterize->add_option("--tol-cond", ch.tol_cond)->check(CLI::PositiveNumber);
    characterize->add_option("--smooth", ch.smooth, "Odd moving-average width applied to the standards")
        ->check(CLI::PositiveNumber);
    characterize->add_option("--meta", ch.meta, "key=value metadata (repeatable)");

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Extract impedance from a measured reflection sweep");
    extract->add_option("--gamma", ex.gamma, "Measured .s1p")->required();
    extract->add_option("--cal", ex.cal, "Calibration file")->required();
    extract->add_option("--out,-o", ex.out, "Impedance CSV")->required();

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Band-wise consistency of extracted impedances");
    compare->add_option("--run", cmp.runs, "label=impedance.csv (repeatable)");
    compare->add_option("--bands", cmp.bands, "lo:hi[,lo:hi...] in Hz; default is the full common span");
    compare->add_option("--threshold", cmp.threshold, "Consistency threshold in dB")->check(CLI::PositiveNumber);
    compare->add_option("--group", cmp.groups, "Comma-separated labels compared together (repeatable)");
    compare->add_option("--out,-o", cmp.out, "Text report (stdout if omitted)");
    compare->add_option("--csv", cmp.csv, "Per-band statistics CSV");
    compare->add_option("--overlay", cmp.overlay, "Per-run plot data CSV");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Plot-ready CSV of k curves or impedance runs");
    report->add_option("--cal", rep.cal, "Calibration file");
    report->add_option("--impedance", rep.impedance, "label=impedance.csv (repeatable)");
    report->add_option("--out,-o", rep.out, "Output CSV (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        Session s;
        s.g = &g;
        if (!g.config.empty()) s.cfg = SessionConfig::load(g.config);
        if (!g.grid.empty()) s.cfg.grid = g.grid;
        if (g.z0 != 0.0) s.cfg.z0_ohm = g.z0;
        if (g.z_std != 0.0) s.cfg.z_std_ohm = g.z_std;
        s.cfg.validate();

        if (simulate->parsed()) return run_simulate(s, sim);
        if (characterize->parsed()) return run_characterize(s, ch);
        if (extract->parsed()) return run_extract(s, ex);
        if (compare->parsed()) return run_compare(s, cmp);
        if (report->parsed()) return run_report(s, rep);
    } catch (const std::exception& e) {
        std::cerr << "cmimp: error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
