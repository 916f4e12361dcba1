#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cmimp/error.hpp"
#include "cmimp/sweep_io.hpp"
#include "text_util.hpp"

namespace cmimp {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kCsvHeader = "frequency_hz,re_ohm,im_ohm,mag_ohm,phase_deg,flags";
constexpr const char* kCalibrationTag = "cmimp-calibration";
constexpr const char* kModelTag = "cmimp-model";
constexpr int kFormatVersion = 1;

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

// ---- JSON access with positioned errors ----------------------------------

class Reader {
public:
    explicit Reader(std::string source) : m_source(std::move(source)) {}

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(m_source, 0, what); }

    const json& member(const json& obj, const char* key) const {
        if (!obj.is_object()) fail(std::string("expected an object holding '") + key + "'");
        auto it = obj.find(key);
        if (it == obj.end()) fail(std::string("missing key '") + key + "'");
        return *it;
    }

    double number(const json& obj, const char* key) const {
        const json& v = member(obj, key);
        if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const json& obj, const char* key) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_number()) fail(std::string("'") + key + "' must be a number or null");
        return it->get<double>();
    }

    std::string string(const json& obj, const char* key) const {
        const json& v = member(obj, key);
        if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
        return v.get<std::string>();
    }

    Complex complex(const json& v, const char* what) const {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(std::string("'") + what + "' must be a [re, im] pair");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    std::vector<double> numbers(const json& obj, const char* key) const {
        const json& v = member(obj, key);
        if (!v.is_array()) fail(std::string("'") + key + "' must be an array");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(std::string("'") + key + "' must hold numbers only");
            out.push_back(x.get<double>());
        }
        return out;
    }

    json parse(std::string_view text, const char* tag) const {
        json doc = json::parse(text, nullptr, false);
        if (doc.is_discarded()) fail("not valid JSON");
        if (string(doc, "format") != tag) fail(std::string("format tag is not '") + tag + "'");
        const json& version = member(doc, "version");
        if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
            fail("unsupported version (expected " + std::to_string(kFormatVersion) + ")");
        }
        return doc;
    }

private:
    std::string m_source;
};

// ---- model pieces ---------------------------------------------------------

json impedance_model_json(const ImpedanceModel& model) {
    using namespace impedance_model;
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return {{"type", "constant"}, {"r_ohm", m.r_ohm}};
            } else if constexpr (std::is_same_v<T, SeriesRL>) {
                return {{"type", "series_rl"}, {"r_ohm", m.r_ohm}, {"l_h", m.l_h}};
            } else if constexpr (std::is_same_v<T, ParallelRC>) {
                return {{"type", "parallel_rc"}, {"r_ohm", m.r_ohm}, {"c_f", m.c_f}};
            } else {
                json re = json::array();
                json im = json::array();
                for (auto z : m.z_ohm) {
                    re.push_back(z.real());
                    im.push_back(z.imag());
                }
                return {{"type", "table"}, {"frequency_hz", m.frequency_hz}, {"re_ohm", re}, {"im_ohm", im}};
            }
        },
        model);
}

ImpedanceModel impedance_model_from_json(const Reader& r, const json& j) {
    using namespace impedance_model;
    const std::string type = r.string(j, "type");
    if (type == "constant") return Constant{r.number(j, "r_ohm")};
    if (type == "series_rl") return SeriesRL{r.number(j, "r_ohm"), r.number(j, "l_h")};
    if (type == "parallel_rc") return ParallelRC{r.number(j, "r_ohm"), r.number(j, "c_f")};
    if (type == "table") {
        Table t;
        t.frequency_hz = r.numbers(j, "frequency_hz");
        auto re = r.numbers(j, "re_ohm");
        auto im = r.numbers(j, "im_ohm");
        if (re.size() != t.frequency_hz.size() || im.size() != t.frequency_hz.size()) {
            r.fail("impedance table columns differ in length");
        }
        for (std::size_t i = 0; i < re.size(); ++i) t.z_ohm.emplace_back(re[i], im[i]);
        return t;
    }
    r.fail("unknown impedance model type '" + type + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Impedance CSV

std::string write_impedance_csv(const ImpedanceSweep& sweep, int digits) {
    std::string out = kCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        out += text::fixed_digits(sweep.grid()[i], digits);
        out += ',';
        if (!sweep.is_singular(i)) {
            const Complex z = sweep[i];
            out += text::fixed_digits(z.real(), digits) + ',' + text::fixed_digits(z.imag(), digits) + ',' +
                   text::fixed_digits(sweep.magnitude_ohm(i), digits) + ',' +
                   text::fixed_digits(sweep.phase_deg(i), digits) + ',';
        } else {
            out += ",,,,";
        }
        out += flags_to_string(sweep.point_flags()[i]);
        out += '\n';
    }
    return out;
}

ImpedanceSweep parse_impedance_csv(std::string_view input, const std::string& source_name) {
    std::vector<double> f;
    std::vector<Complex> z;
    std::vector<PointFlags> pf;
    std::size_t line_no = 0;
    bool header = false;
    for (auto raw : text::lines(input)) {
        ++line_no;
        auto line = text::trim(raw);
        if (line.empty()) continue;
        if (!header) {
            if (line != kCsvHeader) {
                throw ParseError(source_name, line_no, std::string("expected header '") + kCsvHeader + "'");
            }
            header = true;
            continue;
        }
        auto cols = text::split(line, ',');
        if (cols.size() != 6) {
            throw ParseError(source_name, line_no, "expected 6 columns, found " + std::to_string(cols.size()));
        }
        auto freq = text::parse_double(cols[0]);
        if (!freq) throw ParseError(source_name, line_no, "frequency is not a finite number");
        PointFlags flag_bits;
        try {
            flag_bits = flags_from_string(cols[5]);
        } catch (const Error& e) {
            throw ParseError(source_name, line_no, e.what());
        }
        Complex value(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
        if (!(flag_bits & flags::singular)) {
            auto re = text::parse_double(cols[1]);
            auto im = text::parse_double(cols[2]);
            if (!re || !im) throw ParseError(source_name, line_no, "impedance is not a finite number");
            value = {*re, *im};
        }
        if (!f.empty() && !(*freq > f.back())) {
            throw ParseError(source_name, line_no, "frequencies must be strictly increasing");
        }
        if (!(*freq > 0.0)) throw ParseError(source_name, line_no, "frequency must be positive");
        f.push_back(*freq);
        z.push_back(value);
        pf.push_back(flag_bits);
    }
    if (!header) throw ParseError(source_name, 0, "missing CSV header");
    if (f.empty()) throw ParseError(source_name, 0, "no data rows");
    return ImpedanceSweep(FrequencyGrid::from_points(std::move(f)), std::move(z), std::move(pf));
}

// ---------------------------------------------------------------------------
// Calibration file

std::string write_calibration(const KCalibration& cal) {
    json doc;
    doc["format"] = kCalibrationTag;
    doc["version"] = kFormatVersion;
    doc["provenance"] = to_string(cal.provenance());
    doc["z0_ohm"] = cal.z0().ohms();
    doc["z_std_ohm"] = cal.z_std();
    doc["metadata"] = json::object();
    for (const auto& [k, v] : cal.metadata()) doc["metadata"][k] = v;
    json points = json::array();
    for (std::size_t i = 0; i < cal.size(); ++i) {
        json p;
        p["frequency_hz"] = cal.grid()[i];
        if (cal.is_singular(i)) {
            p["k1"] = nullptr;
            p["k2"] = nullptr;
            p["k3"] = nullptr;
        } else {
            p["k1"] = complex_json(cal[i].k1);
            p["k2"] = complex_json(cal[i].k2);
            p["k3"] = complex_json(cal[i].k3);
        }
        p["condition"] = cal.condition()[i];
        p["flags"] = flags_to_string(cal.point_flags()[i]);
        points.push_back(std::move(p));
    }
    doc["points"] = std::move(points);
    return doc.dump(1) + "\n";
}

KCalibration parse_calibration(std::string_view text, const std::string& source_name) {
    const Reader r(source_name);
    const json doc = r.parse(text, kCalibrationTag);
    try {
        const ReferenceImpedance z0(r.number(doc, "z0_ohm"));
        const double z_std = r.number(doc, "z_std_ohm");
        const Provenance prov = provenance_from_string(r.string(doc, "provenance"));
        std::map<std::string, std::string> meta;
        const json& m = r.member(doc, "metadata");
        if (!m.is_object()) r.fail("'metadata' must be an object");
        for (const auto& [k, v] : m.items()) {
            if (!v.is_string()) r.fail("metadata values must be strings");
            meta[k] = v.get<std::string>();
        }
        const json& pts = r.member(doc, "points");
        if (!pts.is_array() || pts.empty()) r.fail("'points' must be a non-empty array");
        std::vector<double> f;
        std::vector<KTriple> k;
        std::vector<double> cond;
        std::vector<PointFlags> pf;
        for (const auto& p : pts) {
            f.push_back(r.number(p, "frequency_hz"));
            cond.push_back(r.number(p, "condition"));
            pf.push_back(flags_from_string(r.string(p, "flags")));
            if (pf.back() & flags::singular) {
                k.push_back({});
            } else {
                k.push_back({r.complex(r.member(p, "k1"), "k1"), r.complex(r.member(p, "k2"), "k2"),
                             r.complex(r.member(p, "k3"), "k3")});
            }
        }
        return KCalibration(FrequencyGrid::from_points(std::move(f)), std::move(k), z0, z_std, std::move(cond),
                            std::move(pf), prov, std::move(meta));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        r.fail(e.what());
    }
}

// ---------------------------------------------------------------------------
// Model file

std::string write_model(const CircuitModel& model) {
    model.validate();
    json doc;
    doc["format"] = kModelTag;
    doc["version"] = kFormatVersion;
    doc["description"] = model.description;
    doc["z0_ohm"] = model.z0.ohms();
    json probe;
    probe["turns_ratio"] = model.probe.turns_ratio;
    if (std::isinf(model.probe.magnetizing_inductance_h)) {
        probe["magnetizing_inductance_h"] = nullptr;
    } else {
        probe["magnetizing_inductance_h"] = model.probe.magnetizing_inductance_h;
    }
    probe["leakage_inductance_h"] = model.probe.leakage_inductance_h;
    probe["parasitic_capacitance_f"] = model.probe.parasitic_capacitance_f;
    probe["winding_resistance_ohm"] = model.probe.winding_resistance_ohm;
    doc["probe"] = std::move(probe);
    doc["lisn"] = impedance_model_json(model.lisn_cable.z_cm_lisn);
    doc["cable"] = impedance_model_json(model.lisn_cable.z_cm_cable);
    if (model.noise) {
        doc["noise"] = {{"relative_amplitude", model.noise->relative_amplitude}, {"seed", model.noise->seed}};
    }
    if (model.sap_attenuation_db) {
        doc["sap_chain"] = {{"attenuation_db", *model.sap_attenuation_db}};
    }
    return doc.dump(2) + "\n";
}

CircuitModel parse_model(std::string_view text, const std::string& source_name) {
    const Reader r(source_name);
    const json doc = r.parse(text, kModelTag);
    try {
        CircuitModel m;
        if (auto it = doc.find("description"); it != doc.end() && it->is_string()) {
            m.description = it->get<std::string>();
        }
        m.z0 = ReferenceImpedance(r.number(doc, "z0_ohm"));
        const json& probe = r.member(doc, "probe");
        m.probe.turns_ratio = r.number(probe, "turns_ratio");
        m.probe.magnetizing_inductance_h = r.optional_number(probe, "magnetizing_inductance_h")
                                               .value_or(std::numeric_limits<double>::infinity());
        m.probe.leakage_inductance_h = r.number(probe, "leakage_inductance_h");
        m.probe.parasitic_capacitance_f = r.number(probe, "parasitic_capacitance_f");
        m.probe.winding_resistance_ohm = r.number(probe, "winding_resistance_ohm");
        m.lisn_cable.z_cm_lisn = impedance_model_from_json(r, r.member(doc, "lisn"));
        m.lisn_cable.z_cm_cable = impedance_model_from_json(r, r.member(doc, "cable"));
        if (auto it = doc.find("noise"); it != doc.end() && !it->is_null()) {
            const json& seed = r.member(*it, "seed");
            if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
                r.fail("'seed' must be a non-negative integer");
            }
            m.noise = NoiseModel{r.number(*it, "relative_amplitude"), seed.get<std::uint64_t>()};
        }
        if (auto it = doc.find("sap_chain"); it != doc.end() && !it->is_null()) {
            m.sap_attenuation_db = r.number(*it, "attenuation_db");
        }
        m.validate();
        return m;
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        r.fail(e.what());
    }
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::io, "read failure on '" + path.string() + "'");
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io, "cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::io, "write failure on '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::io, "cannot rename into '" + path.string() + "'");
    }
}

}  // namespace cmimp
