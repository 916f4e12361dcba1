#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "cmimp/error.hpp"
#include "cmimp/sweep_io.hpp"
#include "text_util.hpp"

namespace cmimp {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double unit_scale(FrequencyUnit u) {
    switch (u) {
    case FrequencyUnit::hz: return 1.0;
    case FrequencyUnit::khz: return 1e3;
    case FrequencyUnit::mhz: return 1e6;
    case FrequencyUnit::ghz: return 1e9;
    }
    return 1.0;
}

}  // namespace

const char* to_string(FrequencyUnit u) noexcept {
    switch (u) {
    case FrequencyUnit::hz: return "HZ";
    case FrequencyUnit::khz: return "KHZ";
    case FrequencyUnit::mhz: return "MHZ";
    case FrequencyUnit::ghz: return "GHZ";
    }
    return "?";
}

const char* to_string(TouchstoneFormat f) noexcept {
    switch (f) {
    case TouchstoneFormat::ri: return "RI";
    case TouchstoneFormat::ma: return "MA";
    case TouchstoneFormat::db: return "DB";
    }
    return "?";
}

FrequencyUnit frequency_unit_from_string(std::string_view text) {
    const std::string u = text::upper(text);
    for (auto unit : {FrequencyUnit::hz, FrequencyUnit::khz, FrequencyUnit::mhz, FrequencyUnit::ghz}) {
        if (u == to_string(unit)) return unit;
    }
    throw Error(ErrorCode::invalid_argument, "unknown frequency unit '" + std::string(text) + "'");
}

TouchstoneFormat touchstone_format_from_string(std::string_view text) {
    const std::string u = text::upper(text);
    for (auto f : {TouchstoneFormat::ri, TouchstoneFormat::ma, TouchstoneFormat::db}) {
        if (u == to_string(f)) return f;
    }
    throw Error(ErrorCode::invalid_argument, "unknown Touchstone data format '" + std::string(text) + "'");
}

ComplexSweep TouchstoneDocument::to_sweep() const {
    return ComplexSweep(FrequencyGrid::from_points(frequency_hz), values, SweepRole::reflection);
}

TouchstoneDocument parse_touchstone(std::string_view input, const std::string& source_name) {
    TouchstoneDocument doc;
    bool have_options = false;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) { return ParseError(source_name, line_no, what); };

    for (std::string_view raw : text::lines(input)) {
        ++line_no;
        std::string_view line = raw;
        if (auto bang = line.find('!'); bang != std::string_view::npos) {
            doc.comments.emplace_back(line.substr(bang + 1));
            line = line.substr(0, bang);
        }
        line = text::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            throw fail("Touchstone version 2 keyword found; only version 1 files are supported");
        }
        if (line.front() == '#') {
            if (have_options) throw fail("duplicate option line");
            if (!doc.frequency_hz.empty()) throw fail("option line must precede the data");
            have_options = true;
            auto tokens = text::split_ws(line.substr(1));
            for (std::size_t t = 0; t < tokens.size(); ++t) {
                const std::string tok = text::upper(tokens[t]);
                if (tok == "HZ" || tok == "KHZ" || tok == "MHZ" || tok == "GHZ") {
                    doc.unit = frequency_unit_from_string(tok);
                } else if (tok == "RI" || tok == "MA" || tok == "DB") {
                    doc.format = touchstone_format_from_string(tok);
                } else if (tok == "S") {
                    // the only supported parameter type
                } else if (tok == "Y" || tok == "Z" || tok == "H" || tok == "G") {
                    throw fail("parameter type '" + tok + "' is not supported; expected S");
                } else if (tok == "R") {
                    if (t + 1 >= tokens.size()) throw fail("option 'R' needs a resistance value");
                    auto r = text::parse_double(tokens[++t]);
                    if (!r || !(*r > 0.0)) throw fail("reference resistance must be a positive number");
                    doc.reference_ohm = *r;
                } else {
                    throw fail("unknown option token '" + std::string(tokens[t]) + "'");
                }
            }
            continue;
        }

        if (!have_options) throw fail("data row before the option line");
        auto tokens = text::split_ws(line);
        if (tokens.size() != 3) {
            throw fail("expected 3 columns for a one-port row, found " + std::to_string(tokens.size()));
        }
        double v[3];
        for (int c = 0; c < 3; ++c) {
            auto parsed = text::parse_double(tokens[static_cast<std::size_t>(c)]);
            if (!parsed) throw fail("column " + std::to_string(c + 1) + " is not a finite number");
            v[c] = *parsed;
        }
        const double f = v[0] * unit_scale(doc.unit);
        if (!(f > 0.0) || !std::isfinite(f)) throw fail("frequency must be positive");
        if (!doc.frequency_hz.empty() && !(f > doc.frequency_hz.back())) {
            throw fail("frequencies must be strictly increasing");
        }
        Complex value;
        switch (doc.format) {
        case TouchstoneFormat::ri: value = {v[1], v[2]}; break;
        case TouchstoneFormat::ma: value = std::polar(v[1], v[2] * kDegToRad); break;
        case TouchstoneFormat::db: value = std::polar(std::pow(10.0, v[1] / 20.0), v[2] * kDegToRad); break;
        }
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
            throw fail("value does not convert to a finite complex number");
        }
        doc.frequency_hz.push_back(f);
        doc.values.push_back(value);
    }
    line_no = 0;
    if (!have_options) throw fail("missing option line");
    if (doc.frequency_hz.empty()) throw fail("no data rows");
    return doc;
}

std::string write_touchstone(const ComplexSweep& sweep, const ReferenceImpedance& z0,
                             const TouchstoneWriteOptions& options) {
    if (options.digits < 1 || options.digits > 17) {
        throw Error(ErrorCode::invalid_argument, "Touchstone digits must be in [1, 17]");
    }
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const Complex v = sweep[i];
        if ((sweep.point_flags()[i] & flags::singular) || !std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw Error(ErrorCode::invalid_argument,
                        "cannot write Touchstone: point " + std::to_string(i) + " has no finite value");
        }
    }
    std::string out;
    for (const auto& c : options.comments) {
        out += '!';
        out += c;
        out += '\n';
    }
    out += "# ";
    out += to_string(options.unit);
    out += " S ";
    out += to_string(options.format);
    out += " R ";
    out += text::shortest(z0.ohms());
    out += '\n';

    const double scale = unit_scale(options.unit);
    const int d = options.digits;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const Complex v = sweep[i];
        double x = 0.0;
        double y = 0.0;
        switch (options.format) {
        case TouchstoneFormat::ri: x = v.real(); y = v.imag(); break;
        case TouchstoneFormat::ma: x = std::abs(v); y = std::arg(v) / kDegToRad; break;
        case TouchstoneFormat::db:
            x = 20.0 * std::log10(std::max(std::abs(v), 1e-300));
            y = std::arg(v) / kDegToRad;
            break;
        }
        out += text::fixed_digits(sweep.grid()[i] / scale, d);
        out += ' ';
        out += text::fixed_digits(x, d);
        out += ' ';
        out += text::fixed_digits(y, d);
        out += '\n';
    }
    return out;
}

}  // namespace cmimp
