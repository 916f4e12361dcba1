#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cmimp/characterization.hpp"
#include "cmimp/extraction.hpp"
#include "cmimp/network.hpp"
#include "cmimp/simulator.hpp"

namespace cmimp {

enum class FrequencyUnit { hz, khz, mhz, ghz };
enum class TouchstoneFormat { ri, ma, db };

const char* to_string(FrequencyUnit u) noexcept;
const char* to_string(TouchstoneFormat f) noexcept;
FrequencyUnit frequency_unit_from_string(std::string_view text);
TouchstoneFormat touchstone_format_from_string(std::string_view text);

/// One-port Touchstone (version 1) document.
struct TouchstoneDocument {
    FrequencyUnit unit = FrequencyUnit::ghz;
    TouchstoneFormat format = TouchstoneFormat::ma;
    double reference_ohm = 50.0;
    std::vector<std::string> comments;  // text after '!', in file order
    std::vector<double> frequency_hz;
    std::vector<Complex> values;

    ComplexSweep to_sweep() const;
};

/// Parses one-port Touchstone v1 text. Every failure is a ParseError
/// carrying `source_name` and the 1-based line number.
TouchstoneDocument parse_touchstone(std::string_view text, const std::string& source_name = {});

struct TouchstoneWriteOptions {
    TouchstoneFormat format = TouchstoneFormat::ri;
    FrequencyUnit unit = FrequencyUnit::hz;
    int digits = 9;
    std::vector<std::string> comments;
};

std::string write_touchstone(const ComplexSweep& sweep, const ReferenceImpedance& z0,
                             const TouchstoneWriteOptions& options = {});

/// Impedance CSV, columns
///   frequency_hz,re_ohm,im_ohm,mag_ohm,phase_deg,flags
/// with empty numeric fields on SINGULAR rows.
std::string write_impedance_csv(const ImpedanceSweep& sweep, int digits = 9);
ImpedanceSweep parse_impedance_csv(std::string_view text, const std::string& source_name = {});

/// Calibration and model files are JSON documents with a format tag and a
/// version number; doubles are written in shortest round-trip form.
std::string write_calibration(const KCalibration& cal);
KCalibration parse_calibration(std::string_view text, const std::string& source_name = {});

std::string write_model(const CircuitModel& model);
CircuitModel parse_model(std::string_view text, const std::string& source_name = {});

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cmimp
