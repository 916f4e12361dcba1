#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmimp/cmimp.h"

namespace cli {

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_singular = 2;
inline constexpr int exit_inconsistent = 3;

class Failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws Failure with the library's last error when status is not OK.
void check(cmimp_status status, const std::string& context = {});

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const noexcept { Free(p); }
};

using Grid = std::unique_ptr<cmimp_grid, Deleter<cmimp_grid, cmimp_grid_free>>;
using Sweep = std::unique_ptr<cmimp_sweep, Deleter<cmimp_sweep, cmimp_sweep_free>>;
using Calibration = std::unique_ptr<cmimp_calibration, Deleter<cmimp_calibration, cmimp_calibration_free>>;
using Impedance = std::unique_ptr<cmimp_impedance, Deleter<cmimp_impedance, cmimp_impedance_free>>;
using Model = std::unique_ptr<cmimp_model, Deleter<cmimp_model, cmimp_model_free>>;
using Report = std::unique_ptr<cmimp_report, Deleter<cmimp_report, cmimp_report_free>>;

// Takes ownership of a string returned by the library.
std::string take(char* s);

bool same_grid(const cmimp_grid* a, const cmimp_grid* b);

struct SessionConfig {
    std::string grid = "150e3:30e6:201:log";
    std::optional<double> z0_ohm;
    double z_std_ohm = 50.0;
    double tol_singular = 1e-12;
    double tol_cond = 1e-6;
    double threshold_db = 3.0;
    std::string output_dir;
    int verbosity = 1;

    static SessionConfig load(const std::filesystem::path& path);
    void validate() const;
    std::filesystem::path output_path(const std::string& name) const;
};

void write_output(const std::filesystem::path& path, const std::string& content);

// "label=path" -> {label, path}; a bare path is labeled by its stem.
std::pair<std::string, std::string> split_labeled(const std::string& arg);

// "lo:hi,lo:hi"
std::vector<std::pair<double, double>> parse_bands(const std::string& spec);

std::string utc_timestamp();

}  // namespace cli
