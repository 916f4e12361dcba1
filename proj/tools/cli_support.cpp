#include "cli_support.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cli {

void check(cmimp_status status, const std::string& context) {
    if (status == CMIMP_OK) return;
    std::string msg = cmimp_status_name(status);
    msg += ": ";
    if (!context.empty()) msg += context + ": ";
    msg += cmimp_last_error();
    throw Failure(msg);
}

std::string take(char* s) {
    std::string out = s ? s : "";
    cmimp_string_free(s);
    return out;
}

bool same_grid(const cmimp_grid* a, const cmimp_grid* b) {
    const std::size_t n = cmimp_grid_size(a);
    if (n != cmimp_grid_size(b)) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (cmimp_grid_point(a, i) != cmimp_grid_point(b, i)) return false;
    }
    return true;
}

SessionConfig SessionConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Failure(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Failure(path.string() + ": config must be a JSON object");
    SessionConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "grid") c.grid = value.get<std::string>();
            else if (key == "z0_ohm") c.z0_ohm = value.get<double>();
            else if (key == "z_std_ohm") c.z_std_ohm = value.get<double>();
            else if (key == "tol_singular") c.tol_singular = value.get<double>();
            else if (key == "tol_cond") c.tol_cond = value.get<double>();
            else if (key == "threshold_db") c.threshold_db = value.get<double>();
            else if (key == "output_dir") c.output_dir = value.get<std::string>();
            else if (key == "verbosity") c.verbosity = value.get<int>();
            else throw Failure(path.string() + ": unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Failure(path.string() + ": " + e.what());
    }
    return c;
}

void SessionConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Failure(std::string(what) + " must be positive");
    };
    if (z0_ohm) positive(*z0_ohm, "z0");
    positive(z_std_ohm, "z_std");
    positive(tol_singular, "tol_singular");
    positive(tol_cond, "tol_cond");
    positive(threshold_db, "threshold");
    if (tol_cond < tol_singular) throw Failure("tol_cond must not be below tol_singular");
    cmimp_grid* g = nullptr;
    check(cmimp_grid_parse(grid.c_str(), &g), "grid '" + grid + "'");
    cmimp_grid_free(g);
}

std::filesystem::path SessionConfig::output_path(const std::string& name) const {
    std::filesystem::path p(name);
    if (output_dir.empty() || p.is_absolute()) return p;
    return std::filesystem::path(output_dir) / p;
}

void write_output(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    check(cmimp_write_file(path.string().c_str(), content.data(), content.size()));
}

std::pair<std::string, std::string> split_labeled(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) return {std::filesystem::path(arg).stem().string(), arg};
    if (eq == 0 || eq + 1 == arg.size()) throw Failure("expected label=path, got '" + arg + "'");
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

namespace {

double to_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw Failure("bad number '" + s + "'");
    return v;
}

}  // namespace

std::vector<std::pair<double, double>> parse_bands(const std::string& spec) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw Failure("band '" + item + "' is not lo:hi");
        out.emplace_back(to_double(item.substr(0, colon)), to_double(item.substr(colon + 1)));
    }
    if (out.empty()) throw Failure("empty band list");
    return out;
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace cli
