#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers and writers.
namespace cmimp::text {

std::vector<std::string_view> lines(std::string_view input);
std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);
std::string upper(std::string_view s);

// Whole-token finite double, nullopt otherwise.
std::optional<double> parse_double(std::string_view token);

// printf "%.<digits>g" with negative zero printed as 0.
std::string fixed_digits(double v, int digits);
// Shortest representation that round-trips.
std::string shortest(double v);

}  // namespace cmimp::text
