#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace lsq::csv {

// Splits one CSV record on commas. Quoting is not supported; none of the
// formats this project reads or writes needs it.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s);

bool parse_double(std::string_view s, double& out);

// Shortest representation that parses back to the identical double.
// Missing values (NaN) are written as an empty field.
std::string format(double v);

// Opens for writing (creating parent directories) or throws std::runtime_error naming the path.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

// Column position lookup for a header row; throws naming the missing column.
std::size_t column_of(const std::vector<std::string_view>& header, std::string_view name,
                      const std::filesystem::path& source);

} // namespace lsq::csv
