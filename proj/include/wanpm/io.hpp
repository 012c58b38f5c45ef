#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wanpm::io {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws ConfigError naming the column if absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep);

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace wanpm::io
