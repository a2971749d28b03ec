#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvox {

// Error categories map 1:1 onto the CLI exit codes: ConfigError -> 2,
// IoError -> 3, NumericError (non-finite abort) -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Round-trip-exact formatting for doubles ("%.17g"). All CSV and report
// output goes through this so byte-identical reproduction holds.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, const void* data, std::size_t size);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

std::string join_ints(const std::vector<int>& v);  // "a,b,c"
std::vector<int> parse_int_list(const std::string& s);

}  // namespace curvox
