#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace curvox {

// Flat `key = value` config file. Lines starting with '#' and blank lines
// are ignored; duplicate keys are rejected. Serialization preserves
// insertion order so snapshots are deterministic.
class KeyValueFile {
 public:
  static KeyValueFile parse_text(const std::string& text);
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);
  void set_u64(const std::string& key, std::uint64_t value);
  void set_bool(const std::string& key, bool value);

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  // Rejects any key not in `allowed` (typo safety for user configs).
  void require_known_keys(const std::vector<std::string>& allowed) const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
  const std::string* find(const std::string& key) const;
};

}  // namespace curvox
