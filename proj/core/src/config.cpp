#include "curvox/config.hpp"

#include <algorithm>
#include <cstdlib>

#include "curvox/util.hpp"

namespace curvox {

KeyValueFile KeyValueFile::parse_text(const std::string& text) {
  KeyValueFile out;
  int line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + " has no '=': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
    }
    if (out.has(key)) {
      throw ConfigError("duplicate config key: " + key);
    }
    out.items_.emplace_back(key, value);
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  return parse_text(read_text_file(path));
}

const std::string* KeyValueFile::find(const std::string& key) const {
  for (const auto& [k, v] : items_) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool KeyValueFile::has(const std::string& key) const { return find(key) != nullptr; }

const std::string& KeyValueFile::get(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) {
    throw ConfigError("missing config key: " + key);
  }
  return *v;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

namespace {

double to_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + " is not a number: " + s);
  }
  return v;
}

}  // namespace

double KeyValueFile::get_double(const std::string& key) const { return to_double(key, get(key)); }

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? to_double(key, *v) : fallback;
}

int KeyValueFile::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError("config key " + key + " is not an integer: " + get(key));
  }
  return i;
}

int KeyValueFile::get_int_or(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueFile::get_u64_or(const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  char* end = nullptr;
  const unsigned long long u = std::strtoull(v->c_str(), &end, 10);
  if (end == v->c_str() || *end != '\0') {
    throw ConfigError("config key " + key + " is not an unsigned integer: " + *v);
  }
  return u;
}

bool KeyValueFile::get_bool_or(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ConfigError("config key " + key + " is not a bool: " + *v);
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

void KeyValueFile::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

void KeyValueFile::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set_u64(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

std::string KeyValueFile::serialize() const {
  std::string out;
  for (const auto& [k, v] : items_) {
    out += k + " = " + v + "\n";
  }
  return out;
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  write_text_file(path, serialize());
}

void KeyValueFile::require_known_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : items_) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown config key: " + k);
    }
  }
}

}  // namespace curvox
