#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cil {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` settings. `#` starts a comment, blank lines are skipped,
/// and a key may appear once per file. Later `set` calls override.
class Config {
  public:
    Config() = default;

    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

// Value parsers. Each names the key in its error message.
double parse_real(const std::string& key, const std::string& text);
std::int64_t parse_integer(const std::string& key, const std::string& text);
std::uint64_t parse_unsigned(const std::string& key, const std::string& text);
/// Comma-separated reals.
std::vector<double> parse_reals(const std::string& key, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

} // namespace cil
