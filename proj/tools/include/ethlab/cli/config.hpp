#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

namespace ethlab::cli {

/// Anything wrong with the configuration itself; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat "section.key = value" configuration read from INI text.
///
/// Every typed getter marks its key as consumed; reject_unknown() then lists
/// whatever was never asked for. Comments are whole-line only (# or ;).
class Config {
 public:
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void erase(const std::string& key);

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  /// Comma-separated numbers; an item "a:b:c" expands to a, a+c, ... up to b.
  std::vector<double> reals(const std::string& key) const;
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;
  std::vector<long> integers(const std::string& key) const;
  std::vector<long> integers(const std::string& key, std::vector<long> fallback) const;
  /// Items split on `separator`, trimmed, empty items dropped.
  std::vector<std::string> items(const std::string& key, char separator = ',') const;

  /// Throws ConfigError naming every key no getter asked for.
  void reject_unknown() const;
  void reset_consumed() const { consumed_.clear(); }

  /// {"section": {"key": "value"}} in key order.
  nlohmann::json echo() const;

 private:
  const std::string& raw(const std::string& key) const;
  boost::property_tree::ptree tree_;
  mutable std::set<std::string> consumed_;
};

double parse_real(const std::string& text, const std::string& key);
long parse_integer(const std::string& text, const std::string& key);
std::vector<double> parse_reals(const std::string& text, const std::string& key);

}  // namespace ethlab::cli
