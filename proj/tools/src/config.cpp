#include "ethlab/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

namespace ethlab::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char separator) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, separator)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Walks the two-level tree as (section.key, value).
template <class Fn>
void for_each_key(const pt::ptree& tree, Fn&& fn) {
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      fn(section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) fn(section + "." + key, value.data());
  }
}

}  // namespace

double parse_real(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return value;
}

long parse_integer(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  long value = 0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_reals(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (item.find(':') == std::string::npos) {
      out.push_back(parse_real(item, key));
      continue;
    }
    if (parts.size() != 3) throw ConfigError(key + ": range '" + item + "' must be start:stop:step");
    const double a = parse_real(parts[0], key);
    const double b = parse_real(parts[1], key);
    const double step = parse_real(parts[2], key);
    if (step == 0.0 || (b - a) / step < 0.0) throw ConfigError(key + ": range '" + item + "' never reaches its end");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 10'000'000) throw ConfigError(key + ": range '" + item + "' is too long");
    for (long i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
  }
  return out;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  try {
    pt::read_ini(in, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  if (c.tree_.empty()) throw ConfigError("config is empty");
  return c;
}

bool Config::has(const std::string& key) const { return tree_.get_child_optional(key).has_value(); }

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

void Config::erase(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    tree_.erase(key);
    return;
  }
  if (auto section = tree_.get_child_optional(key.substr(0, dot))) section->erase(key.substr(dot + 1));
}

const std::string& Config::raw(const std::string& key) const {
  const auto child = tree_.get_child_optional(key);
  if (!child || !child->empty()) throw ConfigError("missing required key " + key);
  consumed_.insert(key);
  return child->data();
}

std::string Config::text(const std::string& key) const {
  std::string v = trim(raw(key));
  if (v.empty()) throw ConfigError(key + ": empty value");
  return v;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double Config::real(const std::string& key) const { return parse_real(raw(key), key); }

double Config::real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

long Config::integer(const std::string& key) const { return parse_integer(raw(key), key); }

long Config::integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

std::uint64_t Config::unsigned_integer(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string t = trim(raw(key));
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + t + "'");
  }
  return value;
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = trim(raw(key));
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
  auto v = parse_reals(raw(key), key);
  if (v.empty()) throw ConfigError(key + ": empty list");
  return v;
}

std::vector<double> Config::reals(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? reals(key) : fallback;
}

std::vector<long> Config::integers(const std::string& key) const {
  std::vector<long> out;
  for (double v : reals(key)) {
    if (v != std::round(v)) throw ConfigError(key + ": expected integers");
    out.push_back(static_cast<long>(std::llround(v)));
  }
  return out;
}

std::vector<long> Config::integers(const std::string& key, std::vector<long> fallback) const {
  return has(key) ? integers(key) : fallback;
}

std::vector<std::string> Config::items(const std::string& key, char separator) const {
  return split(raw(key), separator);
}

void Config::reject_unknown() const {
  std::vector<std::string> unknown;
  for_each_key(tree_, [&](const std::string& key, const std::string&) {
    if (!consumed_.contains(key)) unknown.push_back(key);
  });
  if (unknown.empty()) return;
  std::string msg = "unknown config key";
  msg += unknown.size() > 1 ? "s: " : ": ";
  for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
  throw ConfigError(msg);
}

nlohmann::json Config::echo() const {
  nlohmann::json out = nlohmann::json::object();
  for_each_key(tree_, [&](const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      out[key] = trim(value);
    } else {
      out[key.substr(0, dot)][key.substr(dot + 1)] = trim(value);
    }
  });
  return out;
}

}  // namespace ethlab::cli
