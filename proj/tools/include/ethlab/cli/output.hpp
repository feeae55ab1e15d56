#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ethlab::cli {

using Cell = std::variant<double, long long, std::string>;

/// Doubles at 17 significant digits so every value round-trips.
std::string format_cell(const Cell& cell);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<Cell>& cells);
  std::size_t columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
};

/// Files written under one output directory, remembered for the manifest.
class Outputs {
 public:
  explicit Outputs(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }

  CsvWriter csv(const std::string& relative, std::vector<std::string> header);
  void json(const std::string& relative, const nlohmann::json& value);
  const std::vector<std::string>& files() const { return files_; }

  /// [{"path", "bytes", "sha256"}] for every recorded file.
  nlohmann::json checksums() const;

 private:
  std::filesystem::path prepare(const std::string& relative);
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

std::string sha256_file(const std::filesystem::path& path);

}  // namespace ethlab::cli
