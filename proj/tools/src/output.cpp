#include "ethlab/cli/output.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace ethlab::cli {

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return "nan";
    return fmt::format("{:.17g}", *d);
  }
  if (const auto* i = std::get_if<long long>(&cell)) return fmt::format("{}", *i);
  return std::get<std::string>(cell);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary), path_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) {
    throw std::logic_error(fmt::format("{}: row has {} cells, header has {}", path_.string(), cells.size(), columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << format_cell(cells[i]);
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed for " + path_.string());
}

Outputs::Outputs(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path Outputs::prepare(const std::string& relative) {
  const auto path = root_ / relative;
  std::filesystem::create_directories(path.parent_path());
  if (std::find(files_.begin(), files_.end(), relative) == files_.end()) files_.push_back(relative);
  return path;
}

CsvWriter Outputs::csv(const std::string& relative, std::vector<std::string> header) {
  return CsvWriter(prepare(relative), std::move(header));
}

void Outputs::json(const std::string& relative, const nlohmann::json& value) {
  const auto path = prepare(relative);
  std::ofstream out(path, std::ios::binary);
  out << value.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

nlohmann::json Outputs::checksums() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : files_) {
    const auto path = root_ / f;
    list.push_back({{"path", f}, {"bytes", std::filesystem::file_size(path)}, {"sha256", sha256_file(path)}});
  }
  return list;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace ethlab::cli
