#include <sstream>

#include <fmt/format.h>

#include "ethlab/cli/experiments.hpp"

namespace ethlab::cli {

namespace {

std::vector<std::string> point_values(const std::string& point) {
  std::string spaced = point;
  for (char& c : spaced) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(spaced);
  std::vector<std::string> out;
  for (std::string v; in >> v;) out.push_back(v);
  return out;
}

class SweepPlan : public Plan {
 public:
  SweepPlan(const Config& config, std::uint64_t seed) {
    const std::string name = config.text("sweep.experiment");
    const auto inner = parse_experiment(name);
    if (!inner || *inner == Experiment::Sweep) throw ConfigError("sweep.experiment: '" + name + "' cannot be swept");
    parameters_ = config.items("sweep.parameters");
    if (parameters_.empty()) throw ConfigError("sweep.parameters is empty");
    for (const auto& p : parameters_) {
      if (p.find('.') == std::string::npos || p.starts_with("run.") || p.starts_with("sweep.")) {
        throw ConfigError("sweep.parameters: '" + p + "' is not a section.key of the swept experiment");
      }
    }
    for (const auto& point : config.items("sweep.points", '|')) {
      auto values = point_values(point);
      if (values.size() != parameters_.size()) {
        throw ConfigError(fmt::format("sweep.points: '{}' has {} values for {} parameters", point, values.size(),
                                      parameters_.size()));
      }
      Config copy = config;
      for (std::size_t k = 0; k < parameters_.size(); ++k) copy.set(parameters_[k], values[k]);
      try {
        plans_.push_back(plan_experiment(*inner, copy, seed));
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("sweep point {} ({}): {}", points_.size(), point, e.what()));
      }
      points_.push_back(std::move(values));
    }
    if (points_.empty()) throw ConfigError("sweep.points is empty");
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    std::vector<std::string> header{"point", "directory"};
    header.insert(header.end(), parameters_.begin(), parameters_.end());
    {
      auto csv = out.csv(prefix + "sweep.csv", header);
      for (std::size_t i = 0; i < points_.size(); ++i) {
        std::vector<Cell> row{static_cast<long long>(i), fmt::format("point_{}", i)};
        for (const auto& v : points_[i]) row.emplace_back(v);
        csv.row(row);
      }
    }
    for (std::size_t i = 0; i < plans_.size(); ++i) plans_[i]->run(out, prefix + fmt::format("point_{}/", i), threads);
  }

 private:
  std::vector<std::string> parameters_;
  std::vector<std::vector<std::string>> points_;
  std::vector<std::unique_ptr<Plan>> plans_;
};

}  // namespace

std::unique_ptr<Plan> plan_sweep(const Config& config, std::uint64_t seed) {
  return std::make_unique<SweepPlan>(config, seed);
}

}  // namespace ethlab::cli
