#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ethlab/cli/config.hpp"
#include "ethlab/cli/output.hpp"
#include "ethlab/lattice.hpp"
#include "ethlab/sectors.hpp"
#include "ethlab/spectral.hpp"

namespace ethlab::cli {

enum class Experiment { Spectrum, Levels, Evolve, Eth, Thermal, ChargeSpread, Sweep };

const char* to_string(Experiment e);
std::optional<Experiment> parse_experiment(const std::string& name);

/// [hamiltonian] and [sectors] plus the master seed.
struct Common {
  HamiltonianSpec hamiltonian;
  std::vector<Symmetry> symmetries;
  DecomposeOptions decompose;
  DiagonalizeOptions diagonalize;
  std::uint64_t seed = 0;

  int L() const { return hamiltonian.L; }
  int dim() const { return hamiltonian.site_dim(); }
};

Common parse_common(const Config& config, std::uint64_t seed);

struct System {
  OperatorMatrix h;
  Spectrum spectrum;
};

System build_system(const Common& common, unsigned threads);

/// A named observable parsed from a selector expression.
struct Observable {
  std::string label;
  OperatorMatrix op;
};

std::vector<Observable> parse_observables(const Config& config, const std::string& key, const Common& common,
                                          const OperatorMatrix* h);
std::vector<int> parse_sites(const Config& config, const std::string& key, int L);

/// Lowercase alphanumerics with runs of anything else collapsed to '_'.
std::string slug(const std::string& label);

/// A fully validated experiment. Construction reads and checks every key;
/// run() does the computation and writes files under `prefix`.
class Plan {
 public:
  virtual ~Plan() = default;
  virtual void run(Outputs& outputs, const std::string& prefix, unsigned threads) const = 0;
};

/// Parses the experiment's keys and rejects any the experiment does not use.
std::unique_ptr<Plan> plan_experiment(Experiment experiment, const Config& config, std::uint64_t seed);

std::unique_ptr<Plan> plan_spectrum(const Config& config, std::uint64_t seed);
std::unique_ptr<Plan> plan_levels(const Config& config, std::uint64_t seed);
std::unique_ptr<Plan> plan_evolve(const Config& config, std::uint64_t seed);
std::unique_ptr<Plan> plan_eth(const Config& config, std::uint64_t seed);
std::unique_ptr<Plan> plan_thermal(const Config& config, std::uint64_t seed);
std::unique_ptr<Plan> plan_chargespread(const Config& config, std::uint64_t seed);
std::unique_ptr<Plan> plan_sweep(const Config& config, std::uint64_t seed);

}  // namespace ethlab::cli
