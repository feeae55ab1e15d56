#include <algorithm>
#include <cctype>

#include "ethlab/cli/experiments.hpp"
#include "ethlab/cli/selector.hpp"

namespace ethlab::cli {

namespace {

// Sparse assembly above this is refused before any work starts.
constexpr Index kMaxFullDim = Index{1} << 20;

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Spectrum: return "spectrum";
    case Experiment::Levels: return "levels";
    case Experiment::Evolve: return "evolve";
    case Experiment::Eth: return "eth";
    case Experiment::Thermal: return "thermal";
    case Experiment::ChargeSpread: return "chargespread";
    case Experiment::Sweep: return "sweep";
  }
  return "?";
}

std::optional<Experiment> parse_experiment(const std::string& name) {
  for (auto e : {Experiment::Spectrum, Experiment::Levels, Experiment::Evolve, Experiment::Eth, Experiment::Thermal,
                 Experiment::ChargeSpread, Experiment::Sweep}) {
    if (name == to_string(e)) return e;
  }
  return std::nullopt;
}

Common parse_common(const Config& config, std::uint64_t seed) {
  Common c;
  c.seed = seed;
  auto& h = c.hamiltonian;
  const std::string kind = config.text("hamiltonian.kind", "qubit");
  if (kind == "qubit") {
    h.kind = ChainKind::Qubit;
  } else if (kind == "qutrit") {
    h.kind = ChainKind::Qutrit;
  } else {
    throw ConfigError("hamiltonian.kind must be qubit or qutrit, got '" + kind + "'");
  }
  const long L = config.integer("hamiltonian.L");
  if (L < 2 || L > 64) throw ConfigError("hamiltonian.L must be in 2..64");
  h.L = static_cast<int>(L);
  h.J = config.real("hamiltonian.J", h.J);
  h.normalize_by_L = config.flag("hamiltonian.normalize_by_L", true);
  if (h.kind == ChainKind::Qubit) {
    h.hx = config.real("hamiltonian.hx", h.hx);
    h.hz = config.real("hamiltonian.hz", h.hz);
  } else {
    h.h1 = config.real("hamiltonian.h1", h.h1);
    h.h2 = config.real("hamiltonian.h2", h.h2);
    h.h3 = config.real("hamiltonian.h3", h.h3);
    h.a = config.real("hamiltonian.a", h.a);
    h.spread_mean = config.real("hamiltonian.spread_mean", h.spread_mean);
    h.spread_width = config.real("hamiltonian.spread_width", h.spread_width);
    h.seed = config.unsigned_integer("hamiltonian.spread_seed", 0);
  }
  try {
    h.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("hamiltonian: ") + e.what());
  }

  const std::vector<std::string> defaults{h.kind == ChainKind::Qubit ? "parity" : "charge"};
  const auto names = config.has("sectors.symmetries") ? config.items("sectors.symmetries") : defaults;
  for (const auto& n : names) {
    if (n == "none") continue;
    if (n == "parity") {
      c.symmetries.push_back(Symmetry::Parity);
    } else if (n == "charge") {
      if (h.kind != ChainKind::Qutrit) throw ConfigError("sectors.symmetries: charge needs a qutrit chain");
      c.symmetries.push_back(Symmetry::Charge);
    } else {
      throw ConfigError("sectors.symmetries: unknown symmetry '" + n + "' (none, parity, charge)");
    }
  }
  const bool has_parity = std::find(c.symmetries.begin(), c.symmetries.end(), Symmetry::Parity) != c.symmetries.end();
  const bool has_charge = std::find(c.symmetries.begin(), c.symmetries.end(), Symmetry::Charge) != c.symmetries.end();
  if (config.has("sectors.parity")) {
    const long p = config.integer("sectors.parity");
    if (!has_parity || (p != 1 && p != -1)) throw ConfigError("sectors.parity must be +1 or -1 with parity symmetry");
    c.decompose.parity = static_cast<int>(p);
  }
  if (config.has("sectors.charges")) {
    if (!has_charge) throw ConfigError("sectors.charges needs charge symmetry");
    std::vector<int> charges;
    for (long q : config.integers("sectors.charges")) {
      if (q < 0 || q > L) throw ConfigError("sectors.charges: charge " + std::to_string(q) + " outside 0..L");
      charges.push_back(static_cast<int>(q));
    }
    c.decompose.charges = charges;
  }
  const long limit = config.integer("sectors.dense_limit", c.diagonalize.dense_limit);
  if (limit < 1) throw ConfigError("sectors.dense_limit must be positive");
  c.diagonalize.dense_limit = limit;
  if (h.full_dim() > kMaxFullDim) {
    throw DimensionLimitError("Hilbert space dimension " + std::to_string(h.full_dim()) + " exceeds " +
                              std::to_string(kMaxFullDim));
  }
  return c;
}

System build_system(const Common& common, unsigned threads) {
  System s;
  s.h = build_hamiltonian(common.hamiltonian);
  s.spectrum = solve(s.h, common.L(), common.dim(), common.symmetries, common.decompose, common.diagonalize, threads);
  return s;
}

std::vector<Observable> parse_observables(const Config& config, const std::string& key, const Common& common,
                                          const OperatorMatrix* h) {
  std::vector<Observable> out;
  if (!config.has(key)) return out;
  for (const auto& expr : config.items(key)) {
    try {
      out.push_back({selector_label(expr), operator_selector(expr, common.L(), common.dim(), h)});
    } catch (const SelectorError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  return out;
}

std::vector<int> parse_sites(const Config& config, const std::string& key, int L) {
  std::vector<int> out;
  if (!config.has(key)) return out;
  for (long s : config.integers(key)) {
    if (s < 1 || s > L) throw ConfigError(key + ": site " + std::to_string(s) + " outside 1.." + std::to_string(L));
    out.push_back(static_cast<int>(s));
  }
  return out;
}

std::string slug(const std::string& label) {
  std::string out;
  bool gap = false;
  for (char ch : label) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (gap && !out.empty()) out += '_';
      out += static_cast<char>(std::tolower(c));
      gap = false;
    } else if (ch == '+' || ch == '-') {
      if (!out.empty()) out += '_';
      out += ch == '+' ? "plus" : "minus";
      gap = true;
    } else {
      gap = true;
    }
  }
  return out.empty() ? "x" : out;
}

std::unique_ptr<Plan> plan_experiment(Experiment experiment, const Config& config, std::uint64_t seed) {
  std::unique_ptr<Plan> plan;
  switch (experiment) {
    case Experiment::Spectrum: plan = plan_spectrum(config, seed); break;
    case Experiment::Levels: plan = plan_levels(config, seed); break;
    case Experiment::Evolve: plan = plan_evolve(config, seed); break;
    case Experiment::Eth: plan = plan_eth(config, seed); break;
    case Experiment::Thermal: plan = plan_thermal(config, seed); break;
    case Experiment::ChargeSpread: plan = plan_chargespread(config, seed); break;
    case Experiment::Sweep: return plan_sweep(config, seed);
  }
  config.reject_unknown();
  return plan;
}

}  // namespace ethlab::cli
