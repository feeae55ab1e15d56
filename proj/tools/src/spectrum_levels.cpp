#include <algorithm>
#include <cmath>

#include "ethlab/cli/experiments.hpp"
#include "ethlab/eth.hpp"

namespace ethlab::cli {

namespace {

Cell parity_cell(const std::optional<SectorLabel>& label) {
  if (label && label->parity) return static_cast<long long>(*label->parity);
  return std::string();
}

Cell charge_cell(const std::optional<SectorLabel>& label) {
  if (label && label->charge) return static_cast<long long>(*label->charge);
  return std::string();
}

std::string sector_name(const std::optional<SectorLabel>& label) { return label ? label->to_string() : "full"; }

class SpectrumPlan : public Plan {
 public:
  SpectrumPlan(const Config& config, std::uint64_t seed) : common_(parse_common(config, seed)) {
    h_ = build_hamiltonian(common_.hamiltonian);
    observables_ = parse_observables(config, "spectrum.observables", common_, &h_);
    entropy_sites_ = parse_sites(config, "spectrum.entropy_sites", common_.L());
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    const Spectrum s = solve(h_, common_.L(), common_.dim(), common_.symmetries, common_.decompose,
                             common_.diagonalize, threads);
    std::vector<std::string> header{"index", "energy", "parity", "charge"};
    std::vector<Eigen::VectorXd> columns;
    for (const auto& o : observables_) {
      header.push_back(o.label);
      columns.push_back(s.diagonal_elements(o.op));
    }
    for (int site : entropy_sites_) {
      header.push_back("S(" + std::to_string(site) + ")");
      const auto points = eigenstate_entropy_scatter(s, site, common_.L(), common_.dim());
      Eigen::VectorXd v(s.size());
      for (Index k = 0; k < s.size(); ++k) v(k) = points[k].value;
      columns.push_back(v);
    }
    auto csv = out.csv(prefix + "spectrum.csv", header);
    for (Index k = 0; k < s.size(); ++k) {
      const auto& label = s.blocks()[s.locate(k).block].sector;
      std::vector<Cell> row{static_cast<long long>(k), s.energies()(k), parity_cell(label), charge_cell(label)};
      for (const auto& c : columns) row.emplace_back(c(k));
      csv.row(row);
    }
    auto sectors = out.csv(prefix + "sectors.csv", {"block", "sector", "parity", "charge", "dim", "e_min", "e_max"});
    for (std::size_t b = 0; b < s.blocks().size(); ++b) {
      const auto& block = s.blocks()[b];
      const bool empty = block.size() == 0;
      sectors.row({static_cast<long long>(b), sector_name(block.sector), parity_cell(block.sector),
                   charge_cell(block.sector), static_cast<long long>(block.size()),
                   empty ? std::nan("") : block.energies.minCoeff(), empty ? std::nan("") : block.energies.maxCoeff()});
    }
    out.json(prefix + "summary.json", {{"full_dim", s.full_dim()},
                                       {"levels", s.size()},
                                       {"blocks", s.blocks().size()},
                                       {"e_min", s.energies().minCoeff()},
                                       {"e_max", s.energies().maxCoeff()}});
  }

 private:
  Common common_;
  OperatorMatrix h_;
  std::vector<Observable> observables_;
  std::vector<int> entropy_sites_;
};

class LevelsPlan : public Plan {
 public:
  LevelsPlan(const Config& config, std::uint64_t seed) : common_(parse_common(config, seed)) {
    unfold_.degree = static_cast<int>(config.integer("levels.degree", unfold_.degree));
    unfold_.trim = config.real("levels.trim", unfold_.trim);
    histogram_.bins = static_cast<int>(config.integer("levels.bins", histogram_.bins));
    histogram_.s_max = config.real("levels.s_max", histogram_.s_max);
    include_full_ = config.flag("levels.full", true);
    if (unfold_.degree < 1 || unfold_.degree > 40) throw ConfigError("levels.degree must be in 1..40");
    if (unfold_.trim < 0.0 || unfold_.trim >= 0.5) throw ConfigError("levels.trim must be in [0, 0.5)");
    if (histogram_.bins < 1 || histogram_.s_max <= 0.0) throw ConfigError("levels.bins and levels.s_max must be positive");
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    const System sys = build_system(common_, threads);
    const Spectrum& s = sys.spectrum;
    struct Item {
      std::string name;
      std::vector<double> energies;
    };
    std::vector<Item> items;
    const bool labelled = s.blocks().size() > 1 || s.blocks().front().sector.has_value();
    if (labelled) {
      for (const auto& b : s.blocks()) {
        items.push_back({sector_name(b.sector), std::vector<double>(b.energies.data(), b.energies.data() + b.size())});
      }
    }
    if (include_full_ || !labelled) {
      items.push_back({"full", std::vector<double>(s.energies().data(), s.energies().data() + s.size())});
    }

    nlohmann::json classes = nlohmann::json::array();
    auto table = out.csv(prefix + "classification.csv", {"sector", "levels", "class", "chi2_wigner", "chi2_poisson",
                                                         "low_confidence", "degenerate_fraction", "clamped"});
    for (const auto& item : items) {
      const std::string name = slug(item.name);
      try {
        const auto dist = spacing_distribution(item.energies, unfold_, histogram_);
        const auto c = classify_spacing(dist);
        auto csv = out.csv(prefix + "spacings_" + name + ".csv",
                           {"s_lo", "s_hi", "density", "goe", "gue", "gse", "poisson"});
        for (std::size_t b = 0; b < dist.density.size(); ++b) {
          const double mid = 0.5 * (dist.edges[b] + dist.edges[b + 1]);
          csv.row({dist.edges[b], dist.edges[b + 1], dist.density[b], surmise(1, mid), surmise(2, mid), surmise(4, mid),
                   poisson(mid)});
        }
        table.row({item.name, static_cast<long long>(item.energies.size()), std::string(to_string(c.kind)),
                   c.chi2_wigner, c.chi2_poisson, static_cast<long long>(c.low_confidence), dist.degenerate_fraction,
                   static_cast<long long>(dist.clamped)});
        classes.push_back({{"sector", item.name},
                           {"levels", item.energies.size()},
                           {"class", to_string(c.kind)},
                           {"chi2_wigner", c.chi2_wigner},
                           {"chi2_poisson", c.chi2_poisson},
                           {"low_confidence", c.low_confidence},
                           {"degenerate_fraction", dist.degenerate_fraction},
                           {"mean_spacing", dist.mean_spacing},
                           {"clamped", dist.clamped}});
      } catch (const UnfoldError& e) {
        table.row({item.name, static_cast<long long>(item.energies.size()), std::string("Unavailable"), std::nan(""),
                   std::nan(""), 1LL, std::nan(""), 0LL});
        classes.push_back({{"sector", item.name},
                           {"levels", item.energies.size()},
                           {"class", "Unavailable"},
                           {"reason", e.what()}});
      }
    }
    out.json(prefix + "classification.json", classes);
  }

 private:
  Common common_;
  UnfoldOptions unfold_;
  HistogramOptions histogram_;
  bool include_full_ = true;
};

}  // namespace

std::unique_ptr<Plan> plan_spectrum(const Config& config, std::uint64_t seed) {
  return std::make_unique<SpectrumPlan>(config, seed);
}

std::unique_ptr<Plan> plan_levels(const Config& config, std::uint64_t seed) {
  return std::make_unique<LevelsPlan>(config, seed);
}

}  // namespace ethlab::cli
