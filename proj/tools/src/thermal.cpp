#include <algorithm>
#include <cmath>

#include "ethlab/cli/experiments.hpp"
#include "ethlab/ensembles.hpp"
#include "ethlab/entanglement.hpp"

namespace ethlab::cli {

namespace {

class ThermalPlan : public Plan {
 public:
  ThermalPlan(const Config& config, std::uint64_t seed) : common_(parse_common(config, seed)) {
    h_ = build_hamiltonian(common_.hamiltonian);
    observables_ = parse_observables(config, "thermal.observables", common_, &h_);
    if (config.has("thermal.entropy_site")) {
      const auto sites = parse_sites(config, "thermal.entropy_site", common_.L());
      if (sites.size() != 1) throw ConfigError("thermal.entropy_site takes one site");
      entropy_site_ = sites.front();
    }
    if (observables_.empty() && !entropy_site_) throw ConfigError("thermal needs observables or an entropy site");
    if (config.has("thermal.energies")) energies_ = config.reals("thermal.energies");
    const bool charge_resolved = common_.hamiltonian.kind == ChainKind::Qutrit &&
                                 std::find(common_.symmetries.begin(), common_.symmetries.end(), Symmetry::Charge) !=
                                     common_.symmetries.end() &&
                                 !common_.decompose.charges;
    if (config.has("thermal.charges")) {
      if (!charge_resolved) throw ConfigError("thermal.charges needs a charge-resolved qutrit spectrum over all sectors");
      charges_ = config.reals("thermal.charges");
    }
    micro_half_width_ = config.real("thermal.micro_half_width", micro_half_width_);
    if (micro_half_width_ <= 0.0) throw ConfigError("thermal.micro_half_width must be positive");
    if (config.has("thermal.surface_betas") != config.has("thermal.surface_mus")) {
      throw ConfigError("thermal.surface_betas and thermal.surface_mus go together");
    }
    if (config.has("thermal.surface_betas")) {
      if (!charge_resolved) throw ConfigError("a (beta, mu) surface needs a charge-resolved qutrit spectrum");
      betas_ = config.reals("thermal.surface_betas");
      mus_ = config.reals("thermal.surface_mus");
      if (!std::is_sorted(betas_.begin(), betas_.end()) || !std::is_sorted(mus_.begin(), mus_.end())) {
        throw ConfigError("surface grids must be ascending");
      }
    }
    if (energies_.empty() && betas_.empty()) throw ConfigError("thermal needs thermal.energies or a surface grid");
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    const System sys = build_system(common_, threads);
    const Spectrum& s = sys.spectrum;
    std::vector<Eigen::VectorXd> diagonals;
    for (const auto& o : observables_) diagonals.push_back(s.diagonal_elements(o.op));
    std::optional<EigenstateReductions> table;
    if (entropy_site_) table = eigenstate_reductions(s, {*entropy_site_}, common_.L(), common_.dim());
    std::optional<Eigen::VectorXd> charges;
    if (!charges_.empty() || !betas_.empty()) charges = eigenstate_charges(s);

    auto probe_values = [&](const Eigen::VectorXd& w, std::vector<Cell>& row) {
      for (const auto& d : diagonals) row.emplace_back(ensemble_average(w, d));
      if (table) row.emplace_back(von_neumann_entropy(table->mix(w)));
    };
    std::vector<std::string> labels;
    for (const auto& o : observables_) labels.push_back(o.label);
    if (entropy_site_) labels.push_back("S(" + std::to_string(*entropy_site_) + ")");

    if (!energies_.empty()) {
      std::vector<std::string> header{"energy", "charge", "beta", "gamma"};
      for (const auto& l : labels) header.push_back("gibbs:" + l);
      for (const auto& l : labels) header.push_back("micro:" + l);
      auto csv = out.csv(prefix + "curves.csv", header);
      const std::vector<double> qs = charges_.empty() ? std::vector<double>{std::nan("")} : charges_;
      for (double e : energies_) {
        for (double q : qs) {
          std::vector<Cell> row{e, q};
          const std::size_t nan_fill = labels.size();
          try {
            GibbsParams p;
            if (std::isnan(q)) {
              p.beta = solve_beta(s.energies(), e);
            } else {
              p = solve_beta_gamma(s.energies(), *charges, e, q);
            }
            row.emplace_back(p.beta);
            row.emplace_back(p.gamma ? *p.gamma : std::nan(""));
            probe_values(gibbs_weights(s.energies(), p.gamma ? &*charges : nullptr, p), row);
          } catch (const AttainabilityError&) {
            row.resize(4 + nan_fill, std::nan(""));
          } catch (const SingularJacobianError&) {
            row.resize(4 + nan_fill, std::nan(""));
          }
          micro_values(s, e, q, diagonals, table, row);
          csv.row(row);
        }
      }
    }

    if (!betas_.empty()) {
      std::vector<Eigen::VectorXd> columns{s.energies(), *charges};
      columns.insert(columns.end(), diagonals.begin(), diagonals.end());
      const ThermalSurface surface = tabulate_thermal_surface(s.energies(), *charges, betas_, mus_, columns);
      std::vector<std::string> header{"beta", "mu", "energy", "charge"};
      header.insert(header.end(), labels.begin(), labels.end());
      auto csv = out.csv(prefix + "surface.csv", header);
      for (std::size_t i = 0; i < betas_.size(); ++i) {
        for (std::size_t j = 0; j < mus_.size(); ++j) {
          std::vector<Cell> row{betas_[i], mus_[j]};
          for (std::size_t c = 0; c < columns.size(); ++c) row.emplace_back(surface.grid(c)(i, j));
          if (table) {
            const auto w = gibbs_weights(s.energies(), &*charges, {betas_[i], betas_[i] * mus_[j]});
            row.emplace_back(von_neumann_entropy(table->mix(w)));
          }
          csv.row(row);
        }
      }
    }
  }

 private:
  // Uniform mixture of the window E +- width, restricted to charge q when q is an integer.
  void micro_values(const Spectrum& s, double e, double q, const std::vector<Eigen::VectorXd>& diagonals,
                    const std::optional<EigenstateReductions>& table, std::vector<Cell>& row) const {
    const std::size_t n = diagonals.size() + (table ? 1 : 0);
    std::optional<int> sector;
    if (!std::isnan(q)) {
      if (std::abs(q - std::round(q)) > 1e-12) {
        row.resize(row.size() + n, std::nan(""));
        return;
      }
      sector = static_cast<int>(std::lround(q));
    }
    try {
      const auto window = make_window(s, e, micro_half_width_, sector);
      for (const auto& d : diagonals) row.emplace_back(window_average(window, d));
      if (table) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(s.size());
        for (Index k : window.member_indices) u(k) = 1.0 / static_cast<double>(window.member_indices.size());
        row.emplace_back(von_neumann_entropy(table->mix(u)));
      }
    } catch (const EmptyWindowError&) {
      row.resize(row.size() + n, std::nan(""));
    }
  }

  Common common_;
  OperatorMatrix h_;
  std::vector<Observable> observables_;
  std::optional<int> entropy_site_;
  std::vector<double> energies_;
  std::vector<double> charges_;
  double micro_half_width_ = 0.1;
  std::vector<double> betas_;
  std::vector<double> mus_;
};

}  // namespace

std::unique_ptr<Plan> plan_thermal(const Config& config, std::uint64_t seed) {
  return std::make_unique<ThermalPlan>(config, seed);
}

}  // namespace ethlab::cli
