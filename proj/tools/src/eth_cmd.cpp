#include <cmath>

#include "ethlab/cli/experiments.hpp"
#include "ethlab/cli/selector.hpp"
#include "ethlab/ensembles.hpp"
#include "ethlab/entanglement.hpp"
#include "ethlab/eth.hpp"
#include "ethlab/parallel.hpp"

namespace ethlab::cli {

namespace {

class EthPlan : public Plan {
 public:
  EthPlan(const Config& config, std::uint64_t seed) : common_(parse_common(config, seed)) {
    h_ = build_hamiltonian(common_.hamiltonian);
    if (config.has("eth.observables")) expressions_ = config.items("eth.observables");
    observables_ = parse_observables(config, "eth.observables", common_, &h_);
    if (config.has("eth.sizes")) {
      for (long L : config.integers("eth.sizes")) {
        if (L < 2) throw ConfigError("eth.sizes: chain length must be at least 2");
        sizes_.push_back(static_cast<int>(L));
      }
    }
    random_operators_ = config.integer("eth.random_operators", 0);
    if (random_operators_ < 0) throw ConfigError("eth.random_operators must be non-negative");
    if (random_operators_ > 0 && common_.hamiltonian.kind != ChainKind::Qubit) {
      throw ConfigError("eth.random_operators needs a qubit chain");
    }
    if ((random_operators_ > 0 || !expressions_.empty()) && !sizes_.empty() &&
        (common_.decompose.parity || common_.decompose.charges)) {
      throw ConfigError("eth.sizes needs the whole space; drop sectors.parity and sectors.charges");
    }
    if (random_operators_ > 0 && sizes_.empty()) throw ConfigError("eth.random_operators needs eth.sizes");
    for (int L : sizes_) {
      Common c = common_;
      c.hamiltonian.L = L;
      const OperatorMatrix h = build_hamiltonian(c.hamiltonian);
      for (const auto& e : expressions_) {
        try {
          operator_selector(e, L, c.dim(), &h);
        } catch (const SelectorError& err) {
          throw ConfigError("eth.observables at L=" + std::to_string(L) + ": " + err.what());
        }
      }
    }
    scatter_ = config.flag("eth.scatter", true);
    if (config.has("eth.entropy_site")) {
      const auto sites = parse_sites(config, "eth.entropy_site", common_.L());
      if (sites.size() != 1) throw ConfigError("eth.entropy_site takes one site");
      entropy_site_ = sites.front();
    }
    if (config.has("eth.thermal_energies")) thermal_energies_ = config.reals("eth.thermal_energies");
    if (!scatter_ && sizes_.empty() && thermal_energies_.empty()) throw ConfigError("eth: nothing to compute");
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    if (scatter_ || !thermal_energies_.empty()) {
      const System sys = build_system(common_, threads);
      std::vector<std::string> header;
      std::vector<Eigen::VectorXd> columns;
      for (const auto& o : observables_) {
        header.push_back(o.label);
        columns.push_back(sys.spectrum.diagonal_elements(o.op));
      }
      std::optional<EigenstateReductions> table;
      if (entropy_site_) {
        header.push_back("S(" + std::to_string(*entropy_site_) + ")");
        const auto points = eigenstate_entropy_scatter(sys.spectrum, *entropy_site_, common_.L(), common_.dim());
        Eigen::VectorXd v(sys.spectrum.size());
        for (Index k = 0; k < v.size(); ++k) v(k) = points[k].value;
        columns.push_back(v);
        table = eigenstate_reductions(sys.spectrum, {*entropy_site_}, common_.L(), common_.dim());
      }
      if (scatter_) {
        std::vector<std::string> h{"index", "energy"};
        h.insert(h.end(), header.begin(), header.end());
        auto csv = out.csv(prefix + "scatter.csv", h);
        for (Index k = 0; k < sys.spectrum.size(); ++k) {
          std::vector<Cell> row{static_cast<long long>(k), sys.spectrum.energies()(k)};
          for (const auto& c : columns) row.emplace_back(c(k));
          csv.row(row);
        }
      }
      if (!thermal_energies_.empty()) {
        std::vector<std::string> h{"energy", "beta"};
        h.insert(h.end(), header.begin(), header.end());
        auto csv = out.csv(prefix + "thermal.csv", h);
        for (double e : thermal_energies_) {
          std::vector<Cell> row{e};
          try {
            const double beta = solve_beta(sys.spectrum.energies(), e);
            const Eigen::VectorXd w = gibbs_weights(sys.spectrum.energies(), nullptr, {beta, std::nullopt});
            row.emplace_back(beta);
            for (std::size_t o = 0; o < observables_.size(); ++o) row.emplace_back(ensemble_average(w, columns[o]));
            if (table) row.emplace_back(von_neumann_entropy(table->mix(w)));
          } catch (const AttainabilityError&) {
            row.resize(h.size(), std::nan(""));
          }
          csv.row(row);
        }
      }
    }
    if (!sizes_.empty()) scaling(out, prefix, threads);
  }

 private:
  void scaling(Outputs& out, const std::string& prefix, unsigned threads) const {
    auto ratios = out.csv(prefix + "ratios.csv", {"L", "observable", "ratio", "infinite"});
    std::optional<CsvWriter> counter;
    if (random_operators_ > 0) {
      counter.emplace(out.csv(prefix + "counter_diagonal.csv", {"L", "operators", "mean", "log_mean", "stddev"}));
    }
    std::vector<std::vector<std::pair<double, double>>> ratio_points(expressions_.size());
    std::vector<std::pair<double, double>> counter_points;
    for (int L : sizes_) {
      Common c = common_;
      c.hamiltonian.L = L;
      const System sys = build_system(c, threads);
      for (std::size_t o = 0; o < expressions_.size(); ++o) {
        const OperatorMatrix op = operator_selector(expressions_[o], L, c.dim(), &sys.h);
        const DiagonalRatio r = diag_offdiag_ratio(sys.spectrum, op);
        ratios.row({static_cast<long long>(L), selector_label(expressions_[o]), r.value,
                    static_cast<long long>(r.infinite)});
        if (!r.infinite) ratio_points[o].emplace_back(L, r.value);
      }
      if (counter) {
        auto rng = derive_stream(common_.seed, static_cast<std::uint64_t>(L));
        std::vector<RandomSiteOperator> ops;
        for (long k = 0; k < random_operators_; ++k) ops.push_back(random_fixed_spectrum_operator(L, rng));
        std::vector<double> d(ops.size());
        parallel_for(ops.size(), threads, [&](std::size_t k) {
          d[k] = counter_diagonal_average(sys.spectrum, embed_at_site(ops[k].op, ops[k].site, L, 2));
        });
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        double var = 0.0;
        for (double v : d) var += (v - mean) * (v - mean);
        counter->row({static_cast<long long>(L), static_cast<long long>(d.size()), mean, std::log(mean),
                      std::sqrt(var / static_cast<double>(d.size()))});
        counter_points.emplace_back(L, mean);
      }
    }
    nlohmann::json fits = nlohmann::json::object();
    auto fit_json = [](const std::vector<std::pair<double, double>>& points) -> nlohmann::json {
      if (points.size() < 3) return nullptr;
      const auto f = scaling_fit(points, true);
      return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"points", points.size()}};
    };
    for (std::size_t o = 0; o < expressions_.size(); ++o) {
      fits["log_ratio"][selector_label(expressions_[o])] = fit_json(ratio_points[o]);
    }
    if (counter) fits["log_counter_diagonal"] = fit_json(counter_points);
    out.json(prefix + "fits.json", fits);
  }

  Common common_;
  OperatorMatrix h_;
  std::vector<std::string> expressions_;
  std::vector<Observable> observables_;
  std::vector<int> sizes_;
  long random_operators_ = 0;
  bool scatter_ = true;
  std::optional<int> entropy_site_;
  std::vector<double> thermal_energies_;
};

}  // namespace

std::unique_ptr<Plan> plan_eth(const Config& config, std::uint64_t seed) { return std::make_unique<EthPlan>(config, seed); }

}  // namespace ethlab::cli
