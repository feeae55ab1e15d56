#include <cmath>
#include <span>

#include <fmt/format.h>

#include "ethlab/cli/experiments.hpp"
#include "ethlab/dynamics.hpp"
#include "ethlab/ensembles.hpp"
#include "ethlab/parallel.hpp"

namespace ethlab::cli {

namespace {

enum class StateKind { Product, Microcanonical };

struct Member {
  TrajectoryResult trajectory;
  double energy = 0.0;
  double charge = std::nan("");
  std::int64_t attempts = 1;
  std::vector<double> moments;
  std::vector<double> time_averages;
  Eigen::VectorXd weights;  // kept only for the energy histogram
};

struct Thermal {
  double beta = std::nan("");
  double gamma = std::nan("");
  std::vector<double> gibbs;
  std::vector<double> micro;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

class EvolvePlan : public Plan {
 public:
  EvolvePlan(const Config& config, std::uint64_t seed) : common_(parse_common(config, seed)) {
    h_ = build_hamiltonian(common_.hamiltonian);
    terms_ = hamiltonian_terms(common_.hamiltonian);
    const std::string kind = config.text("states.kind", "product");
    if (kind == "product") {
      kind_ = StateKind::Product;
    } else if (kind == "microcanonical") {
      kind_ = StateKind::Microcanonical;
    } else {
      throw ConfigError("states.kind must be product or microcanonical");
    }
    const long count = config.integer("states.count", 1);
    if (count < 1) throw ConfigError("states.count must be positive");
    count_ = static_cast<std::size_t>(count);
    if (config.has("states.energies")) energies_ = config.reals("states.energies");
    if (kind_ == StateKind::Product) {
      product_.L = common_.L();
      product_.tolerance = config.real("states.tolerance", product_.tolerance);
      product_.max_attempts = config.integer("states.max_attempts", static_cast<long>(product_.max_attempts));
      if (common_.hamiltonian.kind == ChainKind::Qutrit) {
        product_.kind = ProductStateKind::RandomQutritF;
        product_.f = config.reals("states.f");
      }
      try {
        product_.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("states: ") + e.what());
      }
    } else {
      if (energies_.empty()) throw ConfigError("states.energies is required for microcanonical states");
      half_width_ = config.real("states.half_width", half_width_);
      if (half_width_ <= 0.0) throw ConfigError("states.half_width must be positive");
      if (config.has("states.charge")) {
        if (common_.hamiltonian.kind != ChainKind::Qutrit) throw ConfigError("states.charge needs a qutrit chain");
        charge_ = static_cast<int>(config.integer("states.charge"));
      }
    }

    times_ = config.reals("evolve.times");
    try {
      validate_times(times_);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("evolve.times: ") + e.what());
    }
    observables_ = parse_observables(config, "evolve.observables", common_, &h_);
    entropy_sites_ = parse_sites(config, "evolve.entropy_sites", common_.L());
    if (observables_.empty() && entropy_sites_.empty()) {
      throw ConfigError("evolve needs evolve.observables or evolve.entropy_sites");
    }
    quantiles_ = config.reals("evolve.quantiles", quantiles_);
    for (double q : quantiles_) {
      if (q < 0.0 || q > 1.0) throw ConfigError("evolve.quantiles must lie in [0, 1]");
    }
    late_from_ = config.real("evolve.late_from", 0.5 * (times_.front() + times_.back()));
    if (late_from_ > times_.back()) throw ConfigError("evolve.late_from is after the last time");
    members_written_ = static_cast<std::size_t>(std::max(0L, config.integer("evolve.members", 0)));
    thermal_ = config.flag("evolve.thermal", true);
    micro_half_width_ = config.real("evolve.micro_half_width", micro_half_width_);
    energy_bins_ = config.integer("evolve.energy_bins", 0);
    if (energy_bins_ < 0 || energy_bins_ > 100000) throw ConfigError("evolve.energy_bins must be in 0..100000");
    moments_ = static_cast<int>(config.integer("evolve.moments", 4));
    if (moments_ < 2 || moments_ > 12) throw ConfigError("evolve.moments must be in 2..12");
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    const System sys = build_system(common_, threads);
    const Spectrum& s = sys.spectrum;
    const Propagator propagator(s);
    TrajectoryProbes probes;
    std::vector<Eigen::VectorXd> diagonals;
    for (const auto& o : observables_) {
      probes.operators.push_back(&o.op);
      diagonals.push_back(s.diagonal_elements(o.op));
    }
    probes.entropy_sites = entropy_sites_;
    std::optional<Eigen::VectorXd> charges;
    if (s.has_charge_labels()) charges = eigenstate_charges(s);

    const std::size_t groups = energies_.empty() ? 1 : energies_.size();
    std::vector<Member> members(groups * count_);
    parallel_for(members.size(), threads, [&](std::size_t i) {
      const std::size_t g = i / count_;
      auto rng = derive_stream(common_.seed, i);
      StateVector state;
      if (kind_ == StateKind::Product) {
        ProductStateSpec spec = product_;
        if (!energies_.empty()) spec.target_E = energies_[g];
        state = random_product_state(spec, terms_, rng);
      } else {
        const auto window = make_window(s, energies_[g], half_width_, charge_);
        state = random_microcanonical_state(s, window, common_.L(), common_.dim(), rng());
      }
      Member& m = members[i];
      const Eigen::VectorXd w = diagonal_ensemble(state.amplitudes, s);
      m.energy = ensemble_average(w, s.energies());
      if (charges) m.charge = ensemble_average(w, *charges);
      m.attempts = state.attempts;
      m.moments = central_moments(state, s, moments_);
      if (energy_bins_ > 0) m.weights = w;
      for (const auto& d : diagonals) m.time_averages.push_back(ensemble_average(w, d));
      m.trajectory = evolve(state, propagator, probes, times_);
    });

    const std::size_t n_probes = observables_.size() + entropy_sites_.size();
    auto probe_label = [&](std::size_t p) {
      return p < observables_.size() ? observables_[p].label
                                     : "S(" + std::to_string(entropy_sites_[p - observables_.size()]) + ")";
    };
    auto probe_series = [&](const Member& m, std::size_t p) -> const TimeSeries& {
      return p < observables_.size() ? m.trajectory.operators[p] : m.trajectory.entropies[p - observables_.size()];
    };

    std::vector<std::string> state_header{"group", "member", "stream", "energy", "charge", "attempts"};
    for (int n = 2; n <= moments_; ++n) state_header.push_back("moment" + std::to_string(n));
    for (const auto& o : observables_) state_header.push_back("time_average:" + o.label);
    auto states_csv = out.csv(prefix + "states.csv", state_header);
    double max_norm_error = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Member& m = members[i];
      std::vector<Cell> row{static_cast<long long>(i / count_), static_cast<long long>(i % count_),
                            static_cast<long long>(i), m.energy, m.charge, static_cast<long long>(m.attempts)};
      for (double v : m.moments) row.emplace_back(v);
      for (double v : m.time_averages) row.emplace_back(v);
      states_csv.row(row);
      for (double n : m.trajectory.norm) max_norm_error = std::max(max_norm_error, std::abs(n - 1.0));
    }

    auto summary = out.csv(prefix + "summary.csv",
                           {"group", "target_energy", "probe", "states", "mean_energy", "mean_charge", "late_mean",
                            "late_std", "member_late_std", "time_average", "gibbs", "microcanonical", "beta", "gamma"});
    nlohmann::json group_meta = nlohmann::json::array();
    for (std::size_t g = 0; g < groups; ++g) {
      const std::span<const Member> group(members.data() + g * count_, count_);
      std::vector<double> e, q;
      for (const auto& m : group) {
        e.push_back(m.energy);
        q.push_back(m.charge);
      }
      const double mean_e = mean_of(e);
      const double mean_q = mean_of(q);
      const Thermal th = thermal_ ? thermal_values(s, charges, diagonals, mean_e, mean_q) : Thermal{};
      const std::string tag = fmt::format("g{}", g);
      for (std::size_t p = 0; p < n_probes; ++p) {
        std::vector<TimeSeries> series;
        std::vector<double> member_std;
        for (const auto& m : group) {
          series.push_back(probe_series(m, p));
          member_std.push_back(late_time_stats(series.back(), late_from_).stddev);
        }
        const EnsembleSeries agg = aggregate(series, quantiles_);
        write_ensemble(out, prefix + "ensemble_" + tag + "_" + slug(probe_label(p)) + ".csv", agg);
        if (members_written_ > 0) {
          write_members(out, prefix + "members_" + tag + "_" + slug(probe_label(p)) + ".csv", series);
        }
        TimeSeries mean_series{agg.times, agg.mean, agg.meta};
        const WindowStats late = late_time_stats(mean_series, late_from_);
        double tavg = std::nan("");
        if (p < observables_.size()) {
          std::vector<double> t;
          for (const auto& m : group) t.push_back(m.time_averages[p]);
          tavg = mean_of(t);
        }
        summary.row({static_cast<long long>(g), energies_.empty() ? std::nan("") : energies_[g], probe_label(p),
                     static_cast<long long>(count_), mean_e, mean_q, late.mean, late.stddev, mean_of(member_std), tavg,
                     thermal_ ? th.gibbs[p] : std::nan(""), thermal_ ? th.micro[p] : std::nan(""), th.beta,
                     th.gamma});
      }
      if (energy_bins_ > 0) write_energy_distribution(out, prefix + "energy_distribution_" + tag + ".csv", s, group,
                                                      charges, th);
      group_meta.push_back({{"group", g},
                            {"label", energies_.empty() ? std::string("all") : fmt::format("E={:.17g}", energies_[g])},
                            {"first_stream", g * count_},
                            {"last_stream", (g + 1) * count_ - 1}});
    }
    out.json(prefix + "summary.json", {{"groups", group_meta}, {"max_norm_error", max_norm_error}});
  }

 private:
  Thermal thermal_values(const Spectrum& s, const std::optional<Eigen::VectorXd>& charges,
                         const std::vector<Eigen::VectorXd>& diagonals, double mean_e, double mean_q) const {
    Thermal th;
    const std::size_t n = diagonals.size() + entropy_sites_.size();
    th.gibbs.assign(n, std::nan(""));
    th.micro.assign(n, std::nan(""));
    try {
      GibbsParams params;
      const bool generalized = charges && kind_ == StateKind::Product;
      if (generalized) {
        params = solve_beta_gamma(s.energies(), *charges, mean_e, mean_q);
        th.gamma = *params.gamma;
      } else {
        params.beta = solve_beta(s.energies(), mean_e);
      }
      th.beta = params.beta;
      const Eigen::VectorXd w = gibbs_weights(s.energies(), generalized ? &*charges : nullptr, params);
      for (std::size_t o = 0; o < diagonals.size(); ++o) th.gibbs[o] = ensemble_average(w, diagonals[o]);
      for (std::size_t k = 0; k < entropy_sites_.size(); ++k) {
        th.gibbs[diagonals.size() + k] = thermal_entropy_of_site(w, s, entropy_sites_[k], common_.L(), common_.dim());
      }
    } catch (const AttainabilityError&) {
    } catch (const SingularJacobianError&) {
    }
    try {
      std::optional<int> sector = charge_;
      if (!sector && charges && std::abs(mean_q - std::round(mean_q)) < 1e-9) {
        sector = static_cast<int>(std::lround(mean_q));
      }
      const auto window = make_window(s, mean_e, micro_half_width_, sector);
      for (std::size_t o = 0; o < diagonals.size(); ++o) th.micro[o] = window_average(window, diagonals[o]);
      Eigen::VectorXd u = Eigen::VectorXd::Zero(s.size());
      for (Index k : window.member_indices) u(k) = 1.0 / static_cast<double>(window.member_indices.size());
      for (std::size_t k = 0; k < entropy_sites_.size(); ++k) {
        th.micro[diagonals.size() + k] = thermal_entropy_of_site(u, s, entropy_sites_[k], common_.L(), common_.dim());
      }
    } catch (const EmptyWindowError&) {
    }
    return th;
  }

  static void write_ensemble(Outputs& out, const std::string& path, const EnsembleSeries& agg) {
    std::vector<std::string> header{"time", "mean"};
    for (double q : agg.quantile_levels) header.push_back(fmt::format("q{:g}", q));
    auto csv = out.csv(path, header);
    for (std::size_t t = 0; t < agg.times.size(); ++t) {
      std::vector<Cell> row{agg.times[t], agg.mean[t]};
      for (const auto& q : agg.quantiles) row.emplace_back(q[t]);
      csv.row(row);
    }
  }

  void write_members(Outputs& out, const std::string& path, const std::vector<TimeSeries>& series) const {
    const std::size_t k = std::min(members_written_, series.size());
    std::vector<std::string> header{"time"};
    for (std::size_t m = 0; m < k; ++m) header.push_back(fmt::format("member{}", m));
    auto csv = out.csv(path, header);
    for (std::size_t t = 0; t < times_.size(); ++t) {
      std::vector<Cell> row{times_[t]};
      for (std::size_t m = 0; m < k; ++m) row.emplace_back(series[m].values[t]);
      csv.row(row);
    }
  }

  void write_energy_distribution(Outputs& out, const std::string& path, const Spectrum& s,
                                 std::span<const Member> group, const std::optional<Eigen::VectorXd>& charges,
                                 const Thermal& th) const {
    // Histogram of the ensemble-mean |c_i|^2 next to the Gibbs weights at the matched (beta, gamma).
    const double lo = s.energies().minCoeff();
    const double hi = s.energies().maxCoeff();
    const auto bins = static_cast<std::size_t>(energy_bins_);
    const double width = (hi - lo) / static_cast<double>(bins);
    Eigen::VectorXd gibbs = Eigen::VectorXd::Constant(s.size(), std::nan(""));
    if (std::isfinite(th.beta)) {
      GibbsParams p{th.beta, std::nullopt};
      if (std::isfinite(th.gamma)) p.gamma = th.gamma;
      gibbs = gibbs_weights(s.energies(), p.gamma ? &*charges : nullptr, p);
    }
    Eigen::VectorXd mean_weights = Eigen::VectorXd::Zero(s.size());
    for (const auto& m : group) mean_weights += m.weights;
    mean_weights /= static_cast<double>(group.size());
    std::vector<double> state_mass(bins, 0.0), gibbs_mass(bins, 0.0);
    for (Index k = 0; k < s.size(); ++k) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>((s.energies()(k) - lo) / width));
      state_mass[b] += mean_weights(k);
      gibbs_mass[b] += gibbs(k);
    }
    auto csv = out.csv(path, {"e_lo", "e_hi", "states", "gibbs"});
    for (std::size_t b = 0; b < bins; ++b) {
      csv.row({lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1), state_mass[b],
               gibbs_mass[b]});
    }
  }

  Common common_;
  OperatorMatrix h_;
  TermList terms_;
  StateKind kind_ = StateKind::Product;
  std::size_t count_ = 1;
  std::vector<double> energies_;
  ProductStateSpec product_;
  double half_width_ = 0.05;
  std::optional<int> charge_;
  std::vector<double> times_;
  std::vector<Observable> observables_;
  std::vector<int> entropy_sites_;
  std::vector<double> quantiles_{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double late_from_ = 0.0;
  std::size_t members_written_ = 0;
  bool thermal_ = true;
  double micro_half_width_ = 0.05;
  long energy_bins_ = 0;
  int moments_ = 4;
};

}  // namespace

std::unique_ptr<Plan> plan_evolve(const Config& config, std::uint64_t seed) {
  return std::make_unique<EvolvePlan>(config, seed);
}

}  // namespace ethlab::cli
