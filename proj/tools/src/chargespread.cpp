#include <cmath>

#include "ethlab/cli/experiments.hpp"
#include "ethlab/dynamics.hpp"
#include "ethlab/parallel.hpp"

namespace ethlab::cli {

namespace {

class ChargeSpreadPlan : public Plan {
 public:
  ChargeSpreadPlan(const Config& config, std::uint64_t seed) : common_(parse_common(config, seed)) {
    if (common_.hamiltonian.kind != ChainKind::Qutrit) throw ConfigError("chargespread needs a qutrit chain");
    spec_.kind = ProductStateKind::RandomQutritF;
    spec_.L = common_.L();
    spec_.f = config.reals("chargespread.f");
    try {
      spec_.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("chargespread.f: ") + e.what());
    }
    const long states = config.integer("chargespread.states", 1);
    if (states < 1) throw ConfigError("chargespread.states must be positive");
    states_ = static_cast<std::size_t>(states);
    times_ = config.reals("chargespread.times");
    try {
      validate_times(times_);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("chargespread.times: ") + e.what());
    }
    late_from_ = config.real("chargespread.late_from", 0.5 * (times_.front() + times_.back()));
    if (late_from_ > times_.back()) throw ConfigError("chargespread.late_from is after the last time");
  }

  void run(Outputs& out, const std::string& prefix, unsigned threads) const override {
    const System sys = build_system(common_, threads);
    const int L = common_.L();
    std::vector<std::vector<TimeSeries>> profiles(states_);
    parallel_for(states_, threads, [&](std::size_t m) {
      auto rng = derive_stream(common_.seed, m);
      const StateVector state = random_product_state(spec_, {}, rng);
      profiles[m] = charge_profile(state, sys.spectrum, times_);
    });
    std::vector<std::string> header{"time"};
    for (int r = 1; r <= L; ++r) header.push_back("q" + std::to_string(r));
    header.push_back("Q");
    auto csv = out.csv(prefix + "profile.csv", header);
    double initial_total = 0.0;
    double drift = 0.0;
    double late_deviation = 0.0;
    for (std::size_t t = 0; t < times_.size(); ++t) {
      std::vector<Cell> row{times_[t]};
      double total = 0.0;
      std::vector<double> site(L, 0.0);
      for (int r = 0; r < L; ++r) {
        for (const auto& p : profiles) site[r] += p[r].values[t];
        site[r] /= static_cast<double>(states_);
        total += site[r];
        row.emplace_back(site[r]);
      }
      row.emplace_back(total);
      csv.row(row);
      if (t == 0) initial_total = total;
      drift = std::max(drift, std::abs(total - initial_total));
      if (times_[t] >= late_from_) {
        for (double q : site) late_deviation = std::max(late_deviation, std::abs(q - initial_total / L));
      }
    }
    out.json(prefix + "summary.json", {{"states", states_},
                                       {"initial_charge", initial_total},
                                       {"equilibrium_density", initial_total / L},
                                       {"late_from", late_from_},
                                       {"late_max_deviation", late_deviation},
                                       {"total_charge_drift", drift}});
  }

 private:
  Common common_;
  ProductStateSpec spec_;
  std::size_t states_ = 1;
  std::vector<double> times_;
  double late_from_ = 0.0;
};

}  // namespace

std::unique_ptr<Plan> plan_chargespread(const Config& config, std::uint64_t seed) {
  return std::make_unique<ChargeSpreadPlan>(config, seed);
}

}  // namespace ethlab::cli
