#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ethlab/lattice.hpp"

namespace ethlab {

class Spectrum;
struct MicrocanonicalWindow;

enum class ProductStateKind { RandomQubit, RandomQutritF };

/// Random unentangled initial states.
///
/// Qubit sites are cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> with theta in
/// [0, pi]; qutrit sites are sqrt(1-f)(cos theta|0> + e^{i phi1} sin theta|1>)
/// + e^{i phi2} sqrt(f)|2> with theta in [0, pi/2]. Angles are uniform in their
/// ranges. `f` holds one value for every site or one per site.
struct ProductStateSpec {
  ProductStateKind kind = ProductStateKind::RandomQubit;
  int L = 2;
  std::vector<double> f{0.0};
  std::uint64_t seed = 0;
  std::optional<double> target_E;
  double tolerance = 0.002;
  std::int64_t max_attempts = 2'000'000;

  int site_dim() const { return kind == ProductStateKind::RandomQubit ? 2 : 3; }
  double f_at(int site) const;
  void validate() const;
};

struct StateVector {
  Eigen::VectorXcd amplitudes;
  int L = 0;
  int dim = 2;
  std::string provenance;
  std::uint64_t seed = 0;
  std::int64_t attempts = 1;  // rejection-sampling draws that produced this state
};

class RejectionLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-site factors of one draw; exposed so tests can check the product.
std::vector<Eigen::VectorXcd> draw_site_states(const ProductStateSpec& spec, std::mt19937_64& rng);
Eigen::VectorXcd tensor_product(std::span<const Eigen::VectorXcd> site_states);

/// One product state from `rng`. With target_E, draws are repeated until
/// |<H> - target_E| <= tolerance, <H> evaluated from `hamiltonian` site by site.
StateVector random_product_state(const ProductStateSpec& spec, const TermList& hamiltonian, std::mt19937_64& rng);
/// Same, seeded from spec.seed.
StateVector random_product_state(const ProductStateSpec& spec, const TermList& hamiltonian = {});

/// Normalized complex Gaussian superposition of the window's eigenstates.
StateVector random_microcanonical_state(const Spectrum& spectrum, const MicrocanonicalWindow& window, int L,
                                        int dim, std::uint64_t seed);

struct EnsembleMeta {
  std::size_t count = 1;
  std::uint64_t first_seed = 0;
  std::uint64_t last_seed = 0;
  std::string aggregation = "single";
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  EnsembleMeta meta;
};

/// Throws unless strictly increasing and finite.
void validate_times(std::span<const double> times);
/// start, start + step, ... up to `stop` inclusive (within half a step).
std::vector<double> uniform_times(double start, double stop, double step);

/// Evolves energy-basis coefficients exactly: psi(t) = sum_k c_k e^{-i E_k t} |E_k>.
/// Times are processed in chunks so each block costs one matrix product per chunk.
class Propagator {
 public:
  explicit Propagator(const Spectrum& spectrum, Index chunk = 64);

  const Spectrum& spectrum() const { return *spectrum_; }
  /// Calls visit(i, psi(times[i])) in time order.
  void for_each_time(const Eigen::VectorXcd& coefficients, std::span<const double> times,
                     const std::function<void(std::size_t, const Eigen::VectorXcd&)>& visit) const;

 private:
  const Spectrum* spectrum_;
  Index chunk_;
  // Real eigenvector blocks are multiplied as two real products.
  std::vector<Eigen::MatrixXd> real_vectors_;
  std::vector<bool> is_real_;
};

TimeSeries evolve_expectation(const StateVector& state, const Spectrum& spectrum, const OperatorMatrix& op,
                              std::span<const double> times);
TimeSeries evolve_entropy(const StateVector& state, const Spectrum& spectrum, int site,
                          std::span<const double> times);

/// One trajectory evaluated against several operators and single-site entropies at once.
struct TrajectoryProbes {
  std::vector<const OperatorMatrix*> operators;
  std::vector<int> entropy_sites;
};
struct TrajectoryResult {
  std::vector<TimeSeries> operators;
  std::vector<TimeSeries> entropies;
  std::vector<double> norm;  // ||psi(t)||
};
TrajectoryResult evolve(const StateVector& state, const Propagator& propagator, const TrajectoryProbes& probes,
                        std::span<const double> times);

struct TimeAverage {
  double value = 0.0;
  bool degenerate = false;  // some gap below 1e-10 * range: the identity is then approximate
};

/// sum_i |c_i|^2 O_ii, the infinite-time average.
TimeAverage time_average(const StateVector& state, const Spectrum& spectrum, const OperatorMatrix& op);

struct FluctuationBound {
  double variance = 0.0;  // sum_{i != j} |c_i|^2 |c_j|^2 |O_ij|^2
  double bound = 0.0;     // max_{i != j} |O_ij|^2
};
FluctuationBound fluctuation_bound(const StateVector& state, const Spectrum& spectrum, const OperatorMatrix& op);

/// Central moments of the energy distribution |c_i|^2 for n = 2..n_max.
std::vector<double> central_moments(const StateVector& state, const Spectrum& spectrum, int n_max);

/// <q^(r)>(t) for r = 1..L; throws on a non-qutrit state.
std::vector<TimeSeries> charge_profile(const StateVector& state, const Spectrum& spectrum,
                                       std::span<const double> times);

/// Per-time mean and quantiles (linear interpolation between order statistics).
struct EnsembleSeries {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> quantile_levels;
  std::vector<std::vector<double>> quantiles;  // [level][time]
  EnsembleMeta meta;
};
EnsembleSeries aggregate(std::span<const TimeSeries> members,
                         std::vector<double> quantile_levels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> sample, double level);

/// Mean and population standard deviation of values with times >= t_from.
struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};
WindowStats late_time_stats(const TimeSeries& series, double t_from);

}  // namespace ethlab
