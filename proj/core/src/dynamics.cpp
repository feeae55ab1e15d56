#include "ethlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ethlab/ensembles.hpp"
#include "ethlab/entanglement.hpp"
#include "ethlab/spectral.hpp"

namespace ethlab {

namespace {

void check_state(const StateVector& state, const Spectrum& spectrum) {
  if (state.amplitudes.size() != spectrum.full_dim()) {
    throw std::invalid_argument("state dimension " + std::to_string(state.amplitudes.size()) +
                                " does not match the spectrum dimension " + std::to_string(spectrum.full_dim()));
  }
}

Eigen::VectorXd energy_weights(const StateVector& state, const Spectrum& spectrum) {
  check_state(state, spectrum);
  return spectrum.to_energy_basis(state.amplitudes).cwiseAbs2();
}

}  // namespace

double ProductStateSpec::f_at(int site) const { return f.size() == 1 ? f.front() : f.at(site - 1); }

void ProductStateSpec::validate() const {
  if (L < 1) throw std::invalid_argument("ProductStateSpec: L must be >= 1");
  if (kind == ProductStateKind::RandomQutritF) {
    if (f.size() != 1 && f.size() != static_cast<std::size_t>(L)) {
      throw std::invalid_argument("ProductStateSpec: f needs one value or one per site");
    }
    for (double v : f) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ProductStateSpec: f must lie in [0, 1]");
    }
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("ProductStateSpec: tolerance must be > 0");
  if (max_attempts < 1) throw std::invalid_argument("ProductStateSpec: max_attempts must be >= 1");
}

std::vector<Eigen::VectorXcd> draw_site_states(const ProductStateSpec& spec, std::mt19937_64& rng) {
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  std::vector<Eigen::VectorXcd> sites;
  sites.reserve(spec.L);
  for (int r = 1; r <= spec.L; ++r) {
    if (spec.kind == ProductStateKind::RandomQubit) {
      const double theta = std::uniform_real_distribution<double>(0.0, pi)(rng);
      const double phi = phase(rng);
      Eigen::VectorXcd v(2);
      v << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
      sites.push_back(std::move(v));
    } else {
      const double theta = std::uniform_real_distribution<double>(0.0, pi / 2.0)(rng);
      const double phi1 = phase(rng);
      const double phi2 = phase(rng);
      const double f = spec.f_at(r);
      const double rest = std::sqrt(1.0 - f);
      Eigen::VectorXcd v(3);
      v << rest * std::cos(theta), std::polar(rest * std::sin(theta), phi1), std::polar(std::sqrt(f), phi2);
      sites.push_back(std::move(v));
    }
  }
  return sites;
}

Eigen::VectorXcd tensor_product(std::span<const Eigen::VectorXcd> site_states) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (const auto& v : site_states) {
    Eigen::VectorXcd next(psi.size() * v.size());
    for (Index i = 0; i < psi.size(); ++i) next.segment(i * v.size(), v.size()) = psi(i) * v;
    psi = std::move(next);
  }
  return psi;
}

StateVector random_product_state(const ProductStateSpec& spec, const TermList& hamiltonian, std::mt19937_64& rng) {
  spec.validate();
  if (spec.target_E && hamiltonian.empty()) {
    throw std::invalid_argument("random_product_state: an energy target needs the Hamiltonian terms");
  }
  const char* tag = spec.kind == ProductStateKind::RandomQubit ? "product-qubit" : "product-qutrit";
  double closest = std::numeric_limits<double>::infinity();
  for (std::int64_t attempt = 1; attempt <= spec.max_attempts; ++attempt) {
    auto sites = draw_site_states(spec, rng);
    if (spec.target_E) {
      const double e = product_expectation(hamiltonian, sites).real();
      if (std::abs(e - *spec.target_E) < std::abs(closest - *spec.target_E)) closest = e;
      if (std::abs(e - *spec.target_E) > spec.tolerance) continue;
    }
    StateVector state{tensor_product(sites), spec.L, spec.site_dim(), tag, spec.seed, attempt};
    return state;
  }
  throw RejectionLimitError("random_product_state: no draw within " + std::to_string(spec.tolerance) + " of E = " +
                            std::to_string(*spec.target_E) + " after " + std::to_string(spec.max_attempts) +
                            " attempts (acceptance rate 0, closest energy " + std::to_string(closest) + ")");
}

StateVector random_product_state(const ProductStateSpec& spec, const TermList& hamiltonian) {
  std::mt19937_64 rng(spec.seed);
  return random_product_state(spec, hamiltonian, rng);
}

StateVector random_microcanonical_state(const Spectrum& spectrum, const MicrocanonicalWindow& window, int L,
                                        int dim, std::uint64_t seed) {
  if (window.member_indices.empty()) throw EmptyWindowError("random_microcanonical_state: empty window");
  if (spectrum.full_dim() != lattice_dim(L, dim)) {
    throw std::invalid_argument("random_microcanonical_state: spectrum does not live on this lattice");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(spectrum.size());
  for (Index k : window.member_indices) {
    const double re = normal(rng);
    const double im = normal(rng);
    c(k) = Complex(re, im);
  }
  c.normalize();
  return StateVector{spectrum.from_energy_basis(c), L, dim, "microcanonical", seed, 1};
}

void validate_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw std::invalid_argument("time grid contains a non-finite value");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  }
}

std::vector<double> uniform_times(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw std::invalid_argument("uniform_times: need step > 0, stop >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = start + static_cast<double>(i) * step;
  return t;
}

Propagator::Propagator(const Spectrum& spectrum, Index chunk) : spectrum_(&spectrum), chunk_(std::max<Index>(1, chunk)) {
  const auto& blocks = spectrum.blocks();
  real_vectors_.resize(blocks.size());
  is_real_.assign(blocks.size(), false);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].size() > 0 && blocks[b].vectors.imag().isZero(0.0)) {
      real_vectors_[b] = blocks[b].vectors.real();
      is_real_[b] = true;
    }
  }
}

void Propagator::for_each_time(const Eigen::VectorXcd& coefficients, std::span<const double> times,
                               const std::function<void(std::size_t, const Eigen::VectorXcd&)>& visit) const {
  const Spectrum& s = *spectrum_;
  if (coefficients.size() != s.size()) throw std::invalid_argument("Propagator: coefficient count mismatch");
  validate_times(times);
  const auto& blocks = s.blocks();
  const auto& e = s.energies();
  for (std::size_t start = 0; start < times.size(); start += static_cast<std::size_t>(chunk_)) {
    const Index width = std::min<Index>(chunk_, static_cast<Index>(times.size() - start));
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(s.full_dim(), width);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& block = blocks[b];
      if (block.size() == 0) continue;
      Eigen::MatrixXcd local(block.size(), width);
      for (Index k : s.block_indices(static_cast<int>(b))) {
        const Index j = s.locate(k).local;
        for (Index t = 0; t < width; ++t) local(j, t) = coefficients(k) * std::polar(1.0, -e(k) * times[start + t]);
      }
      if (is_real_[b]) {
        const Eigen::MatrixXd re = real_vectors_[b] * local.real();
        const Eigen::MatrixXd im = real_vectors_[b] * local.imag();
        const Eigen::MatrixXd full_re = block.basis * re;
        const Eigen::MatrixXd full_im = block.basis * im;
        psi.real() += full_re;
        psi.imag() += full_im;
      } else {
        const Eigen::MatrixXcd sector = block.vectors * local;
        psi += block.basis.cast<Complex>() * sector;
      }
    }
    for (Index t = 0; t < width; ++t) visit(start + static_cast<std::size_t>(t), psi.col(t));
  }
}

TrajectoryResult evolve(const StateVector& state, const Propagator& propagator, const TrajectoryProbes& probes,
                        std::span<const double> times) {
  const Spectrum& spectrum = propagator.spectrum();
  check_state(state, spectrum);
  for (const auto* op : probes.operators) {
    if (op == nullptr || op->dim() != spectrum.full_dim()) {
      throw std::invalid_argument("evolve: operator dimension does not match the spectrum");
    }
  }
  for (int site : probes.entropy_sites) {
    if (site < 1 || site > state.L) throw std::out_of_range("evolve: entropy site out of range");
  }
  TrajectoryResult out;
  const std::vector<double> grid(times.begin(), times.end());
  auto blank = [&] {
    TimeSeries ts;
    ts.times = grid;
    ts.values.resize(grid.size());
    ts.meta.first_seed = ts.meta.last_seed = state.seed;
    return ts;
  };
  out.operators.assign(probes.operators.size(), blank());
  out.entropies.assign(probes.entropy_sites.size(), blank());
  out.norm.resize(grid.size());
  const Eigen::VectorXcd c = spectrum.to_energy_basis(state.amplitudes);
  propagator.for_each_time(c, times, [&](std::size_t i, const Eigen::VectorXcd& psi) {
    out.norm[i] = psi.norm();
    for (std::size_t o = 0; o < probes.operators.size(); ++o) {
      const Eigen::VectorXcd applied = probes.operators[o]->sparse() * psi;
      out.operators[o].values[i] = psi.dot(applied).real();
    }
    for (std::size_t s = 0; s < probes.entropy_sites.size(); ++s) {
      out.entropies[s].values[i] = site_entropy(psi, probes.entropy_sites[s], state.L, state.dim);
    }
  });
  return out;
}

TimeSeries evolve_expectation(const StateVector& state, const Spectrum& spectrum, const OperatorMatrix& op,
                              std::span<const double> times) {
  const Propagator propagator(spectrum);
  return evolve(state, propagator, TrajectoryProbes{{&op}, {}}, times).operators.front();
}

TimeSeries evolve_entropy(const StateVector& state, const Spectrum& spectrum, int site,
                          std::span<const double> times) {
  const Propagator propagator(spectrum);
  return evolve(state, propagator, TrajectoryProbes{{}, {site}}, times).entropies.front();
}

TimeAverage time_average(const StateVector& state, const Spectrum& spectrum, const OperatorMatrix& op) {
  const Eigen::VectorXd w = energy_weights(state, spectrum);
  TimeAverage out;
  out.value = w.dot(spectrum.diagonal_elements(op));
  const auto& e = spectrum.energies();
  const double range = spectrum.spectral_range();
  for (Index k = 1; k < e.size(); ++k) {
    if (e(k) - e(k - 1) < 1e-10 * range) {
      out.degenerate = true;
      break;
    }
  }
  return out;
}

FluctuationBound fluctuation_bound(const StateVector& state, const Spectrum& spectrum, const OperatorMatrix& op) {
  check_state(state, spectrum);
  if (op.dim() != spectrum.full_dim()) throw std::invalid_argument("fluctuation_bound: operator dimension mismatch");
  const Eigen::VectorXd w = energy_weights(state, spectrum);
  const Eigen::MatrixXcd v = spectrum.eigenvector_matrix();
  const Eigen::MatrixXcd applied = op.sparse() * v;
  const Eigen::MatrixXd mag2 = (v.adjoint() * applied).cwiseAbs2();
  FluctuationBound out;
  for (Index j = 0; j < mag2.cols(); ++j) {
    for (Index i = 0; i < mag2.rows(); ++i) {
      if (i == j) continue;
      out.variance += w(i) * w(j) * mag2(i, j);
      out.bound = std::max(out.bound, mag2(i, j));
    }
  }
  return out;
}

std::vector<double> central_moments(const StateVector& state, const Spectrum& spectrum, int n_max) {
  if (n_max < 2) throw std::invalid_argument("central_moments: n_max must be >= 2");
  const Eigen::VectorXd w = energy_weights(state, spectrum);
  const Eigen::VectorXd& e = spectrum.energies();
  const double mean = w.dot(e) / w.sum();
  const Eigen::ArrayXd d = e.array() - mean;
  std::vector<double> out;
  Eigen::ArrayXd power = d;
  for (int n = 2; n <= n_max; ++n) {
    power *= d;
    out.push_back((w.array() * power).sum());
  }
  return out;
}

std::vector<TimeSeries> charge_profile(const StateVector& state, const Spectrum& spectrum,
                                       std::span<const double> times) {
  if (state.dim != 3) throw std::invalid_argument("charge_profile: needs a qutrit state");
  const ChargeOperators charges = build_charge_operators(state.L);
  TrajectoryProbes probes;
  for (const auto& q : charges.local) probes.operators.push_back(&q);
  const Propagator propagator(spectrum);
  return evolve(state, propagator, probes, times).operators;
}

double quantile(std::vector<double> sample, double level) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile: level must lie in [0, 1]");
  std::sort(sample.begin(), sample.end());
  const double h = level * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

EnsembleSeries aggregate(std::span<const TimeSeries> members, std::vector<double> quantile_levels) {
  if (members.empty()) throw std::invalid_argument("aggregate: no members");
  EnsembleSeries out;
  out.times = members.front().times;
  for (const auto& m : members) {
    if (m.times != out.times) throw std::invalid_argument("aggregate: members use different time grids");
  }
  const std::size_t nt = out.times.size();
  out.mean.assign(nt, 0.0);
  out.quantile_levels = std::move(quantile_levels);
  out.quantiles.assign(out.quantile_levels.size(), std::vector<double>(nt));
  std::vector<double> column(members.size());
  for (std::size_t t = 0; t < nt; ++t) {
    double sum = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      column[m] = members[m].values[t];
      sum += column[m];
    }
    out.mean[t] = sum / static_cast<double>(members.size());
    for (std::size_t q = 0; q < out.quantile_levels.size(); ++q) out.quantiles[q][t] = quantile(column, out.quantile_levels[q]);
  }
  out.meta.count = members.size();
  out.meta.first_seed = members.front().meta.first_seed;
  out.meta.last_seed = members.back().meta.last_seed;
  out.meta.aggregation = "mean+quantiles";
  return out;
}

WindowStats late_time_stats(const TimeSeries& series, double t_from) {
  WindowStats out;
  double sum = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] < t_from) continue;
    sum += series.values[i];
    ++out.count;
  }
  if (out.count == 0) throw std::invalid_argument("late_time_stats: no samples after t_from");
  out.mean = sum / static_cast<double>(out.count);
  double var = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] < t_from) continue;
    var += (series.values[i] - out.mean) * (series.values[i] - out.mean);
  }
  out.stddev = std::sqrt(var / static_cast<double>(out.count));
  return out;
}

}  // namespace ethlab
