#include <cmath>

#include <gtest/gtest.h>

#include "ethlab/dynamics.hpp"
#include "ethlab/ensembles.hpp"
#include "ethlab/entanglement.hpp"
#include "ethlab/sectors.hpp"
#include "ethlab/spectral.hpp"
#include "oracles.hpp"

using namespace ethlab;

namespace {

HamiltonianSpec qubit_spec(int L) {
  HamiltonianSpec s;
  s.L = L;
  return s;
}

HamiltonianSpec qutrit_spec(int L, double a = 1.0) {
  HamiltonianSpec s;
  s.kind = ChainKind::Qutrit;
  s.L = L;
  s.a = a;
  s.seed = 8;
  return s;
}

Spectrum full_spectrum(const OperatorMatrix& h, int L, int d) {
  const std::vector<Symmetry> none;
  return solve(h, L, d, none);
}

ProductStateSpec qubit_states(int L, std::uint64_t seed) {
  ProductStateSpec p;
  p.L = L;
  p.seed = seed;
  return p;
}

ProductStateSpec qutrit_states(int L, double f, std::uint64_t seed) {
  ProductStateSpec p;
  p.kind = ProductStateKind::RandomQutritF;
  p.L = L;
  p.f = {f};
  p.seed = seed;
  return p;
}

long binomial(int n, int k) {
  long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Trapezoid average and variance of a uniformly sampled series.
std::pair<double, double> trapezoid_mean_var(const std::vector<double>& v) {
  const auto n = v.size();
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < n; ++i) s += v[i];
  const double mean = s / static_cast<double>(n - 1);
  double q = 0.5 * ((v.front() - mean) * (v.front() - mean) + (v.back() - mean) * (v.back() - mean));
  for (std::size_t i = 1; i + 1 < n; ++i) q += (v[i] - mean) * (v[i] - mean);
  return {mean, q / static_cast<double>(n - 1)};
}

}  // namespace

TEST(ProductStates, QubitIsUnentangledAndNormalized) {
  const auto state = random_product_state(qubit_states(6, 4));
  EXPECT_NEAR(state.amplitudes.norm(), 1.0, 1e-12);
  for (int r = 1; r <= 6; ++r) EXPECT_NEAR(site_entropy(state.amplitudes, r, 6, 2), 0.0, 1e-9);
  EXPECT_EQ(state.dim, 2);
}

TEST(ProductStates, QutritChargeFractionAndBinomialSectors) {
  const int L = 5;
  const double f = 0.3;
  const auto state = random_product_state(qutrit_states(L, f, 2));
  const auto charges = build_charge_operators(L);
  for (const auto& q : charges.local) {
    EXPECT_NEAR(state.amplitudes.dot(q.sparse() * state.amplitudes).real(), f, 1e-12);
  }
  std::vector<double> sector_weight(L + 1, 0.0);
  for (long b = 0; b < state.amplitudes.size(); ++b) sector_weight[count_charge(b, L)] += std::norm(state.amplitudes(b));
  for (int n = 0; n <= L; ++n) {
    EXPECT_NEAR(sector_weight[n], binomial(L, n) * std::pow(f, n) * std::pow(1 - f, L - n), 1e-10) << n;
  }
}

TEST(ProductStates, QutritExtremes) {
  const int L = 4;
  const auto empty = random_product_state(qutrit_states(L, 0.0, 1));
  for (long b = 0; b < empty.amplitudes.size(); ++b) {
    if (count_charge(b, L) > 0) EXPECT_EQ(std::abs(empty.amplitudes(b)), 0.0);
  }
  const auto full = random_product_state(qutrit_states(L, 1.0, 1));
  EXPECT_NEAR(std::abs(full.amplitudes(full.amplitudes.size() - 1)), 1.0, 1e-12);
  const auto h = build_qutrit_hamiltonian(qutrit_spec(L));
  EXPECT_LT((h.sparse() * full.amplitudes).norm(), 1e-12);
}

TEST(ProductStates, EnergyTargetAndRejectionCap) {
  const auto spec = qubit_spec(6);
  const auto terms = qubit_hamiltonian_terms(spec);
  auto p = qubit_states(6, 3);
  p.target_E = -0.4;
  const auto state = random_product_state(p, terms);
  const auto h = build_qubit_hamiltonian(spec);
  EXPECT_NEAR(state.amplitudes.dot(h.sparse() * state.amplitudes).real(), -0.4, 0.002);
  EXPECT_GE(state.attempts, 1);
  p.target_E = 0.95;
  p.max_attempts = 20;
  EXPECT_THROW(random_product_state(p, terms), RejectionLimitError);
  p.target_E = -0.4;
  EXPECT_THROW(random_product_state(p), std::invalid_argument);
  auto bad = qutrit_states(3, 1.5, 1);
  EXPECT_THROW(random_product_state(bad), std::invalid_argument);
}

TEST(ProductStates, SameSeedSameState) {
  const auto a = random_product_state(qutrit_states(4, 0.4, 77));
  const auto b = random_product_state(qutrit_states(4, 0.4, 77));
  EXPECT_EQ(a.amplitudes, b.amplitudes);
}

TEST(MicrocanonicalState, WindowSupport) {
  const auto h = build_qubit_hamiltonian(qubit_spec(6));
  const auto s = full_spectrum(h, 6, 2);
  const auto window = make_window(s, -0.3, 0.05);
  const auto state = random_microcanonical_state(s, window, 6, 2, 5);
  const auto c = s.to_energy_basis(state.amplitudes);
  double inside = 0.0;
  for (Index k : window.member_indices) inside += std::norm(c(k));
  EXPECT_NEAR(inside, 1.0, 1e-12);
  const double e = state.amplitudes.dot(h.sparse() * state.amplitudes).real();
  EXPECT_GE(e, window.e_min - 1e-12);
  EXPECT_LE(e, window.e_max + 1e-12);

  const auto x = embed_at_site(local::sigma_x(), 2, 6, 2);
  const auto diag = s.diagonal_elements(x);
  double lo = 1e9, hi = -1e9;
  for (Index k : window.member_indices) {
    lo = std::min(lo, diag(k));
    hi = std::max(hi, diag(k));
  }
  // The dephased value is a convex combination of the member values.
  const double value = time_average(state, s, x).value;
  EXPECT_GE(value, lo - 1e-12);
  EXPECT_LE(value, hi + 1e-12);

  const auto single = make_window(s, s.energies()(3), 1e-12);
  const auto one = random_microcanonical_state(s, single, 6, 2, 9);
  EXPECT_NEAR(std::abs(one.amplitudes.dot(s.eigenvector(3))), 1.0, 1e-12);
  MicrocanonicalWindow empty;
  EXPECT_THROW(random_microcanonical_state(s, empty, 6, 2, 1), EmptyWindowError);
}

TEST(Evolution, MatchesDenseExponential) {
  auto spec = qutrit_spec(3);
  spec.h2 = 0.3;
  const auto h = build_qutrit_hamiltonian(spec);
  const std::vector<Symmetry> charge{Symmetry::Charge};
  const auto s = solve(h, 3, 3, charge);
  const auto state = random_product_state(qutrit_states(3, 0.4, 6));
  const auto op = embed_at_site(local::gell_mann(1), 2, 3, 3);
  const std::vector<double> times{0.0, 0.7, 3.1, 10.0, 55.5};
  const auto series = evolve_expectation(state, s, op, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto psi = oracle::evolve_dense(h.dense(), state.amplitudes, times[i]);
    EXPECT_NEAR(series.values[i], psi.dot(op.dense() * psi).real(), 1e-9);
  }
  const auto ent = evolve_entropy(state, s, 1, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto psi = oracle::evolve_dense(h.dense(), state.amplitudes, times[i]);
    EXPECT_NEAR(ent.values[i], oracle::entropy_bits(oracle::partial_trace(psi, {1}, 3, 3)), 1e-9);
  }
  EXPECT_NEAR(ent.values[0], 0.0, 1e-9);
}

TEST(Evolution, ConservationLaws) {
  const int L = 5;
  const auto h = build_qutrit_hamiltonian(qutrit_spec(L));
  const std::vector<Symmetry> charge{Symmetry::Charge};
  const auto s = solve(h, L, 3, charge);
  const auto charges = build_charge_operators(L);
  const auto state = random_product_state(qutrit_states(L, 0.35, 12));
  const auto times = uniform_times(0.0, 50.0, 0.5);
  const Propagator prop(s, 16);
  const auto r = evolve(state, prop, TrajectoryProbes{{&h, &charges.total, &charges.local[0]}, {}}, times);
  double local_spread = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(r.norm[i], 1.0, 1e-10);
    EXPECT_NEAR(r.operators[0].values[i], r.operators[0].values[0], 1e-9);
    EXPECT_NEAR(r.operators[1].values[i], r.operators[1].values[0], 1e-9);
    local_spread = std::max(local_spread, std::abs(r.operators[2].values[i] - r.operators[2].values[0]));
  }
  EXPECT_GT(local_spread, 1e-3);
}

TEST(Evolution, EigenstateIsStationary) {
  const auto h = build_qubit_hamiltonian(qubit_spec(5));
  const auto s = full_spectrum(h, 5, 2);
  StateVector eig{s.eigenvector(11), 5, 2, "eigenstate", 0, 1};
  const auto x = embed_at_site(local::sigma_x(), 3, 5, 2);
  const auto series = evolve_expectation(eig, s, x, uniform_times(0.0, 20.0, 1.0));
  for (double v : series.values) EXPECT_NEAR(v, series.values[0], 1e-12);
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  EXPECT_THROW(evolve_expectation(eig, s, x, unsorted), std::invalid_argument);
}

TEST(Evolution, ChargeProfileWithoutSpreadingIsFrozen) {
  const int L = 4;
  const auto h = build_qutrit_hamiltonian(qutrit_spec(L, 0.0));
  const std::vector<Symmetry> charge{Symmetry::Charge};
  const auto s = solve(h, L, 3, charge);
  auto p = qutrit_states(L, 0.0, 3);
  p.f = {0.9, 0.1, 0.5, 0.2};
  const auto state = random_product_state(p);
  const auto profile = charge_profile(state, s, uniform_times(0.0, 40.0, 0.5));
  ASSERT_EQ(profile.size(), 4u);
  for (int r = 0; r < L; ++r) {
    for (double v : profile[r].values) EXPECT_NEAR(v, p.f[r], 1e-9);
  }
  const auto qubit = random_product_state(qubit_states(4, 1));
  EXPECT_THROW(charge_profile(qubit, s, std::vector<double>{0.0}), std::invalid_argument);
}

TEST(TimeAverage, EqualsDiagonalEnsemble) {
  const int L = 6;
  const auto h = build_qubit_hamiltonian(qubit_spec(L));
  const auto s = full_spectrum(h, L, 2);
  const auto state = random_product_state(qubit_states(L, 31));
  const auto x = embed_at_site(local::sigma_x(), 1, L, 2);
  const auto avg = time_average(state, s, x);
  EXPECT_FALSE(avg.degenerate);
  const auto w = diagonal_ensemble(state.amplitudes, s);
  EXPECT_NEAR(avg.value, ensemble_average(w, s.diagonal_elements(x)), 1e-10);
  EXPECT_NEAR(time_average(state, s, identity_operator(64)).value, 1.0, 1e-12);
}

// The sampled window mean is known in closed form: each pair of levels contributes
// its matrix element times the trapezoid sum of exp(i w t) over the grid.
TEST(TimeAverage, WindowMeanMatchesExactKernel) {
  const int L = 6;
  const auto h = build_qubit_hamiltonian(qubit_spec(L));
  const auto s = full_spectrum(h, L, 2);
  const auto state = random_product_state(qubit_states(L, 31));
  const auto x = embed_at_site(local::sigma_x(), 1, L, 2);
  const double dt = 0.1;
  const long steps = 20000;
  const auto series = evolve_expectation(state, s, x, uniform_times(0.0, dt * steps, dt));
  const double mean = trapezoid_mean_var(series.values).first;
  EXPECT_NEAR(mean, oracle::window_mean(h.dense(), x.dense(), state.amplitudes, dt, steps), 1e-9);
}

TEST(TimeAverage, LongWindowWithinRelativeTolerance) {
  const int L = 6;
  const auto h = build_qubit_hamiltonian(qubit_spec(L));
  const auto s = full_spectrum(h, L, 2);
  const auto state = random_product_state(qubit_states(L, 31));
  const auto x = embed_at_site(local::sigma_x(), 1, L, 2);
  const double value = time_average(state, s, x).value;
  const auto series = evolve_expectation(state, s, x, uniform_times(0.0, 2000.0, 0.1));
  EXPECT_NEAR(trapezoid_mean_var(series.values).first, value, 1e-3 * std::abs(value));
}

TEST(FluctuationBound, AnalyticVarianceMatchesLongWindow) {
  const int L = 6;
  const auto h = build_qubit_hamiltonian(qubit_spec(L));
  const std::vector<Symmetry> none;
  const auto s = solve(h, L, 2, none);
  const auto state = random_product_state(qubit_states(L, 17));
  const auto x = embed_at_site(local::sigma_x(), 1, L, 2);
  const auto fb = fluctuation_bound(state, s, x);
  EXPECT_LE(fb.variance, fb.bound);
  const auto series = evolve_expectation(state, s, x, uniform_times(0.0, 5000.0, 0.1));
  const auto [mean, var] = trapezoid_mean_var(series.values);
  EXPECT_NEAR(var, fb.variance, 0.05 * fb.variance);
  EXPECT_NEAR(fluctuation_bound(state, s, h).variance, 0.0, 1e-20);
}

TEST(CentralMoments, EigenstateAndPair) {
  const auto h = build_qubit_hamiltonian(qubit_spec(5));
  const auto s = full_spectrum(h, 5, 2);
  StateVector eig{s.eigenvector(4), 5, 2, "eigenstate", 0, 1};
  for (double m : central_moments(eig, s, 4)) EXPECT_NEAR(m, 0.0, 1e-14);
  StateVector pair{(s.eigenvector(3) + s.eigenvector(20)) / std::sqrt(2.0), 5, 2, "pair", 0, 1};
  const double delta = 0.5 * (s.energies()(20) - s.energies()(3));
  const auto m = central_moments(pair, s, 3);
  EXPECT_NEAR(m[0], delta * delta, 1e-13);
  EXPECT_NEAR(m[1], 0.0, 1e-13);
  EXPECT_THROW(central_moments(pair, s, 1), std::invalid_argument);
}

TEST(Aggregate, QuantilesAndMean) {
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.1), 1.3);
  EXPECT_DOUBLE_EQ(quantile({5.0}, 0.9), 5.0);
  std::vector<TimeSeries> members(3);
  for (int m = 0; m < 3; ++m) {
    members[m].times = {0.0, 1.0};
    members[m].values = {double(m), double(2 * m)};
    members[m].meta.first_seed = members[m].meta.last_seed = 10 + m;
  }
  const auto agg = aggregate(members);
  EXPECT_DOUBLE_EQ(agg.mean[1], 2.0);
  EXPECT_DOUBLE_EQ(agg.quantiles[4][1], 2.0);
  EXPECT_EQ(agg.meta.count, 3u);
  EXPECT_EQ(agg.meta.last_seed, 12u);
  members[1].times = {0.0, 2.0};
  EXPECT_THROW(aggregate(members), std::invalid_argument);
}

TEST(LateTimeStats, WindowedMeanAndSpread) {
  TimeSeries ts;
  ts.times = {0, 1, 2, 3};
  ts.values = {10, 1, 2, 3};
  const auto w = late_time_stats(ts, 1.0);
  EXPECT_EQ(w.count, 3u);
  EXPECT_DOUBLE_EQ(w.mean, 2.0);
  EXPECT_NEAR(w.stddev, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_THROW(late_time_stats(ts, 5.0), std::invalid_argument);
}
