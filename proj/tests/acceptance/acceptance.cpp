// One line per acceptance criterion: "C<n> PASS|FAIL <title>: <measurements>".
// With an argument ("C3") only that criterion runs. Exit status is 0 iff every
// criterion that ran passed.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "ethlab/cli/app.hpp"
#include "ethlab/dynamics.hpp"
#include "ethlab/ensembles.hpp"
#include "ethlab/entanglement.hpp"
#include "ethlab/eth.hpp"
#include "ethlab/parallel.hpp"
#include "ethlab/sectors.hpp"
#include "ethlab/spectral.hpp"

namespace fs = std::filesystem;
using namespace ethlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records one sub-check; the criterion passes only if all of them do.
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

unsigned threads() { return cli::worker_count(); }

HamiltonianSpec qubit(int L, double hx = 1.05, double hz = 0.5) {
  HamiltonianSpec s;
  s.L = L;
  s.hx = hx;
  s.hz = hz;
  return s;
}

HamiltonianSpec qutrit(int L, double a = 1.0) {
  HamiltonianSpec s;
  s.kind = ChainKind::Qutrit;
  s.L = L;
  s.a = a;
  return s;
}

Spectrum qubit_spectrum(const OperatorMatrix& h, int L) {
  const std::vector<Symmetry> parity{Symmetry::Parity};
  return solve(h, L, 2, parity, {}, {}, threads());
}

Spectrum qutrit_spectrum(const OperatorMatrix& h, int L, std::optional<std::vector<int>> charges = std::nullopt) {
  const std::vector<Symmetry> charge{Symmetry::Charge};
  DecomposeOptions o;
  o.charges = std::move(charges);
  return solve(h, L, 3, charge, o, {}, threads());
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

// Random qubit product states at <H> = energy +- tol, one derived stream per state.
std::vector<StateVector> qubit_states(const TermList& terms, int L, double energy, double tol, std::size_t count,
                                      std::uint64_t seed) {
  std::vector<StateVector> out(count);
  parallel_for(count, threads(), [&](std::size_t i) {
    ProductStateSpec p;
    p.L = L;
    p.target_E = energy;
    p.tolerance = tol;
    auto rng = derive_stream(seed, i);
    out[i] = random_product_state(p, terms, rng);
  });
  return out;
}

std::vector<StateVector> qutrit_states(int L, std::vector<double> f, std::size_t count, std::uint64_t seed) {
  std::vector<StateVector> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    ProductStateSpec p;
    p.kind = ProductStateKind::RandomQutritF;
    p.L = L;
    p.f = f;
    auto rng = derive_stream(seed, i);
    out[i] = random_product_state(p, {}, rng);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome c1_sector_bookkeeping() {
  Outcome r;
  bool dims_ok = true;
  for (int L = 2; L <= 8; ++L) {
    std::vector<std::int64_t> counted(L + 1, 0);
    const std::int64_t full = lattice_dim(L, 3);
    for (std::int64_t b = 0; b < full; ++b) {
      int n = 0;
      for (std::int64_t x = b; x > 0; x /= 3) n += (x % 3 == 2);
      ++counted[n];
    }
    const auto blocks = decompose(build_qutrit_hamiltonian(qutrit(L)), L, 3, std::vector<Symmetry>{Symmetry::Charge});
    std::int64_t total = 0;
    for (const auto& b : blocks) {
      const int n = *b.label->charge;
      std::int64_t binom = 1;
      for (int k = 1; k <= n; ++k) binom = binom * (L - n + k) / k;
      const std::int64_t formula = (std::int64_t{1} << (L - n)) * binom;
      dims_ok = dims_ok && b.dim() == formula && counted[n] == formula && charge_sector_dimension(L, n) == formula;
      total += b.dim();
    }
    dims_ok = dims_ok && total == full && blocks.size() == std::size_t(L + 1);
  }
  r.require(dims_ok, "sector dimensions 2^(L-n) C(L,n), summing to 3^L, L=2..8");

  double worst = 0.0;
  for (int L = 2; L <= 8; ++L) {
    HamiltonianSpec t = qutrit(L);
    DecomposeOptions zero;
    zero.charges = std::vector<int>{0};
    const auto sector = diagonalize(
        decompose(build_qutrit_hamiltonian(t), L, 3, std::vector<Symmetry>{Symmetry::Charge}, zero).front());
    HamiltonianSpec q = qubit(L, t.h1, t.h3);
    q.J = t.J;
    const std::vector<Symmetry> none;
    const auto reference = solve(build_qubit_hamiltonian(q), L, 2, none);
    worst = std::max(worst, (sector.energies - reference.energies()).cwiseAbs().maxCoeff());
  }
  r.require(worst < 1e-10, fmt::format("Q=0 vs qubit spectrum max |dE| = {:.2e} (< 1e-10)", worst));
  return r;
}

Outcome c2_chaos_classification() {
  Outcome r;
  auto classify = [](const Eigen::VectorXd& e) { return classify_spacing(spacing_distribution(as_vector(e))); };
  auto sector = [&](const HamiltonianSpec& s, int parity) {
    DecomposeOptions o;
    o.parity = parity;
    const std::vector<Symmetry> p{Symmetry::Parity};
    return classify(solve(build_qubit_hamiltonian(s), s.L, 2, p, o, {}, threads()).energies());
  };
  for (int parity : {1, -1}) {
    const auto c = sector(qubit(10), parity);
    r.require(c.kind == SpacingClass::WignerDyson && c.chi2_wigner < 0.5 * c.chi2_poisson,
              fmt::format("(a) P={:+d} {} chi2 WD {:.3f} vs P {:.3f}", parity, to_string(c.kind), c.chi2_wigner,
                          c.chi2_poisson));
  }
  const std::vector<Symmetry> none;
  const auto full = classify(solve(build_qubit_hamiltonian(qubit(10)), 10, 2, none, {}, {}, threads()).energies());
  r.require(full.kind == SpacingClass::Intermediate || full.kind == SpacingClass::Poisson,
            fmt::format("(a) unsectored {} chi2 WD {:.3f} vs P {:.3f}", to_string(full.kind), full.chi2_wigner,
                        full.chi2_poisson));
  const auto no_hx = sector(qubit(10, 0.0, 0.5), 1);
  r.require(no_hx.kind == SpacingClass::Degenerate, fmt::format("(b) hx=0 {}", to_string(no_hx.kind)));
  const auto no_hz = sector(qubit(10, 1.05, 0.0), 1);
  r.require(no_hz.kind != SpacingClass::WignerDyson, fmt::format("(c) hz=0 {}", to_string(no_hz.kind)));

  const auto t = qutrit_spectrum(build_qutrit_hamiltonian(qutrit(8)), 8, std::vector<int>{1, 2, 3, 4, 5});
  for (const auto& block : t.blocks()) {
    const auto c = classify(block.energies);
    r.require(c.kind == SpacingClass::WignerDyson,
              fmt::format("(d) Q={} {} chi2 WD {:.3f} vs P {:.3f}", *block.sector->charge, to_string(c.kind),
                          c.chi2_wigner, c.chi2_poisson));
  }
  return r;
}

struct EthScaling {
  std::vector<std::pair<double, double>> counter;  // (L, mean D)
  std::vector<std::pair<double, double>> local;    // (L, ratio of sx(1))
  std::vector<std::pair<double, double>> global;   // (L, ratio of prod sx)
};

const EthScaling& eth_scaling() {
  static const EthScaling data = [] {
    EthScaling d;
    for (int L = 4; L <= 10; ++L) {
      const auto h = build_qubit_hamiltonian(qubit(L));
      const auto s = qubit_spectrum(h, L);
      std::vector<double> values(50);
      parallel_for(values.size(), threads(), [&](std::size_t i) {
        auto rng = derive_stream(3, std::uint64_t(L) * 1000 + i);
        const auto op = random_fixed_spectrum_operator(L, rng);
        values[i] = counter_diagonal_average(s, embed_at_site(op.op, op.site, L, 2));
      });
      d.counter.emplace_back(L, mean(values));
      d.local.emplace_back(L, diag_offdiag_ratio(s, embed_at_site(local::sigma_x(), 1, L, 2)).value);
      std::vector<SiteFactor> all;
      for (int k = 1; k <= L; ++k) all.push_back({k, local::sigma_x()});
      d.global.emplace_back(L, diag_offdiag_ratio(s, embed_product(all, L, 2)).value);
    }
    return d;
  }();
  return data;
}

Outcome c3_counter_diagonal() {
  Outcome r;
  const auto& d = eth_scaling();
  const auto fit = scaling_fit(d.counter, true);
  std::string values;
  for (const auto& [L, D] : d.counter) values += fmt::format(" {:.4f}", D);
  r.require(fit.slope >= -0.5 && fit.slope <= -0.3,
            fmt::format("slope of ln D over L=4..10 = {:.4f} (in [-0.5, -0.3]); D:{}", fit.slope, values));
  return r;
}

Outcome c4_diagonal_dominance() {
  Outcome r;
  const auto& d = eth_scaling();
  bool monotone = true;
  for (std::size_t i = 1; i < d.local.size(); ++i) monotone = monotone && d.local[i].second > d.local[i - 1].second;
  const double slope = scaling_fit(d.local, true).slope;
  std::string values;
  for (const auto& [L, v] : d.local) values += fmt::format(" {:.3f}", v);
  r.require(monotone, "sx(1) ratio increasing in L:" + values);
  r.require(slope > 0.2, fmt::format("log-slope {:.4f} (> 0.2)", slope));
  double lo = INFINITY, hi = 0.0;
  for (const auto& [L, v] : d.global) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.require(hi / lo < 2.0, fmt::format("prod sx ratio range [{:.3f}, {:.3f}], factor {:.3f} (< 2)", lo, hi, hi / lo));
  return r;
}

struct EntropyRun {
  double late_mean = 0.0;     // ensemble mean of S over the late window
  double temporal_std = 0.0;  // mean over states of each state's late-window std
  double gibbs = 0.0;
};

EntropyRun qubit_entropy_run(int L, std::size_t count, std::uint64_t seed) {
  const auto spec = qubit(L);
  const auto h = build_qubit_hamiltonian(spec);
  const auto s = qubit_spectrum(h, L);
  const auto states = qubit_states(qubit_hamiltonian_terms(spec), L, -0.4, 0.002, count, seed);
  const auto times = uniform_times(0.0, 1000.0, 1.0);
  const Propagator prop(s);
  std::vector<TimeSeries> series(count);
  parallel_for(count, threads(), [&](std::size_t i) {
    series[i] = evolve(states[i], prop, TrajectoryProbes{{}, {1}}, times).entropies[0];
  });
  EntropyRun out;
  std::vector<double> stds;
  for (const auto& ts : series) {
    const auto w = late_time_stats(ts, 500.0);
    out.late_mean += w.mean / double(count);
    stds.push_back(w.stddev);
  }
  out.temporal_std = mean(stds);
  const auto weights = gibbs_state(s, {solve_beta(s, -0.4), std::nullopt});
  out.gibbs = thermal_entropy_of_site(weights, s, 1, L, 2);
  return out;
}

Outcome c5_product_state_thermalization() {
  Outcome r;
  std::map<int, EntropyRun> runs;
  for (int L = 6; L <= 10; ++L) runs[L] = qubit_entropy_run(L, 100, 500 + L);
  const auto& ten = runs[10];
  r.require(std::abs(ten.late_mean - ten.gibbs) < 0.05,
            fmt::format("L=10 late mean S {:.4f} vs Gibbs {:.4f}, |diff| {:.4f} (< 0.05)", ten.late_mean, ten.gibbs,
                        std::abs(ten.late_mean - ten.gibbs)));
  bool decreasing = true;
  std::string values;
  for (int L = 6; L <= 10; ++L) {
    values += fmt::format(" L={}:{:.4f}", L, runs[L].temporal_std);
    if (L > 6) decreasing = decreasing && runs[L].temporal_std < runs[L - 1].temporal_std;
  }
  r.require(decreasing, "temporal std decreasing:" + values);
  return r;
}

Outcome c6_gibbs_vs_microcanonical() {
  Outcome r;
  const int L = 12;
  const auto spec = qubit(L);
  const auto h = build_qubit_hamiltonian(spec);
  const auto s = qubit_spectrum(h, L);
  const std::vector<SiteFactor> pair{{1, local::sigma_x()}, {2, local::sigma_x()}};
  const auto op = embed_product(pair, L, 2);
  const Eigen::VectorXd diag = s.diagonal_elements(op);
  const auto terms = qubit_hamiltonian_terms(spec);
  const Propagator prop(s);
  const auto times = uniform_times(900.0, 1000.0, 10.0);
  const double step = 0.1;
  double dev_gibbs = 0.0, dev_micro = 0.0;
  for (int k = -8; k <= 8; ++k) {
    const double e = k * step;
    const auto states = qubit_states(terms, L, e, 0.002, 20, 600 + std::uint64_t(k + 8));
    std::vector<double> late(states.size());
    parallel_for(states.size(), threads(), [&](std::size_t i) {
      const auto v = evolve(states[i], prop, TrajectoryProbes{{&op}, {}}, times).operators[0].values;
      late[i] = mean(v);
    });
    const double observed = mean(late);
    const double gibbs = ensemble_average(gibbs_state(s, {solve_beta(s, e), std::nullopt}), diag);
    const double micro = window_average(make_window(s, e, 0.1), diag);
    dev_gibbs += std::abs(observed - gibbs) * step;
    dev_micro += std::abs(observed - micro) * step;
  }
  r.require(dev_gibbs < dev_micro, fmt::format("integrated |dev| from Gibbs {:.5f} vs microcanonical {:.5f}",
                                               dev_gibbs, dev_micro));
  return r;
}

// Trapezoid mean and variance of a uniformly sampled series.
std::pair<double, double> trapezoid_mean_var(const std::vector<double>& v) {
  const auto n = v.size();
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < n; ++i) s += v[i];
  const double m = s / double(n - 1);
  double q = 0.5 * ((v.front() - m) * (v.front() - m) + (v.back() - m) * (v.back() - m));
  for (std::size_t i = 1; i + 1 < n; ++i) q += (v[i] - m) * (v[i] - m);
  return {m, q / double(n - 1)};
}

Outcome c7_exact_identities() {
  Outcome r;
  const int L = 6;
  const auto spec = qubit(L);
  const auto h = build_qubit_hamiltonian(spec);
  const std::vector<Symmetry> none;
  const auto s = solve(h, L, 2, none);
  const auto x1 = embed_at_site(local::sigma_x(), 1, L, 2);
  const auto z3 = embed_at_site(local::sigma_z(), 3, L, 2);
  const std::vector<const OperatorMatrix*> ops{&x1, &z3};

  // Diagonal ensemble from an independent dense eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(h.dense());
  const Eigen::MatrixXcd& v = dense.eigenvectors();
  double worst_identity = 0.0, worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ProductStateSpec p;
    p.L = L;
    p.seed = seed;
    const auto state = random_product_state(p);
    const Eigen::VectorXcd c = v.adjoint() * state.amplitudes;
    for (const auto* op : ops) {
      const Eigen::MatrixXcd o = v.adjoint() * op->dense() * v;
      double expected = 0.0;
      for (Index i = 0; i < c.size(); ++i) expected += std::norm(c(i)) * o(i, i).real();
      worst_identity = std::max(worst_identity, std::abs(time_average(state, s, *op).value - expected));
      const auto fb = fluctuation_bound(state, s, *op);
      worst_ratio = std::max(worst_ratio, fb.variance / fb.bound);
    }
  }
  r.require(worst_identity < 1e-10, fmt::format("time average vs diagonal ensemble max |diff| {:.2e} (< 1e-10)",
                                                worst_identity));
  r.require(worst_ratio <= 1.0, fmt::format("max variance / max|O_ij|^2 = {:.3e} (<= 1)", worst_ratio));

  // Same pre-registered state and window as the unit suite.
  ProductStateSpec p;
  p.L = L;
  p.seed = 17;
  const auto state = random_product_state(p);
  const auto fb = fluctuation_bound(state, s, x1);
  const auto series = evolve_expectation(state, s, x1, uniform_times(0.0, 5000.0, 0.1));
  const double empirical = trapezoid_mean_var(series.values).second;
  const double rel = std::abs(empirical - fb.variance) / fb.variance;
  r.require(rel < 0.05, fmt::format("analytic variance {:.5e} vs T=5000 window {:.5e}, rel diff {:.4f} (< 0.05)",
                                    fb.variance, empirical, rel));

  double drift = 0.0;
  {
    const auto s8 = qubit_spectrum(build_qubit_hamiltonian(qubit(8)), 8);
    const auto h8 = build_qubit_hamiltonian(qubit(8));
    ProductStateSpec q;
    q.L = 8;
    q.seed = 4;
    const auto psi = random_product_state(q);
    const auto tr = evolve(psi, Propagator(s8), TrajectoryProbes{{&h8}, {}}, uniform_times(0.0, 200.0, 0.5));
    for (std::size_t i = 0; i < tr.norm.size(); ++i) {
      drift = std::max({drift, std::abs(tr.norm[i] - 1.0),
                        std::abs(tr.operators[0].values[i] - tr.operators[0].values[0])});
    }
  }
  {
    const int Lq = 6;
    const auto hq = build_qutrit_hamiltonian(qutrit(Lq));
    const auto sq = qutrit_spectrum(hq, Lq);
    const auto charges = build_charge_operators(Lq);
    const auto psi = qutrit_states(Lq, {0.35}, 1, 9).front();
    const auto tr = evolve(psi, Propagator(sq), TrajectoryProbes{{&hq, &charges.total}, {}},
                           uniform_times(0.0, 200.0, 0.5));
    for (std::size_t i = 0; i < tr.norm.size(); ++i) {
      drift = std::max({drift, std::abs(tr.norm[i] - 1.0),
                        std::abs(tr.operators[0].values[i] - tr.operators[0].values[0]),
                        std::abs(tr.operators[1].values[i] - tr.operators[1].values[0])});
    }
  }
  r.require(drift < 1e-9, fmt::format("norm/energy/charge drift {:.2e} (< 1e-9)", drift));
  return r;
}

Outcome c8_charge_diffusion() {
  Outcome r;
  const int L = 8;
  const auto h = build_qutrit_hamiltonian(qutrit(L));
  // hopping is ~a/L after normalization, so the front needs t ~ 150 to cross 8 sites; late = [200, 1000]
  const auto times = uniform_times(0.0, 1000.0, 0.5);
  constexpr double late_from = 200.0;
  struct Case {
    std::vector<double> f;
    int charge;
  };
  const std::vector<Case> cases{{{1, 0, 0, 0, 0, 0, 0, 0}, 1}, {{1, 1, 1, 1, 0, 0, 0, 0}, 4}};
  for (const auto& c : cases) {
    const auto s = qutrit_spectrum(h, L, std::vector<int>{c.charge});
    const auto psi = qutrit_states(L, c.f, 1, 21).front();
    const auto profile = charge_profile(psi, s, times);
    const double target = double(c.charge) / L;
    double worst = 0.0;
    for (const auto& site : profile) {
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= late_from) worst = std::max(worst, std::abs(site.values[i] - target));
      }
    }
    r.require(worst <= 0.1, fmt::format("Q={} late max |q_r - {:.3f}| = {:.4f} (<= 0.1)", c.charge, target, worst));
  }
  const auto frozen_h = build_qutrit_hamiltonian(qutrit(L, 0.0));
  const auto s0 = qutrit_spectrum(frozen_h, L);
  const std::vector<double> f{0.9, 0.1, 0.5, 0.2, 0.7, 0.3, 0.6, 0.4};
  const auto psi = qutrit_states(L, f, 1, 22).front();
  const auto profile = charge_profile(psi, s0, uniform_times(0.0, 100.0, 1.0));
  double drift = 0.0;
  for (int site = 0; site < L; ++site) {
    for (double q : profile[site].values) drift = std::max(drift, std::abs(q - f[site]));
  }
  r.require(drift < 1e-9, fmt::format("a=0 local charge drift {:.2e} (< 1e-9)", drift));
  return r;
}

Outcome c9_generalized_gibbs() {
  Outcome r;
  const int L = 6;
  const auto s = qutrit_spectrum(build_qutrit_hamiltonian(qutrit(L)), L);
  const Eigen::VectorXd& e = s.energies();
  const Eigen::VectorXd q = eigenstate_charges(s);
  auto rng = derive_stream(9, 0);
  std::uniform_real_distribution<double> ub(-3.0, 3.0), ug(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto w = gibbs_weights(e, &q, {ub(rng), ug(rng)});
    const double te = ensemble_average(w, e), tq = ensemble_average(w, q);
    const auto p = solve_beta_gamma(e, q, te, tq);
    const auto back = gibbs_weights(e, &q, p);
    worst = std::max(worst, std::hypot(ensemble_average(back, e) - te, ensemble_average(back, q) - tq));
  }
  r.require(worst < 1e-8, fmt::format("20 random targets, max residual {:.2e} (< 1e-8)", worst));
  const auto origin = solve_beta_gamma(e, q, 0.0, L / 3.0);
  r.require(origin.beta == 0.0 && origin.gamma && *origin.gamma == 0.0,
            fmt::format("(0, L/3) -> ({}, {})", origin.beta, origin.gamma.value_or(NAN)));
  return r;
}

Outcome c10_generic_eth_sectors() {
  Outcome r;
  const int L = 8, site = 4;
  const auto h = build_qutrit_hamiltonian(qutrit(L));
  const auto s = qutrit_spectrum(h, L);
  const auto l1 = embed_at_site(local::gell_mann(1), site, L, 3);
  const Propagator prop(s);
  const std::vector<double> times{0.0, 100.0};

  // Envelope: middle half (by rank) of eigenstates in the dominant sectors Q = 2, 3, 4.
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t b = 0; b < s.blocks().size(); ++b) {
    const int charge = *s.blocks()[b].sector->charge;
    if (charge < 2 || charge > 4) continue;
    const auto& members = s.block_indices(int(b));
    const std::size_t n = members.size();
    for (std::size_t k = n / 4; k < n - n / 4; ++k) {
      const double ent = site_entropy(s.eigenvector(members[k]), site, L, 3);
      lo = std::min(lo, ent);
      hi = std::max(hi, ent);
    }
  }

  auto run = [&](double f, std::uint64_t seed) {
    const auto states = qutrit_states(L, {f}, 40, seed);
    std::vector<double> x0(states.size()), x1(states.size()), ent(states.size());
    parallel_for(states.size(), threads(), [&](std::size_t i) {
      const auto tr = evolve(states[i], prop, TrajectoryProbes{{&l1}, {site}}, times);
      x0[i] = tr.operators[0].values[0];
      x1[i] = tr.operators[0].values[1];
      ent[i] = tr.entropies[0].values[1];
    });
    return std::tuple{x0, x1, ent};
  };

  const auto [x0, x1, ent] = run(3.0 / 8.0, 31);
  const auto [emin, emax] = std::minmax_element(ent.begin(), ent.end());
  r.require(*emin >= lo && *emax <= hi,
            fmt::format("f=3/8 S(site 4) at t=100 in [{:.4f}, {:.4f}], eigenstate envelope [{:.4f}, {:.4f}]", *emin,
                        *emax, lo, hi));
  const double ratio = stddev(x1) / stddev(x0);
  r.require(ratio < 0.25, fmt::format("f=3/8 lambda1(4) scatter t=100 / t=0 = {:.4f} (< 0.25)", ratio));
  const auto edge = run(7.0 / 8.0, 32);
  r.detail += fmt::format("; f=7/8 scatter ratio {:.4f} (reported only)",
                          stddev(std::get<1>(edge)) / stddev(std::get<0>(edge)));
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome c11_determinism() {
  Outcome r;
  const fs::path root = fs::temp_directory_path() / fmt::format("ethlab_acceptance_{}", ::getpid());
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"evolve",
       "[hamiltonian]\nL = 8\n[states]\ncount = 12\nenergies = -0.4, 0.3\ntolerance = 0.005\n[evolve]\n"
       "times = 0:30:0.5\nobservables = sx(1), sx(1)*sx(2)\nentropy_sites = 1, 4\nmembers = 3\nenergy_bins = 20\n"},
      {"eth", "[hamiltonian]\nL = 7\n[eth]\nobservables = sx(1), sz(3)\nsizes = 4:7:1\nrandom_operators = 6\n"
              "entropy_site = 2\nthermal_energies = -0.6:0.6:0.2\n"},
      {"levels", "[hamiltonian]\nL = 10\n"},
      {"spectrum", "[hamiltonian]\nkind = qutrit\nL = 5\n[spectrum]\nobservables = lambda1(2), Q\nentropy_sites = 3\n"},
      {"chargespread", "[hamiltonian]\nkind = qutrit\nL = 5\n[chargespread]\nf = 1, 0, 0, 0, 0\nstates = 3\n"
                       "times = 0:20:0.5\n"},
      {"thermal", "[hamiltonian]\nkind = qutrit\nL = 4\n[thermal]\nobservables = lambda1(2), Q\nentropy_site = 2\n"
                  "energies = -0.3:0.3:0.1\ncharges = 1, 1.5\nsurface_betas = -1:1:0.5\nsurface_mus = -0.5:0.5:0.5\n"},
      {"sweep", "[hamiltonian]\nL = 6\n[sweep]\nexperiment = evolve\nparameters = hamiltonian.hx\n"
                "points = 0.5 | 1.05\n[states]\ncount = 6\nenergies = -0.3\ntolerance = 0.01\n[evolve]\n"
                "times = 0:10:0.5\nentropy_sites = 1\nmembers = 2\n"}};
  const std::vector<const char*> thread_counts{"1", "3", "1"};
  for (const auto& [command, text] : runs) {
    const fs::path cfg = root / (command + ".cfg");
    std::ofstream(cfg) << "[run]\nseed = 77\n" << text;
    std::vector<fs::path> outs;
    bool ran = true;
    for (const char* t : thread_counts) {
      ::setenv("ETHLAB_THREADS", t, 1);
      outs.push_back(root / fmt::format("{}_{}_{}", command, t, outs.size()));
      const std::string cfg_s = cfg.string(), out_s = outs.back().string();
      const char* argv[] = {"ethlab", command.c_str(), "--config", cfg_s.c_str(), "--out", out_s.c_str()};
      std::ostringstream o, e;
      ran = ran && cli::run_cli(6, argv, o, e) == cli::kSuccess;
    }
    ::unsetenv("ETHLAB_THREADS");
    std::size_t files = 0;
    bool identical = ran;
    for (const auto& entry : fs::recursive_directory_iterator(outs[0])) {
      if (!ran || entry.path().extension() != ".csv") continue;
      const auto rel = fs::relative(entry.path(), outs[0]);
      const std::string ref = slurp(entry.path());
      for (std::size_t k = 1; k < outs.size(); ++k) identical = identical && slurp(outs[k] / rel) == ref;
      ++files;
    }
    r.require(identical && files > 0,
              fmt::format("{}: {} CSVs identical at ETHLAB_THREADS=1,3,1", command, ran ? files : 0));
  }
  fs::remove_all(root);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::tuple<std::string, std::string, std::function<Outcome()>>> criteria{
      {"C1", "sector bookkeeping", c1_sector_bookkeeping},
      {"C2", "chaos classification", c2_chaos_classification},
      {"C3", "counter-diagonal decay", c3_counter_diagonal},
      {"C4", "diagonal dominance", c4_diagonal_dominance},
      {"C5", "thermalization of product states", c5_product_state_thermalization},
      {"C6", "Gibbs vs microcanonical", c6_gibbs_vs_microcanonical},
      {"C7", "exact identities", c7_exact_identities},
      {"C8", "charge diffusion", c8_charge_diffusion},
      {"C9", "generalized Gibbs solver", c9_generalized_gibbs},
      {"C10", "generic ETH in charge sectors", c10_generic_eth_sectors},
      {"C11", "determinism across thread counts", c11_determinism}};
  const std::string only = argc > 1 ? argv[1] : "";
  bool all = true;
  int ran = 0;
  for (const auto& [id, title, check] : criteria) {
    if (!only.empty() && only != id) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("{} {} {}: {} ({:.0f} s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail, secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  if (ran == 0) {
    fmt::print(stderr, "unknown criterion '{}'\n", only);
    return 2;
  }
  return all ? 0 : 1;
}
