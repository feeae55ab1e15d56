#include <benchmark/benchmark.h>

#include "ethlab/dynamics.hpp"
#include "ethlab/entanglement.hpp"
#include "ethlab/eth.hpp"
#include "ethlab/sectors.hpp"
#include "ethlab/spectral.hpp"

using namespace ethlab;

namespace {

HamiltonianSpec qubit(int L) {
  HamiltonianSpec s;
  s.L = L;
  return s;
}

Spectrum parity_spectrum(int L) {
  const std::vector<Symmetry> parity{Symmetry::Parity};
  return solve(build_qubit_hamiltonian(qubit(L)), L, 2, parity);
}

void BM_AssembleQubit(benchmark::State& state) {
  const int L = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_qubit_hamiltonian(qubit(L)));
  state.SetComplexityN(lattice_dim(L, 2));
}
BENCHMARK(BM_AssembleQubit)->DenseRange(8, 16, 2)->Unit(benchmark::kMillisecond);

void BM_AssembleQutrit(benchmark::State& state) {
  const int L = int(state.range(0));
  HamiltonianSpec s;
  s.kind = ChainKind::Qutrit;
  s.L = L;
  for (auto _ : state) benchmark::DoNotOptimize(build_qutrit_hamiltonian(s));
}
BENCHMARK(BM_AssembleQutrit)->DenseRange(5, 9, 1)->Unit(benchmark::kMillisecond);

void BM_DecomposeParity(benchmark::State& state) {
  const int L = int(state.range(0));
  const auto h = build_qubit_hamiltonian(qubit(L));
  const std::vector<Symmetry> parity{Symmetry::Parity};
  for (auto _ : state) benchmark::DoNotOptimize(decompose(h, L, 2, parity));
}
BENCHMARK(BM_DecomposeParity)->DenseRange(8, 14, 2)->Unit(benchmark::kMillisecond);

void BM_DiagonalizeParitySectors(benchmark::State& state) {
  const int L = int(state.range(0));
  const auto h = build_qubit_hamiltonian(qubit(L));
  const std::vector<Symmetry> parity{Symmetry::Parity};
  const auto blocks = decompose(h, L, 2, parity);
  for (auto _ : state) benchmark::DoNotOptimize(diagonalize_blocks(blocks));
}
BENCHMARK(BM_DiagonalizeParitySectors)->DenseRange(6, 11, 1)->Unit(benchmark::kMillisecond);

void BM_DiagonalizeQutritSectors(benchmark::State& state) {
  const int L = int(state.range(0));
  HamiltonianSpec s;
  s.kind = ChainKind::Qutrit;
  s.L = L;
  const std::vector<Symmetry> charge{Symmetry::Charge};
  const auto blocks = decompose(build_qutrit_hamiltonian(s), L, 3, charge);
  for (auto _ : state) benchmark::DoNotOptimize(diagonalize_blocks(blocks));
}
BENCHMARK(BM_DiagonalizeQutritSectors)->DenseRange(4, 7, 1)->Unit(benchmark::kMillisecond);

void BM_ReduceSingleSite(benchmark::State& state) {
  const int L = int(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXcd psi(lattice_dim(L, 2));
  for (auto& v : psi) v = Complex(g(rng), g(rng));
  psi.normalize();
  for (auto _ : state) benchmark::DoNotOptimize(site_entropy(psi, L / 2, L, 2));
}
BENCHMARK(BM_ReduceSingleSite)->DenseRange(8, 16, 2)->Unit(benchmark::kMicrosecond);

void BM_ReduceHalfChain(benchmark::State& state) {
  const int L = int(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::VectorXcd psi(lattice_dim(L, 2));
  for (auto& v : psi) v = Complex(g(rng), g(rng));
  psi.normalize();
  std::vector<int> half(L / 2);
  for (int k = 0; k < L / 2; ++k) half[k] = k + 1;
  for (auto _ : state) benchmark::DoNotOptimize(von_neumann_entropy(reduce(psi, half, L, 2)));
}
BENCHMARK(BM_ReduceHalfChain)->DenseRange(8, 14, 2)->Unit(benchmark::kMicrosecond);

// One product state evolved over 64 times with a site-1 entropy probe.
void BM_EvolveProductState(benchmark::State& state) {
  const int L = int(state.range(0));
  const auto s = parity_spectrum(L);
  const Propagator prop(s);
  ProductStateSpec p;
  p.L = L;
  p.seed = 3;
  const auto psi = random_product_state(p);
  const auto times = uniform_times(0.0, 63.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(psi, prop, TrajectoryProbes{{}, {1}}, times));
  state.SetItemsProcessed(state.iterations() * std::int64_t(times.size()));
}
BENCHMARK(BM_EvolveProductState)->DenseRange(6, 11, 1)->Unit(benchmark::kMillisecond);

void BM_DiagOffdiagRatio(benchmark::State& state) {
  const int L = int(state.range(0));
  const auto s = parity_spectrum(L);
  const auto x = embed_at_site(local::sigma_x(), 1, L, 2);
  for (auto _ : state) benchmark::DoNotOptimize(diag_offdiag_ratio(s, x));
}
BENCHMARK(BM_DiagOffdiagRatio)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
