#include "ethlab/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "ethlab/spectral.hpp"

namespace ethlab {

namespace {

void validate_sites(std::vector<int>& sites, int L) {
  if (sites.empty()) throw std::invalid_argument("reduce: site list is empty");
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw std::invalid_argument("reduce: site list contains duplicates");
  }
  if (sites.front() < 1 || sites.back() > L) {
    throw std::out_of_range("reduce: sites must lie in 1.." + std::to_string(L));
  }
}

// kept_index[b] and traced_index[b] for every basis state b.
struct Split {
  std::vector<Index> kept;
  std::vector<Index> traced;
  Index kept_dim = 1;
  Index traced_dim = 1;
};

Split split_basis(const std::vector<int>& sites, int L, int dim) {
  Split split;
  std::vector<bool> keep(L + 1, false);
  for (int s : sites) keep[s] = true;
  const Index full = lattice_dim(L, dim);
  for (int r = 1; r <= L; ++r) (keep[r] ? split.kept_dim : split.traced_dim) *= dim;
  split.kept.resize(full);
  split.traced.resize(full);
  for (Index b = 0; b < full; ++b) {
    Index k = 0;
    Index t = 0;
    Index rest = b;
    Index place = full;
    for (int r = 1; r <= L; ++r) {
      place /= dim;
      const Index digit = rest / place;
      rest %= place;
      if (keep[r]) {
        k = k * dim + digit;
      } else {
        t = t * dim + digit;
      }
    }
    split.kept[b] = k;
    split.traced[b] = t;
  }
  return split;
}

Eigen::MatrixXcd reshape(const Eigen::VectorXcd& state, const Split& split) {
  Eigen::MatrixXcd m(split.kept_dim, split.traced_dim);
  for (Index b = 0; b < state.size(); ++b) m(split.kept[b], split.traced[b]) = state(b);
  return m;
}

}  // namespace

ReducedDensityMatrix reduce(const Eigen::VectorXcd& state, std::vector<int> sites, int L, int dim) {
  validate_sites(sites, L);
  if (state.size() != lattice_dim(L, dim)) {
    throw std::invalid_argument("reduce: state dimension does not match the lattice");
  }
  const Split split = split_basis(sites, L, dim);
  const Eigen::MatrixXcd m = reshape(state, split);
  ReducedDensityMatrix rho{std::move(sites), dim, {}};
  rho.matrix.noalias() = m * m.adjoint();
  return rho;
}

EigenstateReductions eigenstate_reductions(const Spectrum& spectrum, std::vector<int> sites, int L,
                                           int dim) {
  validate_sites(sites, L);
  if (spectrum.full_dim() != lattice_dim(L, dim)) {
    throw std::invalid_argument("eigenstate_reductions: spectrum does not live on this lattice");
  }
  const Split split = split_basis(sites, L, dim);
  EigenstateReductions table{std::move(sites), dim, std::vector<Eigen::MatrixXcd>(spectrum.size())};
  for (int b = 0; b < static_cast<int>(spectrum.blocks().size()); ++b) {
    const auto& block = spectrum.blocks()[b];
    if (block.size() == 0) continue;
    const Eigen::MatrixXcd full_vectors = block.basis.cast<Complex>() * block.vectors;
    for (Index k : spectrum.block_indices(b)) {
      const Eigen::MatrixXcd m = reshape(full_vectors.col(spectrum.locate(k).local), split);
      table.matrices[k].noalias() = m * m.adjoint();
    }
  }
  return table;
}

ReducedDensityMatrix EigenstateReductions::mix(const Eigen::VectorXd& weights) const {
  if (weights.size() != static_cast<Index>(matrices.size())) {
    throw std::invalid_argument("mix: one weight per eigenstate required");
  }
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("mix: negative weight");
  ReducedDensityMatrix rho{sites, dim, {}};
  if (matrices.empty()) return rho;
  rho.matrix = Eigen::MatrixXcd::Zero(matrices.front().rows(), matrices.front().cols());
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    if (weights(k) != 0.0) rho.matrix += weights(k) * matrices[k];
  }
  return rho;
}

ReducedDensityMatrix mixed_reduce(const Eigen::VectorXd& weights, const Spectrum& spectrum,
                                  std::vector<int> sites, int L, int dim) {
  if (weights.size() != spectrum.size()) {
    throw std::invalid_argument("mixed_reduce: one weight per eigenstate required");
  }
  return eigenstate_reductions(spectrum, std::move(sites), L, dim).mix(weights);
}

double von_neumann_entropy(const ReducedDensityMatrix& rho) {
  const Complex trace = rho.matrix.trace();
  if (std::abs(trace - Complex{1.0, 0.0}) > 1e-8) {
    throw std::domain_error("von_neumann_entropy: trace deviates from 1 by " +
                            std::to_string(std::abs(trace - 1.0)));
  }
  const Eigen::MatrixXcd hermitian = 0.5 * (rho.matrix + rho.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double lambda : solver.eigenvalues()) {
    if (lambda < -1e-8) {
      throw std::domain_error("von_neumann_entropy: eigenvalue " + std::to_string(lambda) +
                              " is not a density-matrix eigenvalue");
    }
    if (lambda < 1e-14) continue;
    s -= lambda * std::log2(lambda);
  }
  return s;
}

double site_entropy(const Eigen::VectorXcd& state, int site, int L, int dim) {
  return von_neumann_entropy(reduce(state, {site}, L, dim));
}

}  // namespace ethlab
