#pragma once

#include <vector>

#include "ethlab/lattice.hpp"

namespace ethlab {

class Spectrum;

/// Density matrix of a subsystem; `sites` ascending, matrix is d^k x d^k in
/// the same most-significant-first digit order as the full basis.
struct ReducedDensityMatrix {
  std::vector<int> sites;
  int dim = 2;
  Eigen::MatrixXcd matrix;
};

/// Partial trace of |psi><psi| over the complement of `sites`, computed as
/// M M^dagger on the reshaped amplitudes.
ReducedDensityMatrix reduce(const Eigen::VectorXcd& state, std::vector<int> sites, int L, int dim);

/// sum_k w_k rho_sites(|E_k>) for weights over the global eigenstate order.
ReducedDensityMatrix mixed_reduce(const Eigen::VectorXd& weights, const Spectrum& spectrum,
                                  std::vector<int> sites, int L, int dim);

/// Reduced matrices of every eigenstate on `sites`, in the global energy order.
/// Lets repeated thermal mixtures over one spectrum skip the eigenvectors.
struct EigenstateReductions {
  std::vector<int> sites;
  int dim = 2;
  std::vector<Eigen::MatrixXcd> matrices;

  ReducedDensityMatrix mix(const Eigen::VectorXd& weights) const;
};

EigenstateReductions eigenstate_reductions(const Spectrum& spectrum, std::vector<int> sites, int L, int dim);

/// -sum lambda log2 lambda in bits. Eigenvalues in [-1e-8, 0) are clamped to
/// zero; lower ones, or |tr - 1| > 1e-8, throw std::domain_error.
double von_neumann_entropy(const ReducedDensityMatrix& rho);

/// Shorthand for von_neumann_entropy(reduce(state, {site}, L, dim)).
double site_entropy(const Eigen::VectorXcd& state, int site, int L, int dim);

}  // namespace ethlab
