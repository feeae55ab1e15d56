#pragma once

#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ethlab/lattice.hpp"

namespace ethlab {

class Spectrum;

/// O_ij = <E_i|O|E_j> in the global energy order.
struct EthMatrixData {
  Eigen::MatrixXcd elements;
  Eigen::VectorXd energies;
  double entropy_scale = 0.0;  // S(E) reference, ln of the space dimension by default
};

EthMatrixData energy_basis_elements(const Spectrum& spectrum, const OperatorMatrix& op);

struct ScatterPoint {
  double energy;
  double value;
};
/// (E_k, <E_k|O|E_k>) for every eigenstate.
std::vector<ScatterPoint> eigenstate_scatter(const Spectrum& spectrum, const OperatorMatrix& op);
/// (E_k, single-site entropy of |E_k> in bits).
std::vector<ScatterPoint> eigenstate_entropy_scatter(const Spectrum& spectrum, int site, int L, int dim);

struct DiagonalRatio {
  double value = 0.0;
  bool infinite = false;  // off-diagonal mean is exactly zero
};

/// mean |O_ii| / mean_{i != j} |O_ij|.
DiagonalRatio diag_offdiag_ratio(const EthMatrixData& data);
/// Same statistic without materializing O_ij for more than one column at a time.
DiagonalRatio diag_offdiag_ratio(const Spectrum& spectrum, const OperatorMatrix& op);

/// (1/N) sum_i |O_{i, N-1-i}|; N must be a power of two.
double counter_diagonal_average(const EthMatrixData& data);
double counter_diagonal_average(const Spectrum& spectrum, const OperatorMatrix& op);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square deviation from the line
};
/// Least-squares line through (x, y), or through (x, ln y) with log_scale.
ScalingFit scaling_fit(std::span<const std::pair<double, double>> points, bool log_scale);

/// Haar-random 2x2 unitary (QR of a complex Ginibre matrix, phases fixed).
Eigen::Matrix2cd haar_unitary_2(std::mt19937_64& rng);

/// U^dagger diag(-1, +1) U on a uniformly drawn site of an L-site qubit chain.
struct RandomSiteOperator {
  int site = 1;
  LocalOperator op;
};
RandomSiteOperator random_fixed_spectrum_operator(int L, std::mt19937_64& rng);

}  // namespace ethlab
