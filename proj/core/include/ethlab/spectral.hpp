#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ethlab/lattice.hpp"
#include "ethlab/sectors.hpp"

namespace ethlab {

/// Eigenpairs of one sector block.
struct SpectralData {
  std::optional<SectorLabel> sector;
  Eigen::VectorXd energies;       // ascending
  Eigen::MatrixXcd vectors;       // columns in the sector basis
  RealSparseMatrix basis;         // full_dim x sector_dim embedding

  Index size() const { return energies.size(); }
  Index full_dim() const { return basis.rows(); }
  /// Eigenvector k expressed in the full product basis.
  Eigen::VectorXcd full_vector(Index k) const;
};

class DimensionLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiagonalizeOptions {
  Index dense_limit = 20000;
};

/// Full dense eigendecomposition; the real-symmetric solver is used whenever
/// the block has no imaginary entries.
SpectralData diagonalize(const SectorBlock& block, const DiagonalizeOptions& options = {});

/// Union of sector spectra with a global ascending energy order.
///
/// Global index k refers to the k-th lowest eigenvalue over all blocks (ties
/// broken by block, then by in-block index). Coefficient vectors in the
/// energy basis use this order.
class Spectrum {
 public:
  struct Location {
    int block;
    Index local;
  };

  Spectrum() = default;
  explicit Spectrum(std::vector<SpectralData> blocks);

  Index size() const { return energies_.size(); }
  Index full_dim() const { return full_dim_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const std::vector<SpectralData>& blocks() const { return blocks_; }
  const Location& locate(Index k) const { return order_[k]; }
  /// Global indices of block b, ascending in energy.
  const std::vector<Index>& block_indices(int b) const { return block_members_[b]; }
  /// Sector charge of eigenstate k, if the blocks carry charge labels.
  std::optional<int> charge_of(Index k) const;
  bool has_charge_labels() const;
  double spectral_range() const;

  Eigen::VectorXcd eigenvector(Index k) const;
  /// c_k = <E_k|psi>. `captured_norm` receives ||c||^2 when non-null.
  Eigen::VectorXcd to_energy_basis(const Eigen::VectorXcd& psi, double* captured_norm = nullptr) const;
  Eigen::VectorXcd from_energy_basis(const Eigen::VectorXcd& coefficients) const;
  /// Columns of `coefficients` mapped back to the product basis.
  Eigen::MatrixXcd from_energy_basis(const Eigen::MatrixXcd& coefficients) const;

  /// <E_k|O|E_k> for every eigenstate.
  Eigen::VectorXd diagonal_elements(const OperatorMatrix& op) const;
  /// Dense V (full_dim x size) with eigenvectors in global order.
  Eigen::MatrixXcd eigenvector_matrix() const;

 private:
  std::vector<SpectralData> blocks_;
  Eigen::VectorXd energies_;
  std::vector<Location> order_;
  std::vector<std::vector<Index>> block_members_;
  Index full_dim_ = 0;
};

/// Diagonalizes each block (in parallel when threads > 1).
Spectrum diagonalize_blocks(std::span<const SectorBlock> blocks, const DiagonalizeOptions& options = {},
                            unsigned threads = 1);

/// decompose + diagonalize_blocks.
Spectrum solve(const OperatorMatrix& H, int L, int dim, std::span<const Symmetry> symmetries,
               const DecomposeOptions& decompose_options = {},
               const DiagonalizeOptions& diagonalize_options = {}, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Level statistics

struct UnfoldOptions {
  int degree = 10;
  double trim = 0.025;  // fraction of levels dropped at each edge
};

class UnfoldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UnfoldResult {
  std::vector<double> spacings;  // unit mean
  Index clamped = 0;             // negative mapped spacings set to 0
  Index levels_used = 0;
  double raw_mean = 0.0;         // mean mapped spacing before the final rescale
};

/// Fits the counting staircase N(E) on the trimmed spectrum with a Chebyshev
/// polynomial of the given degree and returns s_i = N(E_i+1) - N(E_i).
/// Throws UnfoldError on fewer than 50 trimmed levels or a rank-deficient fit.
UnfoldResult unfold(std::span<const double> eigenvalues, const UnfoldOptions& options = {});

struct HistogramOptions {
  int bins = 40;
  double s_max = 4.0;
};

struct SpacingDistribution {
  std::vector<double> spacings;
  std::vector<double> edges;    // bins + 1
  std::vector<double> density;  // normalised over [0, s_max]
  double mean_spacing = 0.0;
  double trimmed_fraction = 0.0;
  /// Fraction of raw gaps below 1e-10 x spectral range.
  double degenerate_fraction = 0.0;
  Index level_count = 0;
  Index clamped = 0;
};

SpacingDistribution spacing_distribution(std::span<const double> eigenvalues,
                                         const UnfoldOptions& unfold_options = {},
                                         const HistogramOptions& histogram_options = {});

/// Wigner surmise P_beta(s) = A s^beta exp(-B s^2), unit norm and unit mean.
/// beta must be 1, 2 or 4.
double surmise(int beta, double s);
double poisson(double s);

enum class SpacingClass { WignerDyson, Poisson, Intermediate, Degenerate };
const char* to_string(SpacingClass c);

struct SpacingClassification {
  SpacingClass kind = SpacingClass::Intermediate;
  double chi2_wigner = 0.0;
  double chi2_poisson = 0.0;
  bool low_confidence = false;
};

/// chi^2 = sum_b width * (h_b - p_b)^2 / (h_b + p_b), the symmetric form, so a
/// few wide spacings in the far tail cost little. Degenerate if more than 20% of raw gaps vanish;
/// Intermediate if the scores differ by less than 25% of the larger one.
SpacingClassification classify_spacing(const SpacingDistribution& dist);

}  // namespace ethlab
