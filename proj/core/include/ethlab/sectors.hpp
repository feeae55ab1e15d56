#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ethlab/lattice.hpp"

namespace ethlab {

/// Symmetry quantum numbers identifying a block: parity (+1/-1) and/or total
/// charge (number of sites in |2>).
struct SectorLabel {
  std::optional<int> parity;
  std::optional<int> charge;

  std::string to_string() const;
  friend bool operator==(const SectorLabel&, const SectorLabel&) = default;
};

/// Restriction of an operator to a symmetry sector.
///
/// `basis` is full_dim x block_dim with orthonormal real columns; the block is
/// basis^T H basis. An unset label means the whole space.
struct SectorBlock {
  std::optional<SectorLabel> label;
  RealSparseMatrix basis;
  OperatorMatrix block;

  Index dim() const { return basis.cols(); }
};

enum class Symmetry { Parity, Charge };

class SymmetryError : public std::runtime_error {
 public:
  SymmetryError(const std::string& what, double commutator_norm)
      : std::runtime_error(what), commutator_norm_(commutator_norm) {}
  double commutator_norm() const { return commutator_norm_; }

 private:
  double commutator_norm_;
};

/// Index of the basis state with site order reversed (site i -> L+1-i).
std::int64_t reverse_sites(std::int64_t index, int L, int dim);

/// Number of sites holding |2> in a qutrit basis index.
int count_charge(std::int64_t index, int L);

/// |Q_n| = 2^(L-n) * C(L, n).
std::int64_t charge_sector_dimension(int L, int n);

/// Permutation implementing site reversal; P^2 = I.
OperatorMatrix build_parity(int L, int dim);

struct DecomposeOptions {
  /// Restrict to these total-charge sectors (charge symmetry only).
  std::optional<std::vector<int>> charges;
  /// Restrict to this parity (parity symmetry only).
  std::optional<int> parity;
  double commutation_tolerance = 1e-10;
};

/// Splits H into blocks labelled by the joint eigenvalues of `symmetries`.
///
/// Charge sectors group basis states by trit count. Parity sectors pair each
/// basis state b with reverse(b): palindromes and (b + rb)/sqrt2 go to +1,
/// (b - rb)/sqrt2 to -1. Blocks are ordered by charge, then parity +1 before -1.
/// Throws SymmetryError if a requested symmetry fails to commute with H inside
/// the requested sectors.
std::vector<SectorBlock> decompose(const OperatorMatrix& H, int L, int dim,
                                   std::span<const Symmetry> symmetries,
                                   const DecomposeOptions& options = {});

/// The sector embedding P_sector H P_sector rebuilt from a block.
OperatorMatrix embed_block(const SectorBlock& block);

}  // namespace ethlab
