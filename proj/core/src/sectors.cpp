#include "ethlab/sectors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ethlab {

std::string SectorLabel::to_string() const {
  std::ostringstream out;
  bool first = true;
  if (charge) {
    out << "Q=" << *charge;
    first = false;
  }
  if (parity) {
    if (!first) out << ',';
    out << "P=" << (*parity > 0 ? "+1" : "-1");
    first = false;
  }
  if (first) out << "full";
  return out.str();
}

std::int64_t reverse_sites(std::int64_t index, int L, int dim) {
  std::int64_t reversed = 0;
  for (int r = 0; r < L; ++r) {
    reversed = reversed * dim + index % dim;
    index /= dim;
  }
  return reversed;
}

int count_charge(std::int64_t index, int L) {
  int n = 0;
  for (int r = 0; r < L; ++r) {
    if (index % 3 == 2) ++n;
    index /= 3;
  }
  return n;
}

std::int64_t charge_sector_dimension(int L, int n) {
  if (n < 0 || n > L) return 0;
  std::int64_t binom = 1;
  for (int k = 1; k <= n; ++k) binom = binom * (L - n + k) / k;
  return (std::int64_t{1} << (L - n)) * binom;
}

OperatorMatrix build_parity(int L, int dim) {
  const Index full = lattice_dim(L, dim);
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(full);
  for (Index b = 0; b < full; ++b) {
    triplets.emplace_back(reverse_sites(b, L, dim), b, 1.0);
  }
  SparseMatrix p(full, full);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return OperatorMatrix(std::move(p));
}

namespace {

struct Column {
  std::int64_t a;
  std::int64_t b;  // == a for single-entry columns
  double sign;     // coefficient on b when b != a
};

RealSparseMatrix columns_to_basis(const std::vector<Column>& cols, Index full) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * cols.size());
  const double s = 1.0 / std::sqrt(2.0);
  for (Index c = 0; c < static_cast<Index>(cols.size()); ++c) {
    const auto& col = cols[c];
    if (col.a == col.b) {
      triplets.emplace_back(col.a, c, 1.0);
    } else {
      triplets.emplace_back(col.a, c, s);
      triplets.emplace_back(col.b, c, s * col.sign);
    }
  }
  RealSparseMatrix basis(full, static_cast<Index>(cols.size()));
  basis.setFromTriplets(triplets.begin(), triplets.end());
  basis.makeCompressed();
  return basis;
}

// Largest commutator entry among rows whose charge sector is selected.
double restricted_commutator_norm(const OperatorMatrix& H, const OperatorMatrix& S, int L,
                                  const std::vector<bool>* charge_selected) {
  const SparseMatrix c = H.sparse() * S.sparse() - S.sparse() * H.sparse();
  double best = 0.0;
  for (Index k = 0; k < c.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(c, k); it; ++it) {
      if (charge_selected != nullptr && !(*charge_selected)[count_charge(it.row(), L)]) continue;
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

}  // namespace

OperatorMatrix embed_block(const SectorBlock& block) {
  const SparseMatrix basis = block.basis.cast<Complex>();
  return OperatorMatrix(SparseMatrix(basis * block.block.sparse() * SparseMatrix(basis.transpose())));
}

std::vector<SectorBlock> decompose(const OperatorMatrix& H, int L, int dim,
                                   std::span<const Symmetry> symmetries,
                                   const DecomposeOptions& options) {
  const Index full = lattice_dim(L, dim);
  if (H.dim() != full) {
    throw std::invalid_argument("decompose: operator dimension " + std::to_string(H.dim()) +
                                " does not match lattice dimension " + std::to_string(full));
  }
  const bool use_charge = std::find(symmetries.begin(), symmetries.end(), Symmetry::Charge) != symmetries.end();
  const bool use_parity = std::find(symmetries.begin(), symmetries.end(), Symmetry::Parity) != symmetries.end();
  if (use_charge && dim != 3) {
    throw std::invalid_argument("decompose: charge sectors are defined for qutrit chains only");
  }
  if (options.charges && !use_charge) {
    throw std::invalid_argument("decompose: charge filter given without the charge symmetry");
  }
  if (options.parity && !use_parity) {
    throw std::invalid_argument("decompose: parity filter given without the parity symmetry");
  }
  if (options.parity && *options.parity != 1 && *options.parity != -1) {
    throw std::invalid_argument("decompose: parity filter must be +1 or -1");
  }

  std::vector<int> charges;
  if (use_charge) {
    if (options.charges) {
      charges = *options.charges;
      for (int n : charges) {
        if (n < 0 || n > L) {
          throw std::invalid_argument("decompose: charge " + std::to_string(n) + " outside 0.." +
                                      std::to_string(L));
        }
      }
      std::sort(charges.begin(), charges.end());
      charges.erase(std::unique(charges.begin(), charges.end()), charges.end());
    } else {
      for (int n = 0; n <= L; ++n) charges.push_back(n);
    }
  }
  std::vector<bool> selected(L + 1, !use_charge);
  for (int n : charges) selected[n] = true;

  if (use_charge) {
    const auto total = build_charge_operators(L).total;
    const double norm = commutator_norm(H, total);
    if (norm > options.commutation_tolerance) {
      throw SymmetryError("decompose: H does not commute with the total charge (||[H,Q]||_max = " +
                              std::to_string(norm) + ")",
                          norm);
    }
  }
  if (use_parity) {
    const auto parity = build_parity(L, dim);
    const double norm = restricted_commutator_norm(H, parity, L, use_charge ? &selected : nullptr);
    if (norm > options.commutation_tolerance) {
      throw SymmetryError("decompose: H does not commute with parity in the requested sectors "
                          "(||[H,P]||_max = " + std::to_string(norm) + ")",
                          norm);
    }
  }

  if (!use_charge && !use_parity) {
    SectorBlock block;
    block.basis.resize(full, full);
    block.basis.setIdentity();
    block.block = H;
    return {std::move(block)};
  }

  // Group columns by (charge, parity slot) keeping basis-index order inside a
  // group; slot 0 holds parity +1, slot 1 parity -1.
  std::map<std::pair<int, int>, std::vector<Column>> groups;
  for (Index b = 0; b < full; ++b) {
    const int n = use_charge ? count_charge(b, L) : 0;
    if (!selected[n]) continue;
    if (!use_parity) {
      groups[{n, 0}].push_back({b, b, 1.0});
      continue;
    }
    const std::int64_t rb = reverse_sites(b, L, dim);
    if (rb == b) {
      groups[{n, 0}].push_back({b, b, 1.0});
    } else if (b < rb) {
      groups[{n, 0}].push_back({b, rb, 1.0});
      groups[{n, 1}].push_back({b, rb, -1.0});
    }
  }

  std::vector<SectorBlock> blocks;
  const SparseMatrix& h = H.sparse();
  for (auto& [key, cols] : groups) {
    const auto [n, slot] = key;
    const int parity = slot == 0 ? +1 : -1;
    if (use_parity && options.parity && parity != *options.parity) continue;
    SectorLabel label;
    if (use_charge) label.charge = n;
    if (use_parity) label.parity = parity;
    SectorBlock block;
    block.label = label;
    block.basis = columns_to_basis(cols, full);
    const SparseMatrix basis = block.basis.cast<Complex>();
    block.block = OperatorMatrix(SparseMatrix(SparseMatrix(basis.transpose()) * h * basis));
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace ethlab
