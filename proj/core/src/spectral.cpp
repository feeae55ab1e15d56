#include "ethlab/spectral.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "ethlab/parallel.hpp"

namespace ethlab {

Eigen::VectorXcd SpectralData::full_vector(Index k) const {
  return basis.cast<Complex>() * vectors.col(k);
}

SpectralData diagonalize(const SectorBlock& block, const DiagonalizeOptions& options) {
  const Index n = block.dim();
  if (n > options.dense_limit) {
    throw DimensionLimitError("diagonalize: sector dimension " + std::to_string(n) +
                              " exceeds the dense limit " + std::to_string(options.dense_limit));
  }
  SpectralData out;
  out.sector = block.label;
  out.basis = block.basis;
  if (n == 0) {
    out.energies.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  if (block.block.is_real()) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(block.block.real_sparse());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("diagonalize: real symmetric eigensolver did not converge (block " +
                               (block.label ? block.label->to_string() : std::string("full")) + ")");
    }
    out.energies = solver.eigenvalues();
    out.vectors = solver.eigenvectors().cast<Complex>();
  } else {
    const Eigen::MatrixXcd dense = block.block.dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("diagonalize: Hermitian eigensolver did not converge (block " +
                               (block.label ? block.label->to_string() : std::string("full")) + ")");
    }
    out.energies = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
  }
  return out;
}

Spectrum::Spectrum(std::vector<SpectralData> blocks) : blocks_(std::move(blocks)) {
  Index total = 0;
  for (const auto& b : blocks_) {
    if (full_dim_ == 0) full_dim_ = b.full_dim();
    if (b.full_dim() != full_dim_) {
      throw std::invalid_argument("Spectrum: blocks embed into different spaces");
    }
    total += b.size();
  }
  order_.reserve(total);
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    for (Index k = 0; k < blocks_[b].size(); ++k) order_.push_back({b, k});
  }
  std::stable_sort(order_.begin(), order_.end(), [&](const Location& x, const Location& y) {
    return blocks_[x.block].energies(x.local) < blocks_[y.block].energies(y.local);
  });
  energies_.resize(total);
  block_members_.assign(blocks_.size(), {});
  for (Index k = 0; k < total; ++k) {
    const auto& loc = order_[k];
    energies_(k) = blocks_[loc.block].energies(loc.local);
    block_members_[loc.block].push_back(k);
  }
}

std::optional<int> Spectrum::charge_of(Index k) const {
  const auto& label = blocks_[order_[k].block].sector;
  if (!label) return std::nullopt;
  return label->charge;
}

bool Spectrum::has_charge_labels() const {
  return !blocks_.empty() && std::all_of(blocks_.begin(), blocks_.end(), [](const SpectralData& b) {
    return b.sector && b.sector->charge.has_value();
  });
}

double Spectrum::spectral_range() const {
  if (size() == 0) return 0.0;
  return energies_(size() - 1) - energies_(0);
}

Eigen::VectorXcd Spectrum::eigenvector(Index k) const {
  const auto& loc = order_[k];
  return blocks_[loc.block].full_vector(loc.local);
}

Eigen::VectorXcd Spectrum::to_energy_basis(const Eigen::VectorXcd& psi, double* captured_norm) const {
  if (psi.size() != full_dim_) {
    throw std::invalid_argument("Spectrum: state dimension " + std::to_string(psi.size()) +
                                " does not match " + std::to_string(full_dim_));
  }
  Eigen::VectorXcd c(size());
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    const auto& block = blocks_[b];
    const Eigen::VectorXcd sector_amplitudes = block.basis.transpose().cast<Complex>() * psi;
    const Eigen::VectorXcd local = block.vectors.adjoint() * sector_amplitudes;
    const auto& members = block_members_[b];
    for (Index j = 0; j < static_cast<Index>(members.size()); ++j) {
      c(members[j]) = local(order_[members[j]].local);
    }
  }
  if (captured_norm != nullptr) *captured_norm = c.squaredNorm();
  return c;
}

Eigen::VectorXcd Spectrum::from_energy_basis(const Eigen::VectorXcd& coefficients) const {
  return from_energy_basis(Eigen::MatrixXcd(coefficients)).col(0);
}

Eigen::MatrixXcd Spectrum::from_energy_basis(const Eigen::MatrixXcd& coefficients) const {
  if (coefficients.rows() != size()) {
    throw std::invalid_argument("Spectrum: coefficient rows do not match the number of eigenstates");
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(full_dim_, coefficients.cols());
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    const auto& block = blocks_[b];
    if (block.size() == 0) continue;
    Eigen::MatrixXcd local(block.size(), coefficients.cols());
    for (Index k : block_members_[b]) local.row(order_[k].local) = coefficients.row(k);
    const Eigen::MatrixXcd sector_amplitudes = block.vectors * local;
    out += block.basis.cast<Complex>() * sector_amplitudes;
  }
  return out;
}

Eigen::VectorXd Spectrum::diagonal_elements(const OperatorMatrix& op) const {
  if (op.dim() != full_dim_) {
    throw std::invalid_argument("Spectrum: operator dimension does not match the spectrum");
  }
  Eigen::VectorXd out(size());
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    const auto& block = blocks_[b];
    if (block.size() == 0) continue;
    const SparseMatrix basis = block.basis.cast<Complex>();
    const Eigen::MatrixXcd full_vectors = basis * block.vectors;
    const Eigen::MatrixXcd applied = op.sparse() * full_vectors;
    for (Index k : block_members_[b]) {
      const Index j = order_[k].local;
      out(k) = full_vectors.col(j).dot(applied.col(j)).real();
    }
  }
  return out;
}

Eigen::MatrixXcd Spectrum::eigenvector_matrix() const {
  Eigen::MatrixXcd v(full_dim_, size());
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    const auto& block = blocks_[b];
    if (block.size() == 0) continue;
    const Eigen::MatrixXcd full_vectors = block.basis.cast<Complex>() * block.vectors;
    for (Index k : block_members_[b]) v.col(k) = full_vectors.col(order_[k].local);
  }
  return v;
}

Spectrum diagonalize_blocks(std::span<const SectorBlock> blocks, const DiagonalizeOptions& options,
                            unsigned threads) {
  std::vector<SpectralData> data(blocks.size());
  // Largest blocks first so a parallel run is not tail-bound.
  std::vector<std::size_t> schedule(blocks.size());
  std::iota(schedule.begin(), schedule.end(), std::size_t{0});
  std::stable_sort(schedule.begin(), schedule.end(),
                   [&](std::size_t a, std::size_t b) { return blocks[a].dim() > blocks[b].dim(); });
  parallel_for(blocks.size(), threads, [&](std::size_t i) {
    data[schedule[i]] = diagonalize(blocks[schedule[i]], options);
  });
  return Spectrum(std::move(data));
}

Spectrum solve(const OperatorMatrix& H, int L, int dim, std::span<const Symmetry> symmetries,
               const DecomposeOptions& decompose_options, const DiagonalizeOptions& diagonalize_options,
               unsigned threads) {
  const auto blocks = decompose(H, L, dim, symmetries, decompose_options);
  return diagonalize_blocks(blocks, diagonalize_options, threads);
}

}  // namespace ethlab
