#include "ethlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace ethlab {

namespace local {

LocalOperator identity(int dim) {
  return {dim, Eigen::MatrixXcd::Identity(dim, dim), "id"};
}

LocalOperator sigma_x() {
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return {2, m, "sigma_x"};
}

LocalOperator sigma_y() {
  const Complex i{0.0, 1.0};
  Eigen::MatrixXcd m(2, 2);
  m << 0, -i, i, 0;
  return {2, m, "sigma_y"};
}

LocalOperator sigma_z() {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, -1;
  return {2, m, "sigma_z"};
}

LocalOperator gell_mann(int k) {
  const Complex i{0.0, 1.0};
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  switch (k) {
    case 1: m(0, 1) = 1; m(1, 0) = 1; break;
    case 2: m(0, 1) = -i; m(1, 0) = i; break;
    case 3: m(0, 0) = 1; m(1, 1) = -1; break;
    case 4: m(0, 2) = 1; m(2, 0) = 1; break;
    case 5: m(0, 2) = -i; m(2, 0) = i; break;
    case 6: m(1, 2) = 1; m(2, 1) = 1; break;
    case 7: m(1, 2) = -i; m(2, 1) = i; break;
    case 8: {
      const double s = 1.0 / std::sqrt(3.0);
      m(0, 0) = s; m(1, 1) = s; m(2, 2) = -2.0 * s;
      break;
    }
    default:
      throw std::invalid_argument("Gell-Mann index must be in 1..8, got " + std::to_string(k));
  }
  return {3, m, "lambda_" + std::to_string(k)};
}

LocalOperator charge() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(2, 2) = 1;
  return {3, m, "q"};
}

}  // namespace local

Index lattice_dim(int L, int dim) {
  if (L < 1 || dim < 1) {
    throw std::invalid_argument("lattice_dim: L and site dimension must be positive");
  }
  Index n = 1;
  for (int r = 0; r < L; ++r) {
    if (n > std::numeric_limits<int>::max() / dim) {
      throw std::invalid_argument("lattice_dim: Hilbert space dimension overflows");
    }
    n *= dim;
  }
  return n;
}

Index HamiltonianSpec::full_dim() const { return lattice_dim(L, site_dim()); }

void HamiltonianSpec::validate() const {
  if (L < 2) {
    throw std::invalid_argument("HamiltonianSpec: L must be >= 2, got " + std::to_string(L));
  }
  if (!(spread_width >= 0.0)) {
    throw std::invalid_argument("HamiltonianSpec: spread_width must be >= 0");
  }
  for (double v : {J, hx, hz, h1, h2, h3, a, spread_mean, spread_width}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("HamiltonianSpec: coefficients must be finite");
    }
  }
  (void)full_dim();
}

namespace {

bool all_real(const SparseMatrix& m) {
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

SparseMatrix to_sparse(const Eigen::MatrixXcd& m) {
  return m.sparseView(0.0, 0.0);
}

}  // namespace

OperatorMatrix::OperatorMatrix(SparseMatrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols()) {
    throw std::invalid_argument("OperatorMatrix: matrix must be square");
  }
  data_.prune(Complex{0.0, 0.0});
  data_.makeCompressed();
  is_real_ = all_real(data_);
}

RealSparseMatrix OperatorMatrix::real_sparse() const {
  return data_.real();
}

double max_abs(const SparseMatrix& m) {
  double best = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

double OperatorMatrix::hermiticity_error() const {
  SparseMatrix diff = data_ - SparseMatrix(data_.adjoint());
  return max_abs(diff);
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
  if (dim() == 0) {
    *this = other;
    return *this;
  }
  if (other.dim() != dim()) {
    throw std::invalid_argument("OperatorMatrix: dimension mismatch in sum");
  }
  *this = OperatorMatrix(SparseMatrix(data_ + other.data_));
  return *this;
}

OperatorMatrix operator*(Complex scale, const OperatorMatrix& op) {
  return OperatorMatrix(SparseMatrix(scale * op.data_));
}

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  if (lhs.dim() != rhs.dim()) {
    throw std::invalid_argument("OperatorMatrix: dimension mismatch in product");
  }
  return OperatorMatrix(SparseMatrix(lhs.data_ * rhs.data_));
}

OperatorMatrix identity_operator(Index dim) { return OperatorMatrix(sparse_identity(dim)); }

double commutator_norm(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("commutator_norm: dimension mismatch");
  }
  SparseMatrix c = a.sparse() * b.sparse() - b.sparse() * a.sparse();
  return max_abs(c);
}

OperatorMatrix embed_at_site(const LocalOperator& op, int site, int L, int dim) {
  const SiteFactor factor{site, op};
  return embed_product(std::span<const SiteFactor>(&factor, 1), L, dim);
}

OperatorMatrix embed_product(std::span<const SiteFactor> factors, int L, int dim) {
  const Index full = lattice_dim(L, dim);
  std::vector<const LocalOperator*> at_site(L, nullptr);
  for (const auto& f : factors) {
    if (f.op.dim != dim || f.op.entries.rows() != dim || f.op.entries.cols() != dim) {
      throw std::invalid_argument("embed: operator '" + f.op.name + "' has dimension " +
                                  std::to_string(f.op.dim) + ", lattice site dimension is " +
                                  std::to_string(dim));
    }
    if (f.site < 1 || f.site > L) {
      throw std::out_of_range("embed: site " + std::to_string(f.site) + " outside 1.." +
                              std::to_string(L));
    }
    if (at_site[f.site - 1] != nullptr) {
      throw std::invalid_argument("embed: two factors on site " + std::to_string(f.site));
    }
    at_site[f.site - 1] = &f.op;
  }

  // Runs of identity factors collapse to one identity block.
  SparseMatrix result = sparse_identity(1);
  Index pending_identity = 1;
  for (int r = 0; r < L; ++r) {
    if (at_site[r] == nullptr) {
      pending_identity *= dim;
      continue;
    }
    if (pending_identity > 1) {
      result = Eigen::kroneckerProduct(result, sparse_identity(pending_identity)).eval();
      pending_identity = 1;
    }
    result = Eigen::kroneckerProduct(result, to_sparse(at_site[r]->entries)).eval();
  }
  if (pending_identity > 1) {
    result = Eigen::kroneckerProduct(result, sparse_identity(pending_identity)).eval();
  }
  if (result.rows() != full) {
    throw std::logic_error("embed: assembled dimension mismatch");
  }
  return OperatorMatrix(std::move(result));
}

OperatorMatrix assemble(const TermList& terms, int L, int dim) {
  const Index full = lattice_dim(L, dim);
  SparseMatrix total(full, full);
  for (const auto& term : terms) {
    if (term.coefficient == Complex{0.0, 0.0}) continue;
    total += term.coefficient * embed_product(term.factors, L, dim).sparse();
  }
  return OperatorMatrix(std::move(total));
}

Complex product_expectation(const TermList& terms, std::span<const Eigen::VectorXcd> site_states) {
  Complex total{0.0, 0.0};
  for (const auto& term : terms) {
    Complex value = term.coefficient;
    for (const auto& f : term.factors) {
      if (f.site < 1 || static_cast<std::size_t>(f.site) > site_states.size()) {
        throw std::out_of_range("product_expectation: site outside the state");
      }
      const auto& psi = site_states[f.site - 1];
      value *= psi.dot(f.op.entries * psi);
    }
    total += value;
  }
  return total;
}

ChargeSpreadCoefficients draw_charge_spread_coefficients(const HamiltonianSpec& spec) {
  ChargeSpreadCoefficients coeffs(spec.L - 1);
  std::mt19937_64 rng(spec.seed);
  if (spec.spread_width == 0.0) {
    for (auto& row : coeffs) row.fill(spec.spread_mean);
    return coeffs;
  }
  std::normal_distribution<double> normal(spec.spread_mean, spec.spread_width);
  for (auto& row : coeffs) {
    for (auto& c : row) c = normal(rng);
  }
  return coeffs;
}

std::array<std::array<std::pair<int, int>, 2>, 4> charge_spread_generators() {
  return {{
      {{{4, 4}, {5, 5}}},
      {{{4, 6}, {5, 7}}},
      {{{6, 4}, {7, 5}}},
      {{{6, 6}, {7, 7}}},
  }};
}

namespace {

LocalTerm single(double c, int site, LocalOperator op) {
  return {Complex{c, 0.0}, {SiteFactor{site, std::move(op)}}};
}

LocalTerm pair(double c, int site, LocalOperator left, LocalOperator right) {
  return {Complex{c, 0.0}, {SiteFactor{site, std::move(left)}, SiteFactor{site + 1, std::move(right)}}};
}

void scale_terms(TermList& terms, double s) {
  for (auto& t : terms) t.coefficient *= s;
}

}  // namespace

TermList qubit_hamiltonian_terms(const HamiltonianSpec& spec) {
  spec.validate();
  if (spec.kind != ChainKind::Qubit) {
    throw std::invalid_argument("qubit_hamiltonian_terms: spec is not a qubit chain");
  }
  TermList terms;
  for (int r = 1; r < spec.L; ++r) terms.push_back(pair(spec.J, r, local::sigma_z(), local::sigma_z()));
  for (int r = 1; r <= spec.L; ++r) terms.push_back(single(spec.hx, r, local::sigma_x()));
  for (int r = 1; r <= spec.L; ++r) terms.push_back(single(spec.hz, r, local::sigma_z()));
  if (spec.normalize_by_L) scale_terms(terms, 1.0 / spec.L);
  return terms;
}

TermList charge_spread_terms(int L, const ChargeSpreadCoefficients& coeffs) {
  if (L < 2 || coeffs.size() != static_cast<std::size_t>(L - 1)) {
    throw std::invalid_argument("charge_spread_terms: expected " + std::to_string(std::max(L - 1, 0)) +
                                " coefficient rows, got " + std::to_string(coeffs.size()));
  }
  const auto gens = charge_spread_generators();
  TermList terms;
  for (int r = 1; r < L; ++r) {
    for (int i = 0; i < 4; ++i) {
      const double c = coeffs[r - 1][i];
      for (const auto& [left, right] : gens[i]) {
        terms.push_back(pair(c, r, local::gell_mann(left), local::gell_mann(right)));
      }
    }
  }
  return terms;
}

TermList qutrit_hamiltonian_terms(const HamiltonianSpec& spec) {
  spec.validate();
  if (spec.kind != ChainKind::Qutrit) {
    throw std::invalid_argument("qutrit_hamiltonian_terms: spec is not a qutrit chain");
  }
  TermList terms;
  for (int r = 1; r < spec.L; ++r) terms.push_back(pair(spec.J, r, local::gell_mann(3), local::gell_mann(3)));
  for (int r = 1; r <= spec.L; ++r) terms.push_back(single(spec.h1, r, local::gell_mann(1)));
  for (int r = 1; r <= spec.L; ++r) terms.push_back(single(spec.h2, r, local::gell_mann(2)));
  for (int r = 1; r <= spec.L; ++r) terms.push_back(single(spec.h3, r, local::gell_mann(3)));
  if (spec.a != 0.0) {
    TermList spread = charge_spread_terms(spec.L, draw_charge_spread_coefficients(spec));
    scale_terms(spread, spec.a);
    terms.insert(terms.end(), spread.begin(), spread.end());
  }
  if (spec.normalize_by_L) scale_terms(terms, 1.0 / spec.L);
  return terms;
}

TermList hamiltonian_terms(const HamiltonianSpec& spec) {
  return spec.kind == ChainKind::Qubit ? qubit_hamiltonian_terms(spec) : qutrit_hamiltonian_terms(spec);
}

OperatorMatrix build_qubit_hamiltonian(const HamiltonianSpec& spec) {
  return assemble(qubit_hamiltonian_terms(spec), spec.L, 2);
}

OperatorMatrix build_charge_spread(int L, const ChargeSpreadCoefficients& coeffs) {
  return assemble(charge_spread_terms(L, coeffs), L, 3);
}

OperatorMatrix build_qutrit_hamiltonian(const HamiltonianSpec& spec) {
  return assemble(qutrit_hamiltonian_terms(spec), spec.L, 3);
}

OperatorMatrix build_hamiltonian(const HamiltonianSpec& spec) {
  return assemble(hamiltonian_terms(spec), spec.L, spec.site_dim());
}

ChargeOperators build_charge_operators(int L) {
  ChargeOperators ops;
  const Index full = lattice_dim(L, 3);
  SparseMatrix total(full, full);
  ops.local.reserve(L);
  for (int r = 1; r <= L; ++r) {
    ops.local.push_back(embed_at_site(local::charge(), r, L, 3));
    total += ops.local.back().sparse();
  }
  ops.total = OperatorMatrix(std::move(total));
  return ops;
}

void write_coordinate_text(std::ostream& out, const OperatorMatrix& op) {
  using RowMajor = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
  const RowMajor m = op.sparse();
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  for (Index row = 0; row < m.outerSize(); ++row) {
    for (RowMajor::InnerIterator it(m, row); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace ethlab
