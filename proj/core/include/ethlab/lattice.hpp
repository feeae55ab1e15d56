#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ethlab {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using RealSparseMatrix = Eigen::SparseMatrix<double>;

/// A d x d operator acting on a single lattice site.
struct LocalOperator {
  int dim = 0;
  Eigen::MatrixXcd entries;
  std::string name;
};

namespace local {

LocalOperator identity(int dim);
LocalOperator sigma_x();
LocalOperator sigma_y();
LocalOperator sigma_z();
/// Gell-Mann generator lambda_k, k = 1..8, in the |0>,|1>,|2> ordering.
LocalOperator gell_mann(int k);
/// Local charge q = |2><2|.
LocalOperator charge();

}  // namespace local

enum class ChainKind { Qubit, Qutrit };

/// Declarative description of a qubit or qutrit chain.
///
/// Qubit chains read J, hx, hz. Qutrit chains read J, h1, h2, h3 and the
/// charge-spreading strength `a`, whose nearest-neighbour coefficients are
/// drawn from Normal(spread_mean, spread_width) with `seed`.
struct HamiltonianSpec {
  ChainKind kind = ChainKind::Qubit;
  int L = 2;
  double J = 1.0;
  double hx = 1.05;
  double hz = 0.5;
  double h1 = 1.05;
  double h2 = 0.0;
  double h3 = 0.5;
  double a = 1.0;
  double spread_mean = 1.0;
  double spread_width = 0.1;
  std::uint64_t seed = 0;
  bool normalize_by_L = true;

  int site_dim() const { return kind == ChainKind::Qubit ? 2 : 3; }
  Index full_dim() const;
  /// Throws std::invalid_argument on L < 2 or negative spread width.
  void validate() const;
};

/// Hermitian operator over the full product basis, stored as sparse triplets.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(SparseMatrix data);

  Index dim() const { return data_.rows(); }
  bool is_real() const { return is_real_; }
  const SparseMatrix& sparse() const { return data_; }
  RealSparseMatrix real_sparse() const;
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(data_); }

  /// Largest |A_ij - conj(A_ji)|.
  double hermiticity_error() const;

  OperatorMatrix& operator+=(const OperatorMatrix& other);
  friend OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend OperatorMatrix operator*(Complex scale, const OperatorMatrix& op);
  /// Operator product (composition), not an elementwise product.
  friend OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);

 private:
  SparseMatrix data_;
  bool is_real_ = true;
};

OperatorMatrix identity_operator(Index dim);

/// Largest entry magnitude of a sparse matrix (0 for an empty matrix).
double max_abs(const SparseMatrix& m);
/// ||A B - B A||_max.
double commutator_norm(const OperatorMatrix& a, const OperatorMatrix& b);

/// d^L with overflow protection.
Index lattice_dim(int L, int dim);

/// I (x) ... (x) op (x) ... (x) I with op at `site` (1-based). Site 1 is the
/// most significant digit of the basis index.
OperatorMatrix embed_at_site(const LocalOperator& op, int site, int L, int dim);

struct SiteFactor {
  int site = 1;
  LocalOperator op;
};

/// Product of local operators on distinct sites.
OperatorMatrix embed_product(std::span<const SiteFactor> factors, int L, int dim);

/// coefficient * prod(factors). A sum of these is a lattice operator whose
/// expectation in a product state factorises site by site.
struct LocalTerm {
  Complex coefficient{1.0, 0.0};
  std::vector<SiteFactor> factors;
};
using TermList = std::vector<LocalTerm>;

OperatorMatrix assemble(const TermList& terms, int L, int dim);

/// Expectation of a term list in the product state prod_r |site_states[r-1]>.
Complex product_expectation(const TermList& terms,
                            std::span<const Eigen::VectorXcd> site_states);

/// (L-1) rows of the four nearest-neighbour charge-spreading weights.
using ChargeSpreadCoefficients = std::vector<std::array<double, 4>>;

/// Draws c_i^(r) row-major (r outer, i inner) from one seeded normal stream.
ChargeSpreadCoefficients draw_charge_spread_coefficients(const HamiltonianSpec& spec);

/// The four time-reversal-even two-site operators that move charge between
/// neighbours, as (left, right) Gell-Mann pairs: dq_i = A (x) A' + B (x) B'.
std::array<std::array<std::pair<int, int>, 2>, 4> charge_spread_generators();

TermList qubit_hamiltonian_terms(const HamiltonianSpec& spec);
TermList charge_spread_terms(int L, const ChargeSpreadCoefficients& coeffs);
TermList qutrit_hamiltonian_terms(const HamiltonianSpec& spec);
TermList hamiltonian_terms(const HamiltonianSpec& spec);

OperatorMatrix build_qubit_hamiltonian(const HamiltonianSpec& spec);
OperatorMatrix build_charge_spread(int L, const ChargeSpreadCoefficients& coeffs);
OperatorMatrix build_qutrit_hamiltonian(const HamiltonianSpec& spec);
OperatorMatrix build_hamiltonian(const HamiltonianSpec& spec);

struct ChargeOperators {
  std::vector<OperatorMatrix> local;
  OperatorMatrix total;
};
ChargeOperators build_charge_operators(int L);

/// Coordinate-format dump: one "row col re im" line per stored entry,
/// row-major order, 17 significant digits.
void write_coordinate_text(std::ostream& out, const OperatorMatrix& op);

}  // namespace ethlab
