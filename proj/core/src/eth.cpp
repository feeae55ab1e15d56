#include "ethlab/eth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "ethlab/entanglement.hpp"
#include "ethlab/spectral.hpp"

namespace ethlab {

namespace {

// Off-diagonal mean below this fraction of the diagonal mean is roundoff.
constexpr double kZeroOffDiagonal = 1e-12;

void check_operator(const Spectrum& spectrum, const OperatorMatrix& op) {
  if (op.dim() != spectrum.full_dim()) {
    throw std::invalid_argument("operator dimension " + std::to_string(op.dim()) + " does not match the spectrum " +
                                std::to_string(spectrum.full_dim()));
  }
  if (spectrum.size() != spectrum.full_dim()) {
    throw std::invalid_argument("energy-basis elements need a spectrum covering the whole space");
  }
}

bool power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

EthMatrixData energy_basis_elements(const Spectrum& spectrum, const OperatorMatrix& op) {
  check_operator(spectrum, op);
  const Eigen::MatrixXcd v = spectrum.eigenvector_matrix();
  const Eigen::MatrixXcd applied = op.sparse() * v;
  EthMatrixData data;
  data.elements.noalias() = v.adjoint() * applied;
  data.energies = spectrum.energies();
  data.entropy_scale = std::log(static_cast<double>(spectrum.full_dim()));
  return data;
}

std::vector<ScatterPoint> eigenstate_scatter(const Spectrum& spectrum, const OperatorMatrix& op) {
  const Eigen::VectorXd diag = spectrum.diagonal_elements(op);
  std::vector<ScatterPoint> out(spectrum.size());
  for (Index k = 0; k < spectrum.size(); ++k) out[k] = {spectrum.energies()(k), diag(k)};
  return out;
}

std::vector<ScatterPoint> eigenstate_entropy_scatter(const Spectrum& spectrum, int site, int L, int dim) {
  const EigenstateReductions table = eigenstate_reductions(spectrum, {site}, L, dim);
  std::vector<ScatterPoint> out(spectrum.size());
  for (Index k = 0; k < spectrum.size(); ++k) {
    out[k] = {spectrum.energies()(k), von_neumann_entropy(ReducedDensityMatrix{table.sites, dim, table.matrices[k]})};
  }
  return out;
}

DiagonalRatio diag_offdiag_ratio(const EthMatrixData& data) {
  const Index n = data.elements.rows();
  if (n < 2 || data.elements.cols() != n) throw std::invalid_argument("diag_offdiag_ratio: need a square matrix, n >= 2");
  const Eigen::MatrixXd mag = data.elements.cwiseAbs();
  const double diag_sum = mag.diagonal().sum();
  const double off_sum = mag.sum() - diag_sum;
  const double diag_mean = diag_sum / static_cast<double>(n);
  const double off_mean = off_sum / static_cast<double>(n * (n - 1));
  if (off_mean <= kZeroOffDiagonal * diag_mean) return {std::numeric_limits<double>::infinity(), true};
  return {diag_mean / off_mean, false};
}

DiagonalRatio diag_offdiag_ratio(const Spectrum& spectrum, const OperatorMatrix& op) {
  check_operator(spectrum, op);
  const Index n = spectrum.size();
  if (n < 2) throw std::invalid_argument("diag_offdiag_ratio: need n >= 2");
  const Eigen::MatrixXcd v = spectrum.eigenvector_matrix();
  double diag_sum = 0.0;
  double off_sum = 0.0;
  constexpr Index chunk = 256;
  for (Index start = 0; start < n; start += chunk) {
    const Index width = std::min(chunk, n - start);
    const Eigen::MatrixXcd applied = op.sparse() * v.middleCols(start, width);
    const Eigen::MatrixXd mag = (v.adjoint() * applied).cwiseAbs();
    for (Index j = 0; j < width; ++j) {
      const double d = mag(start + j, j);
      diag_sum += d;
      off_sum += mag.col(j).sum() - d;
    }
  }
  const double off_mean = off_sum / static_cast<double>(n * (n - 1));
  const double diag_mean = diag_sum / static_cast<double>(n);
  if (off_mean <= kZeroOffDiagonal * diag_mean) return {std::numeric_limits<double>::infinity(), true};
  return {diag_mean / off_mean, false};
}

double counter_diagonal_average(const EthMatrixData& data) {
  const Index n = data.elements.rows();
  if (!power_of_two(n) || data.elements.cols() != n) {
    throw std::invalid_argument("counter_diagonal_average: dimension " + std::to_string(n) +
                                " is not a power of two (defined for qubit chains)");
  }
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) sum += std::abs(data.elements(i, n - 1 - i));
  return sum / static_cast<double>(n);
}

double counter_diagonal_average(const Spectrum& spectrum, const OperatorMatrix& op) {
  check_operator(spectrum, op);
  const Index n = spectrum.size();
  if (!power_of_two(n)) {
    throw std::invalid_argument("counter_diagonal_average: dimension " + std::to_string(n) +
                                " is not a power of two (defined for qubit chains)");
  }
  const Eigen::MatrixXcd v = spectrum.eigenvector_matrix();
  const Eigen::MatrixXcd applied = op.sparse() * v;
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) sum += std::abs(v.col(i).dot(applied.col(n - 1 - i)));
  return sum / static_cast<double>(n);
}

ScalingFit scaling_fit(std::span<const std::pair<double, double>> points, bool log_scale) {
  if (points.size() < 3) throw std::invalid_argument("scaling_fit: need at least three points");
  const auto n = static_cast<double>(points.size());
  std::vector<double> ys;
  ys.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (log_scale && !(y > 0.0)) {
      throw std::invalid_argument("scaling_fit: nonpositive value " + std::to_string(y) + " under log scale");
    }
    ys.push_back(log_scale ? std::log(y) : y);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    mx += points[i].first;
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxx += (points[i].first - mx) * (points[i].first - mx);
    sxy += (points[i].first - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling_fit: all abscissae coincide");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * points[i].first);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

Eigen::Matrix2cd haar_unitary_2(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::Matrix2cd z;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
  const Eigen::Matrix2cd q = qr.householderQ();
  const Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  Eigen::Matrix2cd phases = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 2; ++i) phases(i, i) = std::abs(r(i, i)) > 0.0 ? r(i, i) / std::abs(r(i, i)) : Complex(1.0);
  return q * phases;
}

RandomSiteOperator random_fixed_spectrum_operator(int L, std::mt19937_64& rng) {
  if (L < 1) throw std::invalid_argument("random_fixed_spectrum_operator: L must be >= 1");
  RandomSiteOperator out;
  out.site = std::uniform_int_distribution<int>(1, L)(rng);
  const Eigen::Matrix2cd u = haar_unitary_2(rng);
  const Eigen::Vector2cd spectrum(-1.0, 1.0);
  out.op.dim = 2;
  out.op.entries = u.adjoint() * spectrum.asDiagonal() * u;
  out.op.name = "haar";
  return out;
}

}  // namespace ethlab
