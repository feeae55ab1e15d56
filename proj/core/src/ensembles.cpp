#include "ethlab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ethlab/entanglement.hpp"
#include "ethlab/spectral.hpp"

namespace ethlab {

namespace {

struct Moments {
  double log_z = 0.0;
  double mean_e = 0.0;
  double mean_q = 0.0;
  double var_e = 0.0;
  double var_q = 0.0;
  double cov_eq = 0.0;
};

// Weighted moments of (E, q) under exp(-beta E + gamma q), shifted by the max
// log weight. Two passes keep the variances free of cancellation.
Moments moments(const Eigen::VectorXd& e, const Eigen::VectorXd* q, double beta, double gamma) {
  const Index n = e.size();
  Eigen::VectorXd logw = -beta * e;
  if (q != nullptr) logw += gamma * *q;
  const double shift = logw.maxCoeff();
  const Eigen::VectorXd w = (logw.array() - shift).exp();
  const double z = w.sum();
  Moments m;
  m.log_z = shift + std::log(z);
  m.mean_e = w.dot(e) / z;
  if (q != nullptr) m.mean_q = w.dot(*q) / z;
  for (Index i = 0; i < n; ++i) {
    const double de = e(i) - m.mean_e;
    const double dq = q != nullptr ? (*q)(i) - m.mean_q : 0.0;
    m.var_e += w(i) * de * de;
    m.var_q += w(i) * dq * dq;
    m.cov_eq += w(i) * de * dq;
  }
  m.var_e /= z;
  m.var_q /= z;
  m.cov_eq /= z;
  return m;
}

}  // namespace

MicrocanonicalWindow make_window(const Spectrum& spectrum, double center, double half_width,
                                 std::optional<int> charge) {
  if (!(half_width >= 0.0)) throw std::invalid_argument("make_window: half width must be >= 0");
  if (charge && !spectrum.has_charge_labels()) {
    throw std::invalid_argument("make_window: charge filter needs a charge-resolved spectrum");
  }
  MicrocanonicalWindow window{center - half_width, center + half_width, {}, 0.0};
  const auto& e = spectrum.energies();
  const auto first = std::lower_bound(e.begin(), e.end(), window.e_min);
  double sum = 0.0;
  for (auto it = first; it != e.end() && *it <= window.e_max; ++it) {
    const Index k = it - e.begin();
    if (charge && spectrum.charge_of(k) != charge) continue;
    window.member_indices.push_back(k);
    sum += *it;
  }
  if (window.member_indices.empty()) {
    throw EmptyWindowError("make_window: no eigenstate in [" + std::to_string(window.e_min) + ", " +
                           std::to_string(window.e_max) + "]");
  }
  window.mean_energy = sum / static_cast<double>(window.member_indices.size());
  return window;
}

double window_average(const MicrocanonicalWindow& window, const Eigen::VectorXd& diagonal) {
  if (window.member_indices.empty()) throw EmptyWindowError("window_average: empty window");
  double sum = 0.0;
  for (Index k : window.member_indices) sum += diagonal(k);
  return sum / static_cast<double>(window.member_indices.size());
}

double microcanonical_expectation(const Spectrum& spectrum, const MicrocanonicalWindow& window,
                                  const OperatorMatrix& op) {
  return window_average(window, spectrum.diagonal_elements(op));
}

std::optional<double> GibbsParams::mu() const {
  if (!gamma || beta == 0.0) return std::nullopt;
  return *gamma / beta;
}

Eigen::VectorXd eigenstate_charges(const Spectrum& spectrum) {
  if (!spectrum.has_charge_labels()) {
    throw std::invalid_argument("eigenstate_charges: spectrum blocks carry no charge labels");
  }
  Eigen::VectorXd q(spectrum.size());
  for (Index k = 0; k < spectrum.size(); ++k) q(k) = *spectrum.charge_of(k);
  return q;
}

Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, const Eigen::VectorXd* charges,
                              const GibbsParams& params) {
  if (!std::isfinite(params.beta)) throw std::invalid_argument("gibbs_weights: beta must be finite");
  if (params.gamma.has_value() != (charges != nullptr)) {
    throw std::invalid_argument("gibbs_weights: gamma and per-eigenstate charges go together");
  }
  if (charges != nullptr && charges->size() != energies.size()) {
    throw std::invalid_argument("gibbs_weights: one charge per eigenstate required");
  }
  Eigen::VectorXd logw = -params.beta * energies;
  if (charges != nullptr) logw += *params.gamma * *charges;
  const Eigen::VectorXd w = (logw.array() - logw.maxCoeff()).exp();
  return w / w.sum();
}

Eigen::VectorXd gibbs_state(const Spectrum& spectrum, const GibbsParams& params) {
  if (!params.gamma) return gibbs_weights(spectrum.energies(), nullptr, params);
  const Eigen::VectorXd q = eigenstate_charges(spectrum);
  return gibbs_weights(spectrum.energies(), &q, params);
}

double ensemble_average(const Eigen::VectorXd& weights, const Eigen::VectorXd& values) {
  if (weights.size() != values.size()) throw std::invalid_argument("ensemble_average: size mismatch");
  return weights.dot(values);
}

double solve_beta(const Eigen::VectorXd& energies, double target_E) {
  if (energies.size() < 2) throw std::invalid_argument("solve_beta: need at least two levels");
  const double e_min = energies.minCoeff();
  const double e_max = energies.maxCoeff();
  if (!(target_E > e_min && target_E < e_max)) {
    throw AttainabilityError("solve_beta: target energy " + std::to_string(target_E) +
                             " lies outside the open spectral interval (" + std::to_string(e_min) + ", " +
                             std::to_string(e_max) + ")");
  }
  constexpr double tolerance = 1e-10;
  const double cap = 1e4 / (e_max - e_min);
  double lo = -cap;
  double hi = cap;
  if (moments(energies, nullptr, hi, 0.0).mean_e - target_E > tolerance ||
      moments(energies, nullptr, lo, 0.0).mean_e - target_E < -tolerance) {
    throw AttainabilityError("solve_beta: target energy " + std::to_string(target_E) +
                             " needs |beta| beyond the cap " + std::to_string(cap));
  }
  // <H>_beta decreases strictly in beta; Newton steps kept inside the bracket.
  double beta = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    const Moments m = moments(energies, nullptr, beta, 0.0);
    const double f = m.mean_e - target_E;
    if (std::abs(f) < tolerance) return beta;
    (f > 0.0 ? lo : hi) = beta;
    double next = m.var_e > 0.0 ? beta + f / m.var_e : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == beta) break;
    beta = next;
  }
  throw std::runtime_error("solve_beta: no convergence to 1e-10 for target " + std::to_string(target_E));
}

double solve_beta(const Spectrum& spectrum, double target_E) { return solve_beta(spectrum.energies(), target_E); }

GibbsParams solve_beta_gamma(const Eigen::VectorXd& energies, const Eigen::VectorXd& charges, double target_E,
                             double target_Q) {
  if (energies.size() != charges.size() || energies.size() < 2) {
    throw std::invalid_argument("solve_beta_gamma: need matching energies and charges, at least two levels");
  }
  if (!(target_E > energies.minCoeff() && target_E < energies.maxCoeff() && target_Q > charges.minCoeff() &&
        target_Q < charges.maxCoeff())) {
    throw AttainabilityError("solve_beta_gamma: target (" + std::to_string(target_E) + ", " +
                             std::to_string(target_Q) + ") lies outside the attainable region");
  }
  // Newton converges quadratically; aim well below the 1e-8 contract and accept it once steps stall.
  constexpr double target = 1e-12;
  constexpr double tolerance = 1e-8;
  auto dual = [&](const Eigen::Vector2d& x, const Moments& m) { return m.log_z + x(0) * target_E - x(1) * target_Q; };

  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  Moments m = moments(energies, &charges, x(0), x(1));
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::Vector2d grad(target_E - m.mean_e, m.mean_q - target_Q);
    if (grad.norm() < target) return GibbsParams{x(0), x(1)};
    Eigen::Matrix2d hess;
    hess << m.var_e, -m.cov_eq, -m.cov_eq, m.var_q;
    const double det = hess.determinant();
    const double scale = std::max(m.var_e * m.var_q, std::numeric_limits<double>::min());
    if (!(det > 1e-13 * scale)) {
      throw SingularJacobianError(
          "solve_beta_gamma: covariance of (H, Q) is singular (determinant " + std::to_string(det) +
              "); the target sits on the boundary of the attainable region",
          det);
    }
    const Eigen::Vector2d step = -hess.inverse() * grad;
    const double current = dual(x, m);
    const double slope = grad.dot(step);
    double t = 1.0;
    Eigen::Vector2d trial;
    Moments mt;
    double next = 0.0;
    for (int halvings = 0;; ++halvings) {
      trial = x + t * step;
      mt = moments(energies, &charges, trial(0), trial(1));
      next = Eigen::Vector2d(target_E - mt.mean_e, mt.mean_q - target_Q).norm();
      // near the root the dual decrease (~|grad|^2) drowns in rounding of log Z; the gradient norm does not
      if (dual(trial, mt) <= current + 1e-4 * t * slope || next <= (1.0 - 1e-4 * t) * grad.norm() ||
          halvings == 60) {
        break;
      }
      t *= 0.5;
    }
    if (trial == x || (next >= grad.norm() && grad.norm() < tolerance)) {
      if (grad.norm() < tolerance) return GibbsParams{x(0), x(1)};
      break;
    }
    x = trial;
    m = mt;
  }
  if (Eigen::Vector2d(target_E - m.mean_e, m.mean_q - target_Q).norm() < tolerance) return GibbsParams{x(0), x(1)};
  throw AttainabilityError("solve_beta_gamma: no convergence for target (" + std::to_string(target_E) + ", " +
                           std::to_string(target_Q) + "); it may lie outside the attainable region");
}

Eigen::VectorXd diagonal_ensemble(const Eigen::VectorXcd& state, const Spectrum& spectrum) {
  double captured = 0.0;
  const Eigen::VectorXcd c = spectrum.to_energy_basis(state, &captured);
  if (std::abs(captured - 1.0) > 1e-10) {
    throw std::invalid_argument("diagonal_ensemble: weights sum to " + std::to_string(captured) +
                                "; the state must be normalized and lie inside the spectrum's sectors");
  }
  return c.cwiseAbs2();
}

double thermal_entropy_of_site(const Eigen::VectorXd& weights, const Spectrum& spectrum, int site, int L,
                               int dim) {
  return von_neumann_entropy(mixed_reduce(weights, spectrum, {site}, L, dim));
}

ThermalSurface::ThermalSurface(std::vector<double> betas, std::vector<double> mus,
                               std::vector<Eigen::MatrixXd> values)
    : betas_(std::move(betas)), mus_(std::move(mus)), values_(std::move(values)) {
  if (betas_.empty() || mus_.empty()) throw std::invalid_argument("ThermalSurface: empty grid");
  if (!std::is_sorted(betas_.begin(), betas_.end()) || !std::is_sorted(mus_.begin(), mus_.end()) ||
      std::adjacent_find(betas_.begin(), betas_.end()) != betas_.end() ||
      std::adjacent_find(mus_.begin(), mus_.end()) != mus_.end()) {
    throw std::invalid_argument("ThermalSurface: grid axes must be strictly increasing");
  }
  for (const auto& v : values_) {
    if (v.rows() != static_cast<Index>(betas_.size()) || v.cols() != static_cast<Index>(mus_.size())) {
      throw std::invalid_argument("ThermalSurface: value grid does not match the axes");
    }
  }
}

double ThermalSurface::operator()(std::size_t observable, double beta, double mu) const {
  const Eigen::MatrixXd& v = values_.at(observable);
  auto locate = [](const std::vector<double>& axis, double x, std::size_t& i, double& t) {
    if (axis.size() == 1 || x <= axis.front()) {
      i = 0;
      t = 0.0;
      return;
    }
    if (x >= axis.back()) {
      i = axis.size() - 2;
      t = 1.0;
      return;
    }
    i = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), x) - axis.begin()) - 1;
    t = (x - axis[i]) / (axis[i + 1] - axis[i]);
  };
  std::size_t i = 0;
  std::size_t j = 0;
  double tb = 0.0;
  double tm = 0.0;
  locate(betas_, beta, i, tb);
  locate(mus_, mu, j, tm);
  const std::size_t i1 = std::min(i + 1, betas_.size() - 1);
  const std::size_t j1 = std::min(j + 1, mus_.size() - 1);
  return (1 - tb) * (1 - tm) * v(i, j) + tb * (1 - tm) * v(i1, j) + (1 - tb) * tm * v(i, j1) +
         tb * tm * v(i1, j1);
}

ThermalSurface tabulate_thermal_surface(const Eigen::VectorXd& energies, const Eigen::VectorXd& charges,
                                        std::vector<double> betas, std::vector<double> mus,
                                        std::span<const Eigen::VectorXd> diagonals) {
  std::vector<Eigen::MatrixXd> values(diagonals.size(),
                                      Eigen::MatrixXd(static_cast<Index>(betas.size()), static_cast<Index>(mus.size())));
  for (std::size_t i = 0; i < betas.size(); ++i) {
    for (std::size_t j = 0; j < mus.size(); ++j) {
      const Eigen::VectorXd w = gibbs_weights(energies, &charges, GibbsParams{betas[i], betas[i] * mus[j]});
      for (std::size_t o = 0; o < diagonals.size(); ++o) values[o](i, j) = ensemble_average(w, diagonals[o]);
    }
  }
  return ThermalSurface(std::move(betas), std::move(mus), std::move(values));
}

}  // namespace ethlab
