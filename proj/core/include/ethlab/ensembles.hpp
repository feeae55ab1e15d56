#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ethlab/lattice.hpp"

namespace ethlab {

class Spectrum;

/// Eigenstates with energy in [e_min, e_max]; indices follow the global
/// ascending order of the spectrum.
struct MicrocanonicalWindow {
  double e_min = 0.0;
  double e_max = 0.0;
  std::vector<Index> member_indices;
  double mean_energy = 0.0;
};

class EmptyWindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Window E +- half_width, optionally restricted to one charge sector.
/// Throws EmptyWindowError when nothing falls inside.
MicrocanonicalWindow make_window(const Spectrum& spectrum, double center, double half_width = 0.05,
                                 std::optional<int> charge = std::nullopt);

/// Uniform average of precomputed diagonal elements over the window.
double window_average(const MicrocanonicalWindow& window, const Eigen::VectorXd& diagonal);
double microcanonical_expectation(const Spectrum& spectrum, const MicrocanonicalWindow& window,
                                  const OperatorMatrix& op);

/// Generalized Gibbs parameters; gamma = beta * mu weights the total charge.
struct GibbsParams {
  double beta = 0.0;
  std::optional<double> gamma;

  /// mu = gamma / beta, undefined at beta = 0.
  std::optional<double> mu() const;
};

/// Per-eigenstate sector charge; throws if the spectrum is not charge-resolved.
Eigen::VectorXd eigenstate_charges(const Spectrum& spectrum);

/// w_i proportional to exp(-beta E_i + gamma q_i), normalized with a max-log
/// shift. `charges` is required iff params.gamma is set.
Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, const Eigen::VectorXd* charges,
                              const GibbsParams& params);
Eigen::VectorXd gibbs_state(const Spectrum& spectrum, const GibbsParams& params);

/// sum_i w_i values_i.
double ensemble_average(const Eigen::VectorXd& weights, const Eigen::VectorXd& values);

class AttainabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// beta with <H>_beta = target_E to 1e-10, searched on [-1e4/range, 1e4/range].
double solve_beta(const Eigen::VectorXd& energies, double target_E);
double solve_beta(const Spectrum& spectrum, double target_E);

class SingularJacobianError : public std::runtime_error {
 public:
  SingularJacobianError(const std::string& what, double determinant)
      : std::runtime_error(what), determinant_(determinant) {}
  double determinant() const { return determinant_; }

 private:
  double determinant_;
};

/// (beta, gamma) matching <H> = target_E and <Q> = target_Q with residual
/// norm below 1e-8. Newton on the convex dual log Z + beta E - gamma Q, whose
/// Hessian is the (H, Q) covariance, with backtracking on overshoot.
GibbsParams solve_beta_gamma(const Eigen::VectorXd& energies, const Eigen::VectorXd& charges,
                             double target_E, double target_Q);

/// |<E_i|psi>|^2. Throws std::invalid_argument unless the weights sum to 1
/// within 1e-10.
Eigen::VectorXd diagonal_ensemble(const Eigen::VectorXcd& state, const Spectrum& spectrum);

/// Entropy (bits) of `site` in the mixture sum_i w_i |E_i><E_i|.
double thermal_entropy_of_site(const Eigen::VectorXd& weights, const Spectrum& spectrum, int site, int L,
                               int dim);

/// Gibbs expectations tabulated on a rectangular (beta, mu) grid.
///
/// values[o](i, j) is observable o at (betas[i], mus[j]); between nodes the
/// surface is interpolated bilinearly and clamped at the grid edge.
class ThermalSurface {
 public:
  ThermalSurface(std::vector<double> betas, std::vector<double> mus, std::vector<Eigen::MatrixXd> values);

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& mus() const { return mus_; }
  const Eigen::MatrixXd& grid(std::size_t observable) const { return values_.at(observable); }
  std::size_t observable_count() const { return values_.size(); }
  double operator()(std::size_t observable, double beta, double mu) const;

 private:
  std::vector<double> betas_;
  std::vector<double> mus_;
  std::vector<Eigen::MatrixXd> values_;
};

/// Tabulates sum_i w_i(beta, gamma = beta mu) d_i for each observable diagonal d.
ThermalSurface tabulate_thermal_surface(const Eigen::VectorXd& energies, const Eigen::VectorXd& charges,
                                        std::vector<double> betas, std::vector<double> mus,
                                        std::span<const Eigen::VectorXd> diagonals);

}  // namespace ethlab
