#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lidg/local_operator.hpp"
#include "lidg/scheme.hpp"

namespace lidg {

/// The predictor/corrector-difference system for one 1D element:
///   M psi = L beta,   gamma = S psi,   gamma = nu A beta.
/// M is the corrector operator (volume + temporal jump + both face
/// penalties). L maps the time trace of the interface jump beta to the
/// right-hand side; the stored L carries the factor nu from the flux term,
/// so A = (1/nu) S M^-1 L reproduces exactly and gamma = nu A beta is the
/// physical end-of-step difference relation.
struct StabilityMatrices {
  int order_p = 0;
  double nu = 0.0;
  Eigen::MatrixXd M;      // (p+1)^2 x (p+1)^2
  Eigen::MatrixXd L;      // (p+1)^2 x (p+1)
  Eigen::MatrixXd S;      // (p+1)   x (p+1)^2
  Eigen::MatrixXd A;      // (p+1)   x (p+1)
};

StabilityMatrices build_stability_matrices(int p, double nu);

/// Operator norm between w-weighted spaces: the spectral norm of
/// diag(sqrt(w)) * A * diag(1/sqrt(w)).
double weighted_norm(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& weights);

/// Plain spectral (2-)norm.
double spectral_norm(const Eigen::MatrixXd& matrix);

/// Spectral radius (max |eigenvalue|). For the end-of-step difference matrix
/// A this is the quantity with the clean stability dichotomy: it equals
/// max(1, nu^p), i.e. exactly 1 for nu <= 1 and > 1 for nu > 1 once p >= 1.
/// It is similarity-invariant, so weighting by sqrt(w) does not change it;
/// the induced norms above genuinely exceed 1 below the stability limit.
double spectral_radius(const Eigen::MatrixXd& matrix);

/// Solve M psi = L beta and extract gamma = S psi; checks gamma = nu*A*beta
/// to 1e-12 as an internal consistency guard.
std::pair<ElementSolution, Eigen::VectorXd> psi_from_jump(const StabilityMatrices& sm,
                                                          const Eigen::VectorXd& beta);

/// Both sides of the one-step energy identity for the 1D scheme,
///   delta_E = sum_k <(1/2) psi^2>|_{t^n} - <(1/2) nu (qtilde_{k-1}-qtilde_k)^2>|_{x_k},
/// evaluated in reference units from an actual step's predictors/correctors.
struct EnergyReport {
  double delta_E = 0.0;
  double rhs_psi_term = 0.0;
  double rhs_jump_term = 0.0;
  double identity_residual = 0.0;  // |delta_E - (rhs_psi_term - rhs_jump_term)|
};

EnergyReport energy_identity_check(const FieldState& state, const SchemeConfig& cfg);

/// One-step update restricted to a Bloch mode with per-axis wavenumbers
/// theta: neighbor traces enter multiplied by e^{-i theta_a} per unit
/// offset (upwind stencil offsets are {0,-1} per axis for u >= 0).
struct AmplificationSample {
  std::array<double, 3> theta{0, 0, 0};
  Eigen::MatrixXcd matrix;  // (p+1)^d square
  double spectral_radius = 0.0;
};

AmplificationSample amplification_matrix(SchemeChoice scheme, int p, int d,
                                         const Vec3& nu,
                                         const std::array<double, 3>& theta);

/// Max spectral radius over the uniform theta grid {2 pi m / samples}^d.
double scan_max_radius(SchemeChoice scheme, int p, int d, const Vec3& nu,
                       int samples_per_axis);

/// Bisection on ||nu||_2 along the given direction (need not be normalized)
/// for the stability predicate scan_max_radius <= 1 + 1e-9.
double max_stable_cfl(SchemeChoice scheme, int p, int d, const Vec3& direction,
                      double tol, int samples_per_axis);

/// Check that the scanned radius is nondecreasing along a list of CFL norms
/// (equal nu per axis); returns the violating consecutive pairs.
struct MonotonicityViolation {
  double cfl_lo, cfl_hi;
  double radius_lo, radius_hi;
};
std::vector<MonotonicityViolation> check_radius_monotonicity(
    SchemeChoice scheme, int p, int d, const std::vector<double>& cfl_norms,
    int samples_per_axis);

}  // namespace lidg
