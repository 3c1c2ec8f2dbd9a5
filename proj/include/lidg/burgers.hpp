#pragma once

#include <functional>

#include "lidg/scheme.hpp"

namespace lidg {

/// 2D Burgers q_t + (q^2/2)_x + (q^2/2)_y = 0 on a periodic mesh, advanced
/// with the same two-communication stage structure as the linear 2D scheme.
/// Volume terms use flux differencing with the entropy-conservative
/// two-point flux (a^2+ab+b^2)/6; interfaces use a Rusanov flux built from
/// the feeding predictor's traces; each local space-time problem is solved
/// by Picard iteration whose implicit side is the linear advection operator
/// frozen at the element-mean speed (the nonlinear remainder iterates on the
/// right-hand side, so the fixed point is the exact nonlinear stage).
struct BurgersConfig {
  int order_p = 1;
  CartesianMesh mesh;     // 2D
  double dt = 0.0;
  double t_final = 0.0;
  double cfl_norm = 0.0;  // ||q_max dt / dx_i||_2 at configuration time
};

/// Build a config from a target CFL norm; q0_max is the sup of |q0| used as
/// the wave-speed estimate. Validates that t_final precedes shock formation
/// for the given initial condition (first characteristic crossing).
BurgersConfig burgers_config(const CartesianMesh& mesh, int order_p, double cfl_norm,
                             double t_final,
                             const std::function<double(const Vec3&)>& q0);

/// First characteristic-crossing time of q_t + (q^2/2)_x + (q^2/2)_y = 0 for
/// the given initial data (sampled on a fine grid; +inf if none).
double burgers_shock_time(const std::function<double(const Vec3&)>& q0);

/// One step (4 local Picard solves, 2 communication stages per element).
/// If `predictor_carry` is non-null it supplies warm starts for this step's
/// predictor solves (when non-empty) and receives the predictors on return,
/// letting multi-step drivers reuse them across steps.
FieldState burgers_step_2d(const FieldState& state, const BurgersConfig& cfg,
                           OperatorCache& cache,
                           std::vector<ElementSolution>* predictor_carry = nullptr);
FieldState burgers_step_2d(const FieldState& state, const BurgersConfig& cfg);

/// Step to t_final with final-step truncation; aborts on Picard divergence
/// (CFL too large or shock formed) or blow-up.
RunResult burgers_run(const BurgersConfig& cfg,
                      const std::function<double(const Vec3&)>& q0);

/// Exact pre-shock solution by characteristics: the value q satisfying
/// q = q0(x - q t, y - q t), found by Newton iteration to 1e-13 residual.
double burgers_exact(double x, double y, double t,
                     const std::function<double(const Vec3&)>& q0);

}  // namespace lidg
