#include "lidg/burgers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lidg {

namespace {

double flux(double q) { return 0.5 * q * q; }

/// Entropy-conservative two-point flux for q^2/2.
double ec_flux(double a, double b) { return (a * a + a * b + b * b) / 6.0; }

/// Rusanov (local Lax-Friedrichs) flux; ql is the low-side trace.
double rusanov(double ql, double qh) {
  return 0.5 * (flux(ql) + flux(qh)) - 0.5 * std::max(std::abs(ql), std::abs(qh)) * (qh - ql);
}

/// Weighted flux-differencing volume term: for each node I,
///   out_I = W_I * sum_a s_a * 2 sum_j D_a[i_a, j] f_ec(q_I, q_j-along-a).
Eigen::VectorXd fd_volume(const StShape& sh, const Vec3& scale,
                          const Eigen::VectorXd& q) {
  const auto& rule = gll_rule(sh.p);
  const auto& ops = lagrange_ops(sh.p);
  const int n = sh.n();
  Eigen::VectorXd out(sh.size());
  for (int I = 0; I < sh.size(); ++I) {
    int rem = I / n;
    double w = rule.weights[I % n];
    std::array<int, 3> ix{0, 0, 0};
    for (int a = sh.dim - 1; a >= 0; --a) {
      ix[a] = rem % n;
      w *= rule.weights[ix[a]];
      rem /= n;
    }
    double acc = 0.0;
    for (int a = 0; a < sh.dim; ++a) {
      const int stride = sh.space_stride(a);
      const int base = I - ix[a] * stride;
      double da = 0.0;
      for (int j = 0; j < n; ++j)
        da += ops.diff_matrix(ix[a], j) * ec_flux(q[I], q[base + j * stride]);
      acc += scale[a] * 2.0 * da;
    }
    out[I] = w * acc;
  }
  return out;
}

/// Nodewise Rusanov flux on a face from the two predictor traces.
Eigen::VectorXd face_flux(const Eigen::VectorXd& low_side,
                          const Eigen::VectorXd& high_side) {
  Eigen::VectorXd out(low_side.size());
  for (int i = 0; i < out.size(); ++i) out[i] = rusanov(low_side[i], high_side[i]);
  return out;
}

/// Both-side traces of a stage along one axis for every element.
struct AxisTraces {
  std::vector<Eigen::VectorXd> low, high;
};
AxisTraces collect_traces(const std::vector<ElementSolution>& stage, int axis) {
  AxisTraces tr;
  tr.low.resize(stage.size());
  tr.high.resize(stage.size());
  for (size_t k = 0; k < stage.size(); ++k) {
    tr.low[k] = extract_trace(stage[k], axis, Side::Low);
    tr.high[k] = extract_trace(stage[k], axis, Side::High);
  }
  return tr;
}

/// Penalty data for one face: the single-valued numerical flux on it.
struct FaceFlux {
  int axis;
  Side side;
  Eigen::VectorXd fstar;
};

/// Numerical fluxes on both faces of `axis` for element k, built from the
/// feeding stage's traces (periodic neighbor lookup).
void append_axis_fluxes(const CartesianMesh& mesh, const AxisTraces& tr, int k,
                        int axis, std::vector<FaceFlux>& out) {
  const int klo = neighbor(mesh, k, axis, Side::Low);
  const int khi = neighbor(mesh, k, axis, Side::High);
  out.push_back({axis, Side::Low, face_flux(tr.high[klo], tr.low[k])});
  out.push_back({axis, Side::High, face_flux(tr.high[k], tr.low[khi])});
}

/// Numerical flux on the inflow (low, for rightward transport) face only, as
/// used by the single-axis sweep stages: at the outflow face the flux is the
/// stage's own, so the face term vanishes there.
void append_inflow_flux(const CartesianMesh& mesh, const AxisTraces& tr, int k,
                        int axis, std::vector<FaceFlux>& out) {
  const int klo = neighbor(mesh, k, axis, Side::Low);
  out.push_back({axis, Side::Low, face_flux(tr.high[klo], tr.low[k])});
}

/// One Picard-solved local stage. The inverted operator `lin_op` is the
/// linear advection operator frozen at the element-mean speed, with the same
/// penalized faces as this stage; the right-hand side carries the difference
/// between the nonlinear terms and that frozen linearization:
///   e(q) = fd_volume(q) + sum_f sign_f s_a <phi, f(q) - f*_f>_f
///          - (lin_op - time_op) q.
/// The fixed point satisfies time_op q + nonlinear(q) = b exactly (the
/// frozen part cancels algebraically), but the iteration contracts on the
/// nonlinear remainder only, which is small for near-constant elements.
/// f* is fixed data for the stage.
ElementSolution solve_stage(const LocalOperator& lin_op, const LocalOperator& time_op,
                            const Vec3& scale, const Eigen::VectorXd& prev_slice,
                            const std::vector<FaceFlux>& faces, int max_iters,
                            const ElementSolution* warm_start = nullptr) {
  const StShape sh{lin_op.order_p, lin_op.dim};
  const Eigen::MatrixXd frozen = lin_op.matrix - time_op.matrix;
  auto explicit_terms = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd e = fd_volume(sh, scale, q);
    for (const auto& fc : faces) {
      // add_face_penalty_rhs adds -sign*s_a*<phi, g>_f; passing
      // g = f(q trace) - f* yields the +sign*s_a*<phi, f* - f(q)>_f term.
      Eigen::VectorXd g = extract_face<double>(sh, q, fc.axis, fc.side);
      for (int i = 0; i < g.size(); ++i) g[i] = flux(g[i]) - fc.fstar[i];
      add_face_penalty_rhs<double>(sh, fc.axis, fc.side, scale[fc.axis], g, e);
    }
    e -= frozen * q;
    return e;
  };
  return picard_iterate_with_op(lin_op, prev_slice, explicit_terms, max_iters, 1e-12,
                                warm_start ? &warm_start->values : nullptr)
      .solution;
}

}  // namespace

double burgers_shock_time(const std::function<double(const Vec3&)>& q0) {
  const double L = 2.0 * M_PI;
  const int N = 512;
  const double h = 1e-5;
  double min_div = 0.0;  // min over the domain of d(q0)/dx + d(q0)/dy
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double x = L * i / N, y = L * j / N;
      const double gx = (q0({x + h, y, 0}) - q0({x - h, y, 0})) / (2 * h);
      const double gy = (q0({x, y + h, 0}) - q0({x, y - h, 0})) / (2 * h);
      min_div = std::min(min_div, gx + gy);
    }
  }
  // Characteristics (x0,y0) -> (x0 + q0 t, y0 + q0 t) first cross when the
  // map's Jacobian 1 + t (q0_x + q0_y) vanishes.
  if (min_div >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / min_div;
}

BurgersConfig burgers_config(const CartesianMesh& mesh, int order_p, double cfl_norm,
                             double t_final,
                             const std::function<double(const Vec3&)>& q0) {
  if (mesh.dim != 2) throw std::invalid_argument("burgers_config: mesh must be 2D");
  if (!(cfl_norm > 0.0) || !(t_final > 0.0))
    throw std::invalid_argument("burgers_config: cfl_norm and t_final must be > 0");

  double q0_max = 0.0;
  const int N = 512;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      q0_max = std::max(q0_max, std::abs(q0({mesh.domain_lengths[0] * i / N,
                                             mesh.domain_lengths[1] * j / N, 0})));
  if (q0_max == 0.0)
    throw std::invalid_argument("burgers_config: initial condition is identically 0");

  const double t_shock = burgers_shock_time(q0);
  if (!(t_final < t_shock))
    throw std::invalid_argument(
        "burgers_config: t_final " + std::to_string(t_final) +
        " is not strictly before shock formation at t = " + std::to_string(t_shock));

  double inv_norm = 0.0;
  for (int a = 0; a < 2; ++a) inv_norm += 1.0 / (mesh.elem_sizes[a] * mesh.elem_sizes[a]);
  BurgersConfig cfg;
  cfg.order_p = order_p;
  cfg.mesh = mesh;
  cfg.cfl_norm = cfl_norm;
  cfg.t_final = t_final;
  cfg.dt = cfl_norm / (q0_max * std::sqrt(inv_norm));
  return cfg;
}

FieldState burgers_step_2d(const FieldState& state, const BurgersConfig& cfg,
                           OperatorCache& cache,
                           std::vector<ElementSolution>* predictor_carry) {
  const CartesianMesh& mesh = *state.mesh;
  if (mesh.dim != 2) throw std::invalid_argument("burgers_step_2d: mesh must be 2D");
  const int p = cfg.order_p;
  const int n_el = mesh.total_elems();
  const Vec3 scale{cfg.dt / mesh.elem_sizes[0], cfg.dt / mesh.elem_sizes[1], 0.0};
  const LocalOperator& time_op = cache.get(p, 2, Vec3{0, 0, 0}, 0);
  const int max_iters = 4 * (p + 2);
  const uint32_t bits_corr = face_bit(0, Side::Low) | face_bit(0, Side::High) |
                             face_bit(1, Side::Low) | face_bit(1, Side::High);

  // Element-mean speeds, quantized so the frozen-operator factorizations are
  // shared across elements and steps.
  const auto& rule = gll_rule(p);
  const StShape sh{p, 2};
  std::vector<double> q_mean(n_el);
  for (int k = 0; k < n_el; ++k) {
    double qbar = 0.0, wsum = 0.0;
    for (int sp = 0; sp < sh.n_space(); ++sp) {
      double w = 1.0;
      int rem = sp;
      for (int a = sh.dim - 1; a >= 0; --a) {
        w *= rule.weights[rem % sh.n()];
        rem /= sh.n();
      }
      qbar += w * state.elems[k][sp];
      wsum += w;
    }
    q_mean[k] = std::round(qbar / wsum * 256.0) / 256.0;
  }
  auto nu_bar = [&](int k) {
    return Vec3{q_mean[k] * scale[0], q_mean[k] * scale[1], 0.0};
  };

  // Stage A: free space-time predictor (no face terms). Warm start from the
  // previous step's predictor when a carry is supplied, otherwise from the
  // frozen-speed linear predictor.
  const bool have_carry =
      predictor_carry && static_cast<int>(predictor_carry->size()) == n_el;
  std::vector<ElementSolution> pred(n_el);
  for (int k = 0; k < n_el; ++k) {
    const LocalOperator& op_k = cache.get(p, 2, nu_bar(k), 0);
    ElementSolution lin_guess;
    const ElementSolution* init;
    if (have_carry) {
      init = &(*predictor_carry)[k];
    } else {
      lin_guess = predictor_free<double>(op_k, state.elems[k]);
      init = &lin_guess;
    }
    pred[k] = solve_stage(op_k, time_op, scale, state.elems[k], {}, max_iters, init);
  }

  // Communication 1: free-predictor traces on both axes.
  const AxisTraces pr_x = collect_traces(pred, 0);
  const AxisTraces pr_y = collect_traces(pred, 1);

  // Stage B: single-axis upwind sweeps with Rusanov fluxes from the free
  // predictor on their inflow face only. The predictor warm-starts the
  // Picard iteration of every penalized stage.
  std::vector<ElementSolution> q1(n_el), q2(n_el);
  for (int k = 0; k < n_el; ++k) {
    std::vector<FaceFlux> fx, fy;
    append_inflow_flux(mesh, pr_x, k, 0, fx);
    append_inflow_flux(mesh, pr_y, k, 1, fy);
    q1[k] = solve_stage(cache.get(p, 2, nu_bar(k), face_bit(0, Side::Low)), time_op,
                        scale, state.elems[k], fx, max_iters, &pred[k]);
    q2[k] = solve_stage(cache.get(p, 2, nu_bar(k), face_bit(1, Side::Low)), time_op,
                        scale, state.elems[k], fy, max_iters, &pred[k]);
  }

  // Communication 2: cross traces, as in the linear scheme (xi_1 faces fed
  // by the xi_2 sweep and vice versa).
  const AxisTraces cr_x = collect_traces(q2, 0);
  const AxisTraces cr_y = collect_traces(q1, 1);

  // Corrector: all four faces.
  FieldState out;
  out.mesh = state.mesh;
  out.order_p = p;
  out.time = state.time + cfg.dt;
  out.elems.resize(n_el);
  for (int k = 0; k < n_el; ++k) {
    std::vector<FaceFlux> faces;
    append_axis_fluxes(mesh, cr_x, k, 0, faces);
    append_axis_fluxes(mesh, cr_y, k, 1, faces);
    const ElementSolution corr =
        solve_stage(cache.get(p, 2, nu_bar(k), bits_corr), time_op, scale,
                    state.elems[k], faces, max_iters, &pred[k]);
    out.elems[k] = extract_time_slice(corr, Side::High);
  }
  if (predictor_carry) *predictor_carry = std::move(pred);
  return out;
}

FieldState burgers_step_2d(const FieldState& state, const BurgersConfig& cfg) {
  OperatorCache cache;
  return burgers_step_2d(state, cfg, cache);
}

RunResult burgers_run(const BurgersConfig& cfg,
                      const std::function<double(const Vec3&)>& q0) {
  OperatorCache cache;
  FieldState state = project_initial_condition(cfg.mesh, cfg.order_p, q0);
  double init_max = 0.0;
  for (const auto& e : state.elems)
    init_max = std::max(init_max, e.cwiseAbs().maxCoeff());
  const double blowup = 1e6 * std::max(init_max, 1e-300);

  int steps = 0;
  double t = 0.0;
  std::vector<ElementSolution> carry;
  while (cfg.t_final - t > 1e-12 * cfg.dt) {
    const double remaining = cfg.t_final - t;
    BurgersConfig step_cfg = cfg;
    step_cfg.dt = (remaining < cfg.dt * (1.0 + 1e-9)) ? remaining : cfg.dt;
    state = burgers_step_2d(state, step_cfg, cache, &carry);
    ++steps;
    t += step_cfg.dt;
    double cur_max = 0.0;
    for (const auto& e : state.elems)
      cur_max = std::max(cur_max, e.cwiseAbs().maxCoeff());
    if (!(cur_max <= blowup))
      throw std::runtime_error("burgers_run: instability detected at step " +
                               std::to_string(steps));
  }
  state.time = cfg.t_final;
  return RunResult{std::move(state), steps};
}

double burgers_exact(double x, double y, double t,
                     const std::function<double(const Vec3&)>& q0) {
  // Solve q = q0(x - q t, y - q t) by Newton; valid strictly pre-shock.
  double q = q0({x, y, 0});
  const double h = 1e-6;
  for (int iter = 0; iter < 100; ++iter) {
    const double xs = x - q * t, ys = y - q * t;
    const double r = q - q0({xs, ys, 0});
    if (std::abs(r) <= 1e-13) return q;
    const double gx = (q0({xs + h, ys, 0}) - q0({xs - h, ys, 0})) / (2 * h);
    const double gy = (q0({xs, ys + h, 0}) - q0({xs, ys - h, 0})) / (2 * h);
    double slope = 1.0 + t * (gx + gy);
    if (std::abs(slope) < 1e-3) slope = (slope < 0 ? -1e-3 : 1e-3);
    q -= r / slope;
  }
  throw std::runtime_error("burgers_exact: Newton did not reach 1e-13 at (" +
                           std::to_string(x) + ", " + std::to_string(y) + ", t=" +
                           std::to_string(t) + ")");
}

}  // namespace lidg
