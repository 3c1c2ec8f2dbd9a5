#include "lidg/scheme.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lidg {

namespace {

/// High-face traces of every element's stage solution along one axis.
template <typename S>
std::vector<Eigen::VectorX<S>> publish_high_traces(
    const std::vector<ElementSolutionT<S>>& stage, int axis) {
  std::vector<Eigen::VectorX<S>> traces(stage.size());
  for (size_t k = 0; k < stage.size(); ++k)
    traces[k] = extract_trace(stage[k], axis, Side::High);
  return traces;
}

/// Upwind trace for the low face of element k on `axis`: the low neighbor's
/// high-face trace, multiplied by the Bloch phase when the lookup wraps
/// around the periodic boundary.
template <typename S>
Eigen::VectorX<S> fetch_low_trace(const CartesianMesh& mesh,
                                  const std::vector<Eigen::VectorX<S>>& traces, int k,
                                  int axis, const std::array<S, 3>& wrap_low) {
  const int kn = neighbor(mesh, k, axis, Side::Low);
  Eigen::VectorX<S> t = traces[kn];
  if (mesh.unflatten(k)[axis] == 0) t *= wrap_low[axis];
  return t;
}

uint32_t axis_mask(std::initializer_list<int> axes) {
  uint32_t m = 0;
  for (int a : axes) m |= face_bit(a, Side::Low) | face_bit(a, Side::High);
  return m;
}

template <typename S>
FieldStateT<S> slice_new_state(const FieldStateT<S>& state,
                               const std::vector<ElementSolutionT<S>>& correctors,
                               double dt) {
  FieldStateT<S> out;
  out.mesh = state.mesh;
  out.order_p = state.order_p;
  out.time = state.time + dt;
  out.elems.resize(correctors.size());
  for (size_t k = 0; k < correctors.size(); ++k)
    out.elems[k] = extract_time_slice(correctors[k], Side::High);
  return out;
}

/// Solve (M x M x ...) delta = rhs in place, one consistent-mass solve per
/// spatial axis of the pure-spatial tensor (time axis absent).
template <typename S>
void solve_consistent_mass(const StShape& sh,
                           const Eigen::PartialPivLU<Eigen::MatrixX<S>>& mass_lu,
                           Eigen::VectorX<S>& field) {
  const int n = sh.n();
  Eigen::VectorX<S> line(n);
  for (int a = 0; a < sh.dim; ++a) {
    const int stride = sh.spatial_stride(a);
    for (int base = 0; base < sh.n_space(); ++base) {
      if ((base / stride) % n != 0) continue;  // enumerate lines with i_a = 0
      for (int i = 0; i < n; ++i) line[i] = field[base + i * stride];
      const Eigen::VectorX<S> sol = mass_lu.solve(line);
      for (int i = 0; i < n; ++i) field[base + i * stride] = sol[i];
    }
  }
}

}  // namespace

template <typename S>
std::pair<FieldStateT<S>, StageReport> step_lidg(const FieldStateT<S>& state,
                                                 const SchemeConfig& cfg,
                                                 OperatorCache& cache,
                                                 const std::array<S, 3>& wrap_low,
                                                 StepCaptureT<S>* capture) {
  const CartesianMesh& mesh = *state.mesh;
  const int p = cfg.order_p;
  const int d = cfg.dim;
  const Vec3& nu = cfg.cfl_vector;
  const int n_el = mesh.total_elems();
  const LocalOperator& op_free = cache.get(p, d, nu, 0);

  // Stage A: element-local free predictor.
  std::vector<ElementSolutionT<S>> pred(n_el);
  for (int k = 0; k < n_el; ++k) pred[k] = predictor_free<S>(op_free, state.elems[k]);

  if (d == 1) {
    // Communication 1: exchange predictor traces; corrector on both faces.
    const auto tr = publish_high_traces(pred, 0);
    const LocalOperator& op_corr = cache.get(p, d, nu, axis_mask({0}));
    std::vector<ElementSolutionT<S>> corr(n_el);
    for (int k = 0; k < n_el; ++k) {
      std::vector<FacePenaltyT<S>> pen;
      pen.push_back({0, Side::Low, fetch_low_trace(mesh, tr, k, 0, wrap_low)});
      pen.push_back({0, Side::High, tr[k]});
      corr[k] = solve_penalized<S>(op_corr, state.elems[k], pen);
    }
    if (capture) {
      capture->predictors = pred;
      capture->correctors = corr;
    }
    return {slice_new_state(state, corr, cfg.dt), StageReport{2, 1}};
  }

  if (d == 2) {
    // Communication 1: exchange free-predictor traces on both axes.
    const auto tr0_x = publish_high_traces(pred, 0);
    const auto tr0_y = publish_high_traces(pred, 1);
    // Stage B: single-axis upwind sweeps fed by the free predictor. A sweep
    // penalizes only its inflow face: at the outflow face the upwind value is
    // the stage's own implicit trace, so the flux term vanishes there (the
    // same convention the explicit corrector in step_ader uses).
    const LocalOperator& op_x = cache.get(p, d, nu, face_bit(0, Side::Low));
    const LocalOperator& op_y = cache.get(p, d, nu, face_bit(1, Side::Low));
    std::vector<ElementSolutionT<S>> q1(n_el), q2(n_el);
    for (int k = 0; k < n_el; ++k) {
      std::vector<FacePenaltyT<S>> pen_x;
      pen_x.push_back({0, Side::Low, fetch_low_trace(mesh, tr0_x, k, 0, wrap_low)});
      q1[k] = solve_penalized<S>(op_x, state.elems[k], pen_x);
      std::vector<FacePenaltyT<S>> pen_y;
      pen_y.push_back({1, Side::Low, fetch_low_trace(mesh, tr0_y, k, 1, wrap_low)});
      q2[k] = solve_penalized<S>(op_y, state.elems[k], pen_y);
    }
    // Communication 2: the corrector's xi_1 faces are fed by the xi_2-swept
    // predictor and vice versa.
    const auto tr2_x = publish_high_traces(q2, 0);
    const auto tr1_y = publish_high_traces(q1, 1);
    const LocalOperator& op_corr = cache.get(p, d, nu, axis_mask({0, 1}));
    std::vector<ElementSolutionT<S>> corr(n_el);
    for (int k = 0; k < n_el; ++k) {
      std::vector<FacePenaltyT<S>> pen;
      pen.push_back({0, Side::Low, fetch_low_trace(mesh, tr2_x, k, 0, wrap_low)});
      pen.push_back({0, Side::High, tr2_x[k]});
      pen.push_back({1, Side::Low, fetch_low_trace(mesh, tr1_y, k, 1, wrap_low)});
      pen.push_back({1, Side::High, tr1_y[k]});
      corr[k] = solve_penalized<S>(op_corr, state.elems[k], pen);
    }
    return {slice_new_state(state, corr, cfg.dt), StageReport{4, 2}};
  }

  // d == 3.
  // Communication 1: free-predictor traces on all axes.
  std::array<std::vector<Eigen::VectorX<S>>, 3> tr0;
  for (int a = 0; a < 3; ++a) tr0[a] = publish_high_traces(pred, a);

  // Stage B: single-axis upwind sweeps q^(i) fed by the free predictor,
  // penalized at the inflow face only (see the 2D comment above).
  std::array<std::vector<ElementSolutionT<S>>, 3> q1;
  for (int a = 0; a < 3; ++a) {
    const LocalOperator& op_a = cache.get(p, d, nu, face_bit(a, Side::Low));
    q1[a].resize(n_el);
    for (int k = 0; k < n_el; ++k) {
      std::vector<FacePenaltyT<S>> pen;
      pen.push_back({a, Side::Low, fetch_low_trace(mesh, tr0[a], k, a, wrap_low)});
      q1[a][k] = solve_penalized<S>(op_a, state.elems[k], pen);
    }
  }

  // Communication 2: traces of q^(i) on the other axes. tr1[i][b] holds the
  // axis-b high traces of the axis-i sweep.
  std::array<std::array<std::vector<Eigen::VectorX<S>>, 3>, 3> tr1;
  for (int i = 0; i < 3; ++i)
    for (int b = 0; b < 3; ++b)
      if (b != i) tr1[i][b] = publish_high_traces(q1[i], b);

  // Stage C: two-axis sweeps q^(i,j); the xi_i faces are fed by the axis-j
  // sweep and the xi_j faces by the axis-i sweep.
  const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<std::vector<ElementSolutionT<S>>, 3> q2;
  for (int pidx = 0; pidx < 3; ++pidx) {
    const int i = pairs[pidx][0], j = pairs[pidx][1];
    const LocalOperator& op_ij = cache.get(p, d, nu, axis_mask({i, j}));
    q2[pidx].resize(n_el);
    for (int k = 0; k < n_el; ++k) {
      std::vector<FacePenaltyT<S>> pen;
      pen.push_back({i, Side::Low, fetch_low_trace(mesh, tr1[j][i], k, i, wrap_low)});
      pen.push_back({i, Side::High, tr1[j][i][k]});
      pen.push_back({j, Side::Low, fetch_low_trace(mesh, tr1[i][j], k, j, wrap_low)});
      pen.push_back({j, Side::High, tr1[i][j][k]});
      q2[pidx][k] = solve_penalized<S>(op_ij, state.elems[k], pen);
    }
  }

  // Communication 3: traces of q^(i,j) on the remaining axis.
  // complement[a] is the pair index {b,c} with b,c != a.
  const std::array<int, 3> complement{2, 1, 0};  // axis0 <- q^(1,2), etc.
  std::array<std::vector<Eigen::VectorX<S>>, 3> trC;
  for (int a = 0; a < 3; ++a) trC[a] = publish_high_traces(q2[complement[a]], a);

  // Final corrector: every face penalized, axis a fed by q^(other two).
  const LocalOperator& op_corr = cache.get(p, d, nu, axis_mask({0, 1, 2}));
  std::vector<ElementSolutionT<S>> corr(n_el);
  for (int k = 0; k < n_el; ++k) {
    std::vector<FacePenaltyT<S>> pen;
    for (int a = 0; a < 3; ++a) {
      pen.push_back({a, Side::Low, fetch_low_trace(mesh, trC[a], k, a, wrap_low)});
      pen.push_back({a, Side::High, trC[a][k]});
    }
    corr[k] = solve_penalized<S>(op_corr, state.elems[k], pen);
  }
  return {slice_new_state(state, corr, cfg.dt), StageReport{8, 3}};
}

template <typename S>
std::pair<FieldStateT<S>, StageReport> step_ader(const FieldStateT<S>& state,
                                                 const SchemeConfig& cfg,
                                                 OperatorCache& cache,
                                                 const std::array<S, 3>& wrap_low) {
  const CartesianMesh& mesh = *state.mesh;
  const int p = cfg.order_p;
  const int d = cfg.dim;
  const Vec3& nu = cfg.cfl_vector;
  const StShape sh{p, d};
  const int n_el = mesh.total_elems();
  const int nt = sh.n();
  const LocalOperator& op_free = cache.get(p, d, nu, 0);

  std::vector<ElementSolutionT<S>> pred(n_el);
  for (int k = 0; k < n_el; ++k) pred[k] = predictor_free<S>(op_free, state.elems[k]);

  // One communication stage: predictor traces per axis.
  std::array<std::vector<Eigen::VectorX<S>>, 3> tr;
  for (int a = 0; a < d; ++a) tr[a] = publish_high_traces(pred, a);

  // Explicit corrector: the classic single-mass-matrix update. Volume
  // advection and upwind fluxes are evaluated on the predictor and
  // integrated over the slab (the time collapse below); the new spatial
  // coefficients are then recovered against the consistent mass matrix.
  // The collocated diagonal mass would admit time steps one order-index
  // larger; the consistent mass yields the classic CFL limits
  // (0.33, 0.17, 0.10 for p = 1, 2, 3).
  const Eigen::PartialPivLU<Eigen::MatrixX<S>> mass_lu(
      Eigen::MatrixX<S>(consistent_mass_matrix(p).template cast<S>()));
  FieldStateT<S> out;
  out.mesh = state.mesh;
  out.order_p = state.order_p;
  out.time = state.time + cfg.dt;
  out.elems.resize(n_el);
  for (int k = 0; k < n_el; ++k) {
    Eigen::VectorX<S> rhs = -apply_advection_volume<S>(sh, nu, pred[k].values);
    for (int a = 0; a < d; ++a) {
      if (nu[a] == 0.0) continue;
      // Low face: upwind trace minus the element's own trace. The high-face
      // term vanishes identically for u >= 0 (the upwind value is the
      // element's own trace).
      Eigen::VectorX<S> jump = fetch_low_trace(mesh, tr[a], k, a, wrap_low) -
                               extract_trace(pred[k], a, Side::Low);
      add_face_penalty_rhs<S>(sh, a, Side::Low, nu[a], jump, rhs);
    }
    // Collapse the time test index: sum_b <psi l_b, X> = <psi, X> integrated
    // over the slab (partition of unity in time; exact for the degree-p
    // predictor integrand).
    Eigen::VectorX<S> delta(sh.n_space());
    for (int sp = 0; sp < sh.n_space(); ++sp) {
      S acc(0);
      for (int b = 0; b < nt; ++b) acc += rhs[sp * nt + b];
      delta[sp] = acc;
    }
    solve_consistent_mass(sh, mass_lu, delta);
    out.elems[k] = state.elems[k] + delta;
  }
  return {out, StageReport{2, 1}};
}

template std::pair<FieldStateT<double>, StageReport> step_lidg(
    const FieldStateT<double>&, const SchemeConfig&, OperatorCache&,
    const std::array<double, 3>&, StepCaptureT<double>*);
template std::pair<FieldStateT<std::complex<double>>, StageReport> step_lidg(
    const FieldStateT<std::complex<double>>&, const SchemeConfig&, OperatorCache&,
    const std::array<std::complex<double>, 3>&, StepCaptureT<std::complex<double>>*);
template std::pair<FieldStateT<double>, StageReport> step_ader(
    const FieldStateT<double>&, const SchemeConfig&, OperatorCache&,
    const std::array<double, 3>&);
template std::pair<FieldStateT<std::complex<double>>, StageReport> step_ader(
    const FieldStateT<std::complex<double>>&, const SchemeConfig&, OperatorCache&,
    const std::array<std::complex<double>, 3>&);

std::pair<FieldState, StageReport> step_lidg_1d(const FieldState& state,
                                                const SchemeConfig& cfg,
                                                OperatorCache& cache,
                                                StepCapture* capture) {
  if (cfg.dim != 1) throw std::invalid_argument("step_lidg_1d: config is not 1D");
  return step_lidg<double>(state, cfg, cache, {1, 1, 1}, capture);
}
std::pair<FieldState, StageReport> step_lidg_2d(const FieldState& state,
                                                const SchemeConfig& cfg,
                                                OperatorCache& cache) {
  if (cfg.dim != 2) throw std::invalid_argument("step_lidg_2d: config is not 2D");
  return step_lidg<double>(state, cfg, cache);
}
std::pair<FieldState, StageReport> step_lidg_3d(const FieldState& state,
                                                const SchemeConfig& cfg,
                                                OperatorCache& cache) {
  if (cfg.dim != 3) throw std::invalid_argument("step_lidg_3d: config is not 3D");
  return step_lidg<double>(state, cfg, cache);
}
FieldState step_ader_standard(const FieldState& state, const SchemeConfig& cfg,
                              OperatorCache& cache) {
  return step_ader<double>(state, cfg, cache).first;
}

Vec3 node_coords(const CartesianMesh& mesh, int p, int elem, int sp) {
  const auto& rule = gll_rule(p);
  const int n = p + 1;
  const std::array<int, 3> e = mesh.unflatten(elem);
  Vec3 x{0, 0, 0};
  std::array<int, 3> ix{0, 0, 0};
  for (int a = mesh.dim - 1; a >= 0; --a) {
    ix[a] = sp % n;
    sp /= n;
  }
  for (int a = 0; a < mesh.dim; ++a)
    x[a] = mesh.origin[a] +
           (e[a] + 0.5 * (rule.nodes[ix[a]] + 1.0)) * mesh.elem_sizes[a];
  return x;
}

FieldState project_initial_condition(const CartesianMesh& mesh, int p,
                                     const std::function<double(const Vec3&)>& ic) {
  FieldState state;
  state.mesh = &mesh;
  state.order_p = p;
  state.time = 0.0;
  const StShape sh{p, mesh.dim};
  state.elems.resize(mesh.total_elems());
  for (int k = 0; k < mesh.total_elems(); ++k) {
    state.elems[k].resize(sh.n_space());
    for (int sp = 0; sp < sh.n_space(); ++sp)
      state.elems[k][sp] = ic(node_coords(mesh, p, k, sp));
  }
  return state;
}

namespace {

double reduce_integral(const FieldState& state, bool squared) {
  const CartesianMesh& mesh = *state.mesh;
  const auto& rule = gll_rule(state.order_p);
  const int n = state.order_p + 1;
  double cell = 1.0;
  for (int a = 0; a < mesh.dim; ++a) cell *= 0.5 * mesh.elem_sizes[a];
  double total = 0.0;
  for (const auto& q : state.elems) {
    double acc = 0.0;
    for (int sp = 0; sp < q.size(); ++sp) {
      double w = 1.0;
      int rem = sp;
      for (int a = mesh.dim - 1; a >= 0; --a) {
        w *= rule.weights[rem % n];
        rem /= n;
      }
      acc += w * (squared ? 0.5 * q[sp] * q[sp] : q[sp]);
    }
    total += cell * acc;
  }
  return total;
}

}  // namespace

double total_mass(const FieldState& state) { return reduce_integral(state, false); }
double total_energy(const FieldState& state) { return reduce_integral(state, true); }

RunResult run(const CartesianMesh& mesh, const SchemeConfig& cfg,
              const std::function<double(const Vec3&)>& initial_condition,
              SchemeChoice scheme) {
  if (!(cfg.t_final > 0.0)) throw std::invalid_argument("run: t_final must be > 0");
  OperatorCache cache;
  FieldState state = project_initial_condition(mesh, cfg.order_p, initial_condition);
  double init_max = 0.0;
  for (const auto& e : state.elems)
    init_max = std::max(init_max, e.cwiseAbs().maxCoeff());
  const double blowup = 1e6 * std::max(init_max, 1e-300);

  int steps = 0;
  double t = 0.0;
  while (cfg.t_final - t > 1e-12 * cfg.dt) {
    const double remaining = cfg.t_final - t;
    const double dt_step = (remaining < cfg.dt * (1.0 + 1e-9)) ? remaining : cfg.dt;
    SchemeConfig step_cfg = cfg;
    if (dt_step != cfg.dt) {
      step_cfg.dt = dt_step;
      for (int a = 0; a < cfg.dim; ++a)
        step_cfg.cfl_vector[a] = cfg.velocity[a] * dt_step / mesh.elem_sizes[a];
    }
    state = (scheme == SchemeChoice::Lidg)
                ? step_lidg<double>(state, step_cfg, cache).first
                : step_ader<double>(state, step_cfg, cache).first;
    ++steps;
    t += dt_step;
    double cur_max = 0.0;
    for (const auto& e : state.elems)
      cur_max = std::max(cur_max, e.cwiseAbs().maxCoeff());
    if (!(cur_max <= blowup))
      throw std::runtime_error("run: instability detected at step " +
                               std::to_string(steps) + " (max |q| = " +
                               std::to_string(cur_max) + ")");
  }
  state.time = cfg.t_final;
  return RunResult{std::move(state), steps};
}

}  // namespace lidg
