#include "lidg/stability.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace lidg {

StabilityMatrices build_stability_matrices(int p, double nu) {
  if (!(nu > 0.0))
    throw std::invalid_argument("build_stability_matrices: nu must be > 0");
  const auto& rule = gll_rule(p);
  const auto& ops = lagrange_ops(p);
  const int n = p + 1;
  const uint32_t both = face_bit(0, Side::Low) | face_bit(0, Side::High);

  StabilityMatrices sm;
  sm.order_p = p;
  sm.nu = nu;
  // M is exactly the 1D corrector operator (both faces penalized).
  sm.M = assemble_G(p, 1, Vec3{nu, 0, 0}, both).matrix;

  // L_(ix,it),j = nu * l_ix(-1) * <l_it, l_j>_{T} = nu * l_ix(-1) * w_it d_itj
  // (GLL collocation makes the temporal face mass diagonal).
  sm.L = Eigen::MatrixXd::Zero(n * n, n);
  for (int ix = 0; ix < n; ++ix) {
    if (ops.left_trace[ix] == 0.0) continue;
    for (int it = 0; it < n; ++it)
      sm.L(ix * n + it, it) = nu * ops.left_trace[ix] * rule.weights[it];
  }

  // S_i,(jx,jt) = phi_j(xi_i, tau=1) = d_jx,i * l_jt(+1): the tau=+1 slice.
  sm.S = Eigen::MatrixXd::Zero(n, n * n);
  for (int i = 0; i < n; ++i)
    for (int jt = 0; jt < n; ++jt)
      if (ops.right_trace[jt] != 0.0) sm.S(i, i * n + jt) = ops.right_trace[jt];

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sm.M);
  const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() <= 1e-14 * std::max(1.0, diag.maxCoeff()))
    throw std::runtime_error("build_stability_matrices: singular M for p=" +
                             std::to_string(p) + ", nu=" + std::to_string(nu));
  sm.A = (1.0 / nu) * sm.S * lu.solve(sm.L);
  return sm;
}

double weighted_norm(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& weights) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != weights.size())
    throw std::invalid_argument("weighted_norm: dimension mismatch");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("weighted_norm: weights must be positive");
  const Eigen::VectorXd sqw = weights.cwiseSqrt();
  const Eigen::MatrixXd scaled =
      sqw.asDiagonal() * matrix * sqw.cwiseInverse().asDiagonal();
  return spectral_norm(scaled);
}

double spectral_norm(const Eigen::MatrixXd& matrix) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  return svd.singularValues().maxCoeff();
}

double spectral_radius(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> eig(matrix, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<ElementSolution, Eigen::VectorXd> psi_from_jump(const StabilityMatrices& sm,
                                                          const Eigen::VectorXd& beta) {
  const int n = sm.order_p + 1;
  if (beta.size() != n) throw std::invalid_argument("psi_from_jump: beta size mismatch");
  const Eigen::VectorXd psi = sm.M.partialPivLu().solve(sm.L * beta);
  const Eigen::VectorXd gamma = sm.S * psi;
  const double err = (gamma - sm.nu * sm.A * beta).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, beta.lpNorm<Eigen::Infinity>());
  if (err > 1e-12 * scale)
    throw std::runtime_error("psi_from_jump: gamma = nu*A*beta check failed (err " +
                             std::to_string(err) + ")");
  return {ElementSolution{sm.order_p, 1, psi}, gamma};
}

EnergyReport energy_identity_check(const FieldState& state, const SchemeConfig& cfg) {
  if (cfg.dim != 1)
    throw std::invalid_argument("energy_identity_check: 1D scheme only");
  const CartesianMesh& mesh = *state.mesh;
  const auto& rule = gll_rule(cfg.order_p);
  const int n_el = mesh.total_elems();
  const double nu = cfg.cfl_vector[0];

  OperatorCache cache;
  StepCapture cap;
  const FieldState next = step_lidg_1d(state, cfg, cache, &cap).first;

  // All terms in reference units (the common dx/2 factor cancels in Eq-form).
  EnergyReport rep;
  for (int k = 0; k < n_el; ++k) {
    for (int i = 0; i <= cfg.order_p; ++i) {
      const double w = rule.weights[i];
      rep.delta_E += 0.5 * w *
                     (next.elems[k][i] * next.elems[k][i] -
                      state.elems[k][i] * state.elems[k][i]);
    }
    // gamma_k: corrector minus predictor at tau = +1.
    const Eigen::VectorXd gamma = extract_time_slice(cap.correctors[k], Side::High) -
                                  extract_time_slice(cap.predictors[k], Side::High);
    for (int i = 0; i <= cfg.order_p; ++i)
      rep.rhs_psi_term += 0.5 * rule.weights[i] * gamma[i] * gamma[i];
    // beta_k: interface jump at x_k over the time face.
    const int km = neighbor(mesh, k, 0, Side::Low);
    const Eigen::VectorXd beta = extract_trace(cap.predictors[km], 0, Side::High) -
                                 extract_trace(cap.predictors[k], 0, Side::Low);
    for (int i = 0; i <= cfg.order_p; ++i)
      rep.rhs_jump_term += 0.5 * nu * rule.weights[i] * beta[i] * beta[i];
  }
  rep.identity_residual =
      std::abs(rep.delta_E - (rep.rhs_psi_term - rep.rhs_jump_term));
  return rep;
}

namespace {

AmplificationSample amplification_with_cache(SchemeChoice scheme, int p, int d,
                                             const Vec3& nu,
                                             const std::array<double, 3>& theta,
                                             const CartesianMesh& unit_mesh,
                                             OperatorCache& cache) {
  using C = std::complex<double>;
  SchemeConfig cfg;
  cfg.order_p = p;
  cfg.dim = d;
  cfg.dt = 1.0;
  cfg.cfl_vector = nu;

  std::array<C, 3> wrap{C(1), C(1), C(1)};
  for (int a = 0; a < d; ++a) wrap[a] = std::exp(C(0, -theta[a]));

  const StShape sh{p, d};
  const int m = sh.n_space();
  AmplificationSample sample;
  sample.theta = theta;
  sample.matrix.resize(m, m);

  FieldStateT<C> mode;
  mode.mesh = &unit_mesh;
  mode.order_p = p;
  mode.elems.resize(1);
  for (int j = 0; j < m; ++j) {
    mode.elems[0] = Eigen::VectorXcd::Zero(m);
    mode.elems[0][j] = C(1);
    const auto stepped = (scheme == SchemeChoice::Lidg)
                             ? step_lidg<C>(mode, cfg, cache, wrap)
                             : step_ader<C>(mode, cfg, cache, wrap);
    sample.matrix.col(j) = stepped.first.elems[0];
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(sample.matrix, false);
  sample.spectral_radius = eig.eigenvalues().cwiseAbs().maxCoeff();
  return sample;
}

CartesianMesh make_unit_mesh(int d) {
  return build_mesh(d, {1, 1, 1}, {1.0, 1.0, 1.0});
}

}  // namespace

AmplificationSample amplification_matrix(SchemeChoice scheme, int p, int d,
                                         const Vec3& nu,
                                         const std::array<double, 3>& theta) {
  const CartesianMesh mesh = make_unit_mesh(d);
  OperatorCache cache;
  return amplification_with_cache(scheme, p, d, nu, theta, mesh, cache);
}

double scan_max_radius(SchemeChoice scheme, int p, int d, const Vec3& nu,
                       int samples_per_axis) {
  if (samples_per_axis < 2)
    throw std::invalid_argument("scan_max_radius: need >= 2 samples per axis");
  const CartesianMesh mesh = make_unit_mesh(d);
  OperatorCache cache;
  int total = 1;
  for (int a = 0; a < d; ++a) total *= samples_per_axis;
  double max_radius = 0.0;
  for (int flat = 0; flat < total; ++flat) {
    std::array<double, 3> theta{0, 0, 0};
    int rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      theta[a] = 2.0 * M_PI * (rem % samples_per_axis) / samples_per_axis;
      rem /= samples_per_axis;
    }
    const auto s = amplification_with_cache(scheme, p, d, nu, theta, mesh, cache);
    max_radius = std::max(max_radius, s.spectral_radius);
  }
  return max_radius;
}

double max_stable_cfl(SchemeChoice scheme, int p, int d, const Vec3& direction,
                      double tol, int samples_per_axis) {
  if (!(tol > 0.0)) throw std::invalid_argument("max_stable_cfl: tol must be > 0");
  double dnorm = 0.0;
  for (int a = 0; a < d; ++a) dnorm += direction[a] * direction[a];
  dnorm = std::sqrt(dnorm);
  if (!(dnorm > 0.0))
    throw std::invalid_argument("max_stable_cfl: zero direction");

  auto stable = [&](double s) {
    Vec3 nu{0, 0, 0};
    for (int a = 0; a < d; ++a) nu[a] = s * direction[a] / dnorm;
    return scan_max_radius(scheme, p, d, nu, samples_per_axis) <= 1.0 + 1e-9;
  };

  // Grow a bracket [lo stable, hi unstable], then bisect.
  double lo = 0.0, hi = 0.02;
  while (stable(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 4.0)
      throw std::runtime_error("max_stable_cfl: no instability found below CFL 4");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<MonotonicityViolation> check_radius_monotonicity(
    SchemeChoice scheme, int p, int d, const std::vector<double>& cfl_norms,
    int samples_per_axis) {
  std::vector<MonotonicityViolation> violations;
  double prev_cfl = 0.0, prev_radius = -1.0;
  const double sqrt_d = std::sqrt(double(d));
  bool first = true;
  for (double cfl : cfl_norms) {
    Vec3 nu{0, 0, 0};
    for (int a = 0; a < d; ++a) nu[a] = cfl / sqrt_d;
    const double r = scan_max_radius(scheme, p, d, nu, samples_per_axis);
    // Tolerate roundoff-level wiggles at the marginal radius-1 plateau.
    if (!first && r < prev_radius - 1e-9)
      violations.push_back({prev_cfl, cfl, prev_radius, r});
    prev_cfl = cfl;
    prev_radius = r;
    first = false;
  }
  return violations;
}

}  // namespace lidg
