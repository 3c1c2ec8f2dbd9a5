#include "lidg/local_operator.hpp"

#include <bit>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace lidg {

namespace {

std::string nu_to_string(const Vec3& nu, int d) {
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < d; ++a) os << (a ? "," : "") << nu[a];
  os << ")";
  return os.str();
}

}  // namespace

LocalOperator assemble_G(int p, int d, const Vec3& nu, uint32_t penalized_faces) {
  if (d < 1 || d > 3) throw std::invalid_argument("assemble_G: dim must be 1, 2 or 3");
  for (int a = 0; a < d; ++a)
    if (nu[a] < 0.0)
      throw std::invalid_argument("assemble_G: nu components must be nonnegative");
  const StShape sh{p, d};
  const auto& rule = gll_rule(p);
  const auto& ops = lagrange_ops(p);
  const int n = sh.n();
  const int N = sh.size();

  LocalOperator op;
  op.order_p = p;
  op.dim = d;
  op.nu = nu;
  op.penalized_faces = penalized_faces;
  op.matrix = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd& A = op.matrix;

  for (int I = 0; I < N; ++I) {
    const int it = I % n;
    std::array<int, 3> ix{0, 0, 0};
    double wsp = 1.0;
    {
      int rem = I / n;
      for (int a = d - 1; a >= 0; --a) {
        ix[a] = rem % n;
        wsp *= rule.weights[ix[a]];
        rem /= n;
      }
    }
    const double wt = rule.weights[it];

    // Volume term <phi_I, dq/dtau>: couples time indices at fixed space.
    for (int jt = 0; jt < n; ++jt)
      A(I, I - it + jt) += wsp * wt * ops.diff_matrix(it, jt);

    // Volume terms nu_a <phi_I, dq/dxi_a>: couple along one spatial axis.
    for (int a = 0; a < d; ++a) {
      if (nu[a] == 0.0) continue;
      const int stride = sh.space_stride(a);
      const int base = I - ix[a] * stride;
      for (int ja = 0; ja < n; ++ja)
        A(I, base + ja * stride) += nu[a] * wsp * wt * ops.diff_matrix(ix[a], ja);
    }

    // Temporal upwind jump <phi_I, q>|_{tau=-1} (the q-part of the jump;
    // the previous solution enters through the right-hand side).
    if (ops.left_trace[it] != 0.0)
      for (int jt = 0; jt < n; ++jt)
        A(I, I - it + jt) += wsp * ops.left_trace[it] * ops.left_trace[jt];

    // Implicit part of each penalized face flux: -sign * nu_a <phi_I, q>|_f.
    for (int a = 0; a < d; ++a) {
      const int stride = sh.space_stride(a);
      const int base = I - ix[a] * stride;
      const double wother = wsp / rule.weights[ix[a]];
      for (Side side : {Side::Low, Side::High}) {
        if (!(penalized_faces & face_bit(a, side))) continue;
        const double sign = (side == Side::High) ? 1.0 : -1.0;
        const Eigen::VectorXd& tr =
            (side == Side::High) ? ops.right_trace : ops.left_trace;
        if (tr[ix[a]] == 0.0) continue;
        const double coeff = -sign * nu[a] * wother * wt * tr[ix[a]];
        for (int ja = 0; ja < n; ++ja)
          if (tr[ja] != 0.0) A(I, base + ja * stride) += coeff * tr[ja];
      }
    }
  }

  op.factorization.compute(A);
  // PartialPivLU has no rank query; inspect the U diagonal for a collapse.
  const Eigen::VectorXd diag = op.factorization.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() <= 1e-14 * std::max(1.0, diag.maxCoeff())) {
    throw std::runtime_error("assemble_G: singular local operator for p=" +
                             std::to_string(p) + ", d=" + std::to_string(d) +
                             ", nu=" + nu_to_string(nu, d));
  }
  return op;
}

bool OperatorCache::Key::operator<(const Key& o) const {
  return std::tie(p, d, mask, nu) < std::tie(o.p, o.d, o.mask, o.nu);
}

const LocalOperator& OperatorCache::get(int p, int d, const Vec3& nu,
                                        uint32_t penalized_faces) {
  Vec3 nu_key{0, 0, 0};
  for (int a = 0; a < d; ++a) nu_key[a] = nu[a];
  Key key{p, d, penalized_faces, nu_key};
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_
             .emplace(key, std::make_unique<const LocalOperator>(
                               assemble_G(p, d, nu_key, penalized_faces)))
             .first;
  }
  return *it->second;
}

template <typename S>
ElementSolutionT<S> predictor_free(const LocalOperator& op,
                                   const Eigen::VectorX<S>& prev_end_slice) {
  if (op.penalized_faces != 0)
    throw std::invalid_argument("predictor_free: operator has penalized faces");
  const StShape sh{op.order_p, op.dim};
  ElementSolutionT<S> sol{op.order_p, op.dim, {}};
  sol.values = op.solve(temporal_rhs<S>(sh, prev_end_slice));
  return sol;
}

template <typename S>
ElementSolutionT<S> solve_penalized(const LocalOperator& op,
                                    const Eigen::VectorX<S>& prev_end_slice,
                                    const std::vector<FacePenaltyT<S>>& penalties) {
  uint32_t mask = 0;
  for (const auto& pen : penalties) mask |= face_bit(pen.axis, pen.side);
  if (mask != op.penalized_faces || penalties.size() != size_t(std::popcount(mask)))
    throw std::invalid_argument(
        "solve_penalized: penalties do not match the operator's penalized faces");
  const StShape sh{op.order_p, op.dim};
  Eigen::VectorX<S> rhs = temporal_rhs<S>(sh, prev_end_slice);
  for (const auto& pen : penalties)
    add_face_penalty_rhs<S>(sh, pen.axis, pen.side, op.nu[pen.axis], pen.trace_values,
                            rhs);
  ElementSolutionT<S> sol{op.order_p, op.dim, {}};
  sol.values = op.solve(rhs);
  return sol;
}

template ElementSolutionT<double> predictor_free(const LocalOperator&,
                                                 const Eigen::VectorXd&);
template ElementSolutionT<std::complex<double>> predictor_free(
    const LocalOperator&, const Eigen::VectorXcd&);
template ElementSolutionT<double> solve_penalized(
    const LocalOperator&, const Eigen::VectorXd&, const std::vector<FacePenalty>&);
template ElementSolutionT<std::complex<double>> solve_penalized(
    const LocalOperator&, const Eigen::VectorXcd&,
    const std::vector<FacePenaltyT<std::complex<double>>>&);

PicardResult picard_iterate_with_op(
    const LocalOperator& time_op, const Eigen::VectorXd& prev_end_slice,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& explicit_terms,
    int max_iters, double tol, const Eigen::VectorXd* initial_guess) {
  if (!(tol > 0.0)) throw std::invalid_argument("picard_iterate: tol must be > 0");
  const StShape sh{time_op.order_p, time_op.dim};
  const Eigen::VectorXd b = temporal_rhs<double>(sh, prev_end_slice);

  // Initial iterate: previous slice replicated in time, unless warm-started.
  Eigen::VectorXd q(sh.size());
  if (initial_guess) {
    q = *initial_guess;
  } else {
    for (int sp = 0; sp < sh.n_space(); ++sp)
      q.segment(sp * sh.n(), sh.n()).setConstant(prev_end_slice[sp]);
  }

  // Anderson-accelerated fixed point: each evaluation is the plain update
  // g(q) = T^{-1}(b - explicit(q)); the next iterate mixes the last few
  // residual differences by least squares (depth 3). The first step is the
  // plain iteration, and a rank-deficient history falls back to it as well.
  constexpr int kDepth = 3;
  std::deque<Eigen::VectorXd> dq_hist, df_hist;
  Eigen::VectorXd gq = time_op.solve(Eigen::VectorXd(b - explicit_terms(q)));
  Eigen::VectorXd f = gq - q;
  double update = 0.0;
  for (int iter = 1; iter <= max_iters; ++iter) {
    Eigen::VectorXd next;
    if (df_hist.empty()) {
      next = gq;
    } else {
      const int m = static_cast<int>(df_hist.size());
      Eigen::MatrixXd df(f.size(), m);
      for (int c = 0; c < m; ++c) df.col(c) = df_hist[c];
      const Eigen::VectorXd gamma = df.colPivHouseholderQr().solve(f);
      next = gq;
      for (int c = 0; c < m; ++c) next -= gamma[c] * (dq_hist[c] + df_hist[c]);
    }
    update = (next - q).lpNorm<Eigen::Infinity>();
    if (update <= tol)
      return PicardResult{
          ElementSolution{time_op.order_p, time_op.dim, std::move(next)}, iter,
          update};
    Eigen::VectorXd gnext = time_op.solve(Eigen::VectorXd(b - explicit_terms(next)));
    Eigen::VectorXd fnext = gnext - next;
    dq_hist.push_back(next - q);
    df_hist.push_back(fnext - f);
    if (static_cast<int>(dq_hist.size()) > kDepth) {
      dq_hist.pop_front();
      df_hist.pop_front();
    }
    q = std::move(next);
    gq = std::move(gnext);
    f = std::move(fnext);
  }
  throw std::runtime_error(
      "picard_iterate: no convergence after " + std::to_string(max_iters) +
      " iterations (last update " + std::to_string(update) + ")");
}

PicardResult picard_iterate(
    int p, int d, const Vec3& nu, const Eigen::VectorXd& prev_end_slice,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& volume_rhs_provider,
    int max_iters, double tol) {
  if (max_iters < 0) max_iters = 2 * (p + 2);
  const StShape sh{p, d};
  const LocalOperator time_op = assemble_G(p, d, Vec3{0, 0, 0}, 0);
  auto provider = volume_rhs_provider
                      ? volume_rhs_provider
                      : std::function<Eigen::VectorXd(const Eigen::VectorXd&)>(
                            [sh, nu](const Eigen::VectorXd& q) {
                              return apply_advection_volume<double>(sh, nu, q);
                            });
  return picard_iterate_with_op(time_op, prev_end_slice, provider, max_iters, tol);
}

}  // namespace lidg
