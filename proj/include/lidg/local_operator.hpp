#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "lidg/basis.hpp"
#include "lidg/mesh.hpp"

namespace lidg {

using Vec3 = std::array<double, 3>;

/// Shape of an element-local space-time tensor: dim spatial axes of extent
/// p+1 plus a trailing time axis of extent p+1. Flat storage is row-major
/// with time fastest: flat = ((i_0*n + i_1)*n + ...)*n + i_t.
struct StShape {
  int p = 0;
  int dim = 1;

  int n() const { return p + 1; }
  int n_space() const {
    int s = 1;
    for (int a = 0; a < dim; ++a) s *= n();
    return s;
  }
  int size() const { return n_space() * n(); }
  /// Stride of spatial axis a in the flat layout (time has stride 1).
  int space_stride(int axis) const {
    int s = n();
    for (int a = axis + 1; a < dim; ++a) s *= n();
    return s;
  }
  /// Flat index of a pure-spatial tensor (time axis removed); matches the
  /// layout of per-element state vectors and time slices.
  int spatial_stride(int axis) const {
    int s = 1;
    for (int a = axis + 1; a < dim; ++a) s *= n();
    return s;
  }
};

/// Upwind trace data for one penalized space-time face: nodal values over
/// the face's (d-1 spatial) x time coordinates, laid out like the element
/// tensor with the face axis removed (time fastest).
template <typename S>
struct FacePenaltyT {
  int axis = 0;
  Side side = Side::Low;
  Eigen::VectorX<S> trace_values;  // (p+1)^d values
};
using FacePenalty = FacePenaltyT<double>;

/// Element-local space-time solution coefficients.
template <typename S>
struct ElementSolutionT {
  int order_p = 0;
  int dim = 1;
  Eigen::VectorX<S> values;  // (p+1)^(dim+1), time fastest

  StShape shape() const { return StShape{order_p, dim}; }
};
using ElementSolution = ElementSolutionT<double>;

inline uint32_t face_bit(int axis, Side side) {
  return 1u << (2 * axis + (side == Side::High ? 1 : 0));
}

/// The assembled element-local operator: volume terms, temporal upwind jump,
/// and the implicit (-q) part of each penalized face flux. The known-trace
/// part of a penalty enters through the right-hand side only.
struct LocalOperator {
  int order_p = 0;
  int dim = 1;
  Vec3 nu{0, 0, 0};
  uint32_t penalized_faces = 0;  // bitmask via face_bit()
  Eigen::MatrixXd matrix;
  Eigen::PartialPivLU<Eigen::MatrixXd> factorization;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    return factorization.solve(rhs);
  }
  /// The operator is real; complex systems split into two real solves.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const {
    Eigen::VectorXcd out(rhs.size());
    out.real() = factorization.solve(Eigen::VectorXd(rhs.real()));
    out.imag() = factorization.solve(Eigen::VectorXd(rhs.imag()));
    return out;
  }
};

/// Assemble the reference-coordinate space-time operator for one element:
///   <phi, dq/dtau> + sum_a nu_a <phi, dq/dxi_a> + <phi, q>|_{tau=-1}
///   - sum_{penalized faces f} sign_f nu_axis(f) <phi, q>|_f
/// with sign = +1 on high faces, -1 on low faces (outward flux orientation).
/// Throws std::runtime_error with (p, nu) context if the matrix is singular.
LocalOperator assemble_G(int p, int d, const Vec3& nu, uint32_t penalized_faces);

/// Cache of factorized operators keyed by (p, d, nu, penalized faces).
class OperatorCache {
 public:
  const LocalOperator& get(int p, int d, const Vec3& nu, uint32_t penalized_faces);

 private:
  struct Key {
    int p;
    int d;
    uint32_t mask;
    Vec3 nu;
    bool operator<(const Key& o) const;
  };
  std::map<Key, std::unique_ptr<const LocalOperator>> cache_;
};

// ---- tensor-algebra helpers shared by all stages --------------------------

/// RHS of the temporal upwind jump: b_I = Wspace(ix) * l_{it}(-1) * prev[ix].
template <typename S>
Eigen::VectorX<S> temporal_rhs(const StShape& sh, const Eigen::VectorX<S>& prev_slice) {
  const auto& rule = gll_rule(sh.p);
  const auto& ops = lagrange_ops(sh.p);
  const int n = sh.n();
  Eigen::VectorX<S> b = Eigen::VectorX<S>::Zero(sh.size());
  for (int sp = 0; sp < sh.n_space(); ++sp) {
    double wsp = 1.0;
    int rem = sp;
    for (int a = sh.dim - 1; a >= 0; --a) {
      wsp *= rule.weights[rem % n];
      rem /= n;
    }
    for (int it = 0; it < n; ++it)
      b[sp * n + it] = wsp * ops.left_trace[it] * prev_slice[sp];
  }
  return b;
}

/// Add the known-trace part of one face penalty to the right-hand side:
///   b_I += -sign * nu_a * Wother(ix) * w_it * tr_s[i_a] * g[face index].
template <typename S>
void add_face_penalty_rhs(const StShape& sh, int axis, Side side, double nu_a,
                          const Eigen::VectorX<S>& trace_values, Eigen::VectorX<S>& b) {
  const auto& rule = gll_rule(sh.p);
  const auto& ops = lagrange_ops(sh.p);
  const int n = sh.n();
  const double sign = (side == Side::High) ? 1.0 : -1.0;
  const Eigen::VectorXd& tr =
      (side == Side::High) ? ops.right_trace : ops.left_trace;
  const int stride = sh.space_stride(axis);
  // Iterate the face (element tensor with `axis` removed, time fastest).
  const int face_size = sh.size() / n;
  for (int f = 0; f < face_size; ++f) {
    // Decompose f into (outer, inner): outer spans axes before `axis`,
    // inner spans axes after it plus time.
    const int inner = f % stride;
    const int outer = f / stride;
    // Weight product over the remaining spatial axes and w_t for time.
    double w = 1.0;
    {
      int rem = f;
      const int it = rem % n;
      rem /= n;
      w *= rule.weights[it];
      for (int a = sh.dim - 1; a >= 0; --a) {
        if (a == axis) continue;
        w *= rule.weights[rem % n];
        rem /= n;
      }
    }
    const S load = -sign * nu_a * w * trace_values[f];
    const int base = outer * (stride * n) + inner;
    for (int ia = 0; ia < n; ++ia)
      if (tr[ia] != 0.0) b[base + ia * stride] += load * tr[ia];
  }
}

/// Weighted advection volume term: out_I = Wspace * w_t * sum_a nu_a (D_a q)_I.
template <typename S>
Eigen::VectorX<S> apply_advection_volume(const StShape& sh, const Vec3& nu,
                                         const Eigen::VectorX<S>& q) {
  const auto& rule = gll_rule(sh.p);
  const auto& ops = lagrange_ops(sh.p);
  const int n = sh.n();
  Eigen::VectorX<S> out = Eigen::VectorX<S>::Zero(sh.size());
  for (int I = 0; I < sh.size(); ++I) {
    // Decode spatial indices and the full quadrature weight at I.
    int rem = I / n;
    double w = rule.weights[I % n];
    std::array<int, 3> ix{0, 0, 0};
    for (int a = sh.dim - 1; a >= 0; --a) {
      ix[a] = rem % n;
      w *= rule.weights[ix[a]];
      rem /= n;
    }
    S acc = S(0);
    for (int a = 0; a < sh.dim; ++a) {
      if (nu[a] == 0.0) continue;
      const int stride = sh.space_stride(a);
      const int base = I - ix[a] * stride;
      S da = S(0);
      for (int j = 0; j < n; ++j) da += ops.diff_matrix(ix[a], j) * q[base + j * stride];
      acc += nu[a] * da;
    }
    out[I] = w * acc;
  }
  return out;
}

/// Trace of a space-time tensor on a spatial face: (p+1)^d values laid out
/// with the face axis removed, time fastest. Collocation read-off for p >= 1.
template <typename S>
Eigen::VectorX<S> extract_face(const StShape& sh, const Eigen::VectorX<S>& values,
                               int axis, Side side) {
  const auto& ops = lagrange_ops(sh.p);
  const Eigen::VectorXd& tr =
      (side == Side::High) ? ops.right_trace : ops.left_trace;
  const int n = sh.n();
  const int stride = sh.space_stride(axis);
  const int face_size = sh.size() / n;
  Eigen::VectorX<S> out(face_size);
  for (int f = 0; f < face_size; ++f) {
    const int inner = f % stride;
    const int outer = f / stride;
    const int base = outer * (stride * n) + inner;
    S acc = S(0);
    for (int ia = 0; ia < n; ++ia)
      if (tr[ia] != 0.0) acc += tr[ia] * values[base + ia * stride];
    out[f] = acc;
  }
  return out;
}

/// Spatial slice of a space-time tensor at tau = -1 (Low) or +1 (High).
template <typename S>
Eigen::VectorX<S> extract_time_slice(const StShape& sh, const Eigen::VectorX<S>& values,
                                     Side side) {
  const auto& ops = lagrange_ops(sh.p);
  const Eigen::VectorXd& tr =
      (side == Side::High) ? ops.right_trace : ops.left_trace;
  const int n = sh.n();
  Eigen::VectorX<S> out(sh.n_space());
  for (int sp = 0; sp < sh.n_space(); ++sp) {
    S acc = S(0);
    for (int it = 0; it < n; ++it)
      if (tr[it] != 0.0) acc += tr[it] * values[sp * n + it];
    out[sp] = acc;
  }
  return out;
}

/// Convenience overloads working on ElementSolution.
template <typename S>
Eigen::VectorX<S> extract_trace(const ElementSolutionT<S>& sol, int axis, Side side) {
  return extract_face<S>(sol.shape(), sol.values, axis, side);
}
template <typename S>
Eigen::VectorX<S> extract_time_slice(const ElementSolutionT<S>& sol, Side side) {
  return extract_time_slice<S>(sol.shape(), sol.values, side);
}

// ---- local solves ----------------------------------------------------------

/// Free (no-penalty) predictor: solve G{q} = 0 given the previous end slice.
/// The result's tau=-1 slice reproduces prev_end_slice (predictor recovers
/// the previous solution exactly, discretely to solver precision).
template <typename S>
ElementSolutionT<S> predictor_free(const LocalOperator& op,
                                   const Eigen::VectorX<S>& prev_end_slice);

/// Face-penalized local solve with given upwind traces.
/// The operator's penalized-face set must match the penalties exactly.
template <typename S>
ElementSolutionT<S> solve_penalized(const LocalOperator& op,
                                    const Eigen::VectorX<S>& prev_end_slice,
                                    const std::vector<FacePenaltyT<S>>& penalties);

struct PicardResult {
  ElementSolution solution;
  int iterations = 0;
  double last_update = 0.0;
};

/// Fixed-point iteration that moves the advection volume term to the
/// right-hand side and repeatedly inverts the time-only operator. The
/// provider returns the weighted explicit terms <phi, u . grad q> for the
/// current iterate; pass nullptr for linear advection with the given nu.
/// Iterates are Anderson-mixed (depth 3) to tighten the contraction; the
/// reported count is the number of accepted iterates, each costing one
/// implicit solve (plus one final confirming solve). Throws a divergence
/// error carrying the last update norm if max_iters is exhausted.
PicardResult picard_iterate(
    int p, int d, const Vec3& nu, const Eigen::VectorXd& prev_end_slice,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& volume_rhs_provider,
    int max_iters = -1, double tol = 1e-12);

/// Same iteration with a caller-supplied (cached) time-only operator and a
/// mandatory provider for all explicit terms; used by the nonlinear stages.
/// `initial_guess` warm-starts the iteration (e.g. with an already-computed
/// predictor); by default the previous slice is replicated in time.
PicardResult picard_iterate_with_op(
    const LocalOperator& time_op, const Eigen::VectorXd& prev_end_slice,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& explicit_terms,
    int max_iters, double tol, const Eigen::VectorXd* initial_guess = nullptr);

}  // namespace lidg
