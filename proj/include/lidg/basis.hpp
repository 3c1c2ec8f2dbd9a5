#pragma once

#include <Eigen/Dense>

namespace lidg {

/// One-dimensional Gauss-Lobatto-Legendre quadrature rule on [-1,1].
/// Nodes include both endpoints (for p >= 1), so nodal traces are exact
/// read-offs and the collocated mass matrix is diagonal.
struct QuadratureRule1D {
  int order_p = 0;          // polynomial degree; p+1 nodes
  Eigen::VectorXd nodes;    // strictly increasing, symmetric about 0
  Eigen::VectorXd weights;  // positive, sum to 2
};

/// Collocated Lagrange operators on the GLL nodes of a rule.
/// diff_matrix D has entries D_ij = l_j'(x_i); together with W = diag(weights)
/// it satisfies the summation-by-parts identity
///   W*D + (W*D)^T = diag(-1, 0, ..., 0, +1)   (p >= 1).
struct LagrangeOps1D {
  Eigen::MatrixXd diff_matrix;
  Eigen::VectorXd left_trace;   // l_j(-1)
  Eigen::VectorXd right_trace;  // l_j(+1)
};

/// GLL rule of degree p (0 <= p <= 14). p=0 degenerates to the midpoint rule
/// (single node 0, weight 2). Cached; the reference is valid for the program
/// lifetime. Throws std::invalid_argument for unsupported p.
const QuadratureRule1D& gll_rule(int p);

/// Lagrange operators for an arbitrary rule (pure computation).
LagrangeOps1D lagrange_ops(const QuadratureRule1D& rule);

/// Cached Lagrange operators for the cached GLL rule of degree p.
const LagrangeOps1D& lagrange_ops(int p);

/// Evaluate the interpolating polynomial of the nodal values at x in [-1,1].
/// Throws std::domain_error if x lies outside the reference interval
/// (a 1e-12 slack absorbs roundoff of mapped physical coordinates).
double interpolate(const QuadratureRule1D& rule, const Eigen::VectorXd& nodal_values,
                   double x);

/// Gauss-Legendre rule with n_points >= 1 nodes (exact to degree 2n-1).
/// Used where GLL quadrature would under-integrate: error measurement and
/// the consistent mass matrix below.
QuadratureRule1D gauss_legendre_rule(int n_points);

/// Consistent (exact) mass matrix of the degree-p GLL Lagrange basis,
/// M_ij = int_{-1}^{1} l_i l_j dxi, assembled with a Gauss-Legendre rule
/// that integrates the degree-2p integrand exactly. Differs from the
/// collocated diagonal mass diag(weights) for p >= 1, where GLL quadrature
/// is exact only to degree 2p-1. Symmetric positive definite.
Eigen::MatrixXd consistent_mass_matrix(int p);

}  // namespace lidg
