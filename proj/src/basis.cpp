#include "lidg/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidg {

namespace {

constexpr int kMaxOrder = 14;

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& pn, double& dpn) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    pn = 1.0;
    dpn = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  pn = p1;
  // P_n' from the standard relation; endpoints use the closed form
  // P_n'(+-1) = (+-1)^(n-1) n(n+1)/2.
  if (std::abs(1.0 - x * x) < 1e-14) {
    dpn = (x > 0 ? 1.0 : ((n % 2 == 0) ? -1.0 : 1.0)) * n * (n + 1) / 2.0;
  } else {
    dpn = n * (p0 - x * p1) / (1.0 - x * x);
  }
}

// Interior GLL nodes are the roots of P_p'; Newton with Chebyshev initial
// guesses (extrema of T_p interlace well). Tolerance 1e-15, max 100 iters.
double gll_interior_node(int p, int k) {
  double x = -std::cos(M_PI * k / p);
  for (int it = 0; it < 100; ++it) {
    double pn, dpn;
    legendre(p, x, pn, dpn);
    // f = P_p', f' = P_p'' from the Legendre ODE (valid for |x| < 1).
    const double f = dpn;
    const double fp = (2.0 * x * dpn - p * (p + 1) * pn) / (1.0 - x * x);
    const double dx = f / fp;
    x -= dx;
    if (std::abs(dx) <= 1e-15) return x;
  }
  throw std::runtime_error("GLL node Newton iteration failed to converge (p=" +
                           std::to_string(p) + ", k=" + std::to_string(k) + ")");
}

QuadratureRule1D make_gll(int p) {
  QuadratureRule1D rule;
  rule.order_p = p;
  rule.nodes.resize(p + 1);
  rule.weights.resize(p + 1);
  if (p == 0) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  rule.nodes[0] = -1.0;
  rule.nodes[p] = 1.0;
  for (int k = 1; k < p; ++k) rule.nodes[k] = gll_interior_node(p, k);
  // Enforce the exact antisymmetry of the node set.
  for (int k = 1; k < p - k; ++k) {
    const double v = 0.5 * (rule.nodes[k] - rule.nodes[p - k]);
    rule.nodes[k] = v;
    rule.nodes[p - k] = -v;
  }
  if (p % 2 == 0) rule.nodes[p / 2] = 0.0;
  for (int i = 0; i <= p; ++i) {
    double pn, dpn;
    legendre(p, rule.nodes[i], pn, dpn);
    rule.weights[i] = 2.0 / (p * (p + 1) * pn * pn);
  }
  return rule;
}

}  // namespace

const QuadratureRule1D& gll_rule(int p) {
  if (p < 0 || p > kMaxOrder)
    throw std::invalid_argument("gll_rule: unsupported order p=" + std::to_string(p) +
                                " (supported range 0..14)");
  static const std::vector<QuadratureRule1D> cache = [] {
    std::vector<QuadratureRule1D> rules;
    rules.reserve(kMaxOrder + 1);
    for (int q = 0; q <= kMaxOrder; ++q) rules.push_back(make_gll(q));
    return rules;
  }();
  return cache[p];
}

LagrangeOps1D lagrange_ops(const QuadratureRule1D& rule) {
  const int n = rule.order_p + 1;
  const Eigen::VectorXd& x = rule.nodes;
  LagrangeOps1D ops;
  ops.diff_matrix = Eigen::MatrixXd::Zero(n, n);
  ops.left_trace.resize(n);
  ops.right_trace.resize(n);

  // Barycentric weights b_i = 1 / prod_{j != i} (x_i - x_j).
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) b[i] *= (x[i] - x[j]);
  b = b.cwiseInverse();

  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      ops.diff_matrix(i, j) = (b[j] / b[i]) / (x[i] - x[j]);
      row_sum += ops.diff_matrix(i, j);
    }
    // Negative-row-sum diagonal makes D annihilate constants exactly.
    ops.diff_matrix(i, i) = -row_sum;
  }

  // Trace vectors by the product formula; exact cardinal vectors for p >= 1
  // because the endpoints are nodes.
  for (int j = 0; j < n; ++j) {
    double lo = 1.0, hi = 1.0;
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      lo *= (-1.0 - x[m]) / (x[j] - x[m]);
      hi *= (1.0 - x[m]) / (x[j] - x[m]);
    }
    ops.left_trace[j] = lo;
    ops.right_trace[j] = hi;
  }
  return ops;
}

const LagrangeOps1D& lagrange_ops(int p) {
  (void)gll_rule(p);  // validates p
  static const std::vector<LagrangeOps1D> cache = [] {
    std::vector<LagrangeOps1D> all;
    all.reserve(kMaxOrder + 1);
    for (int q = 0; q <= kMaxOrder; ++q) all.push_back(lagrange_ops(gll_rule(q)));
    return all;
  }();
  return cache[p];
}

double interpolate(const QuadratureRule1D& rule, const Eigen::VectorXd& nodal_values,
                   double x) {
  const int n = rule.order_p + 1;
  if (nodal_values.size() != n)
    throw std::invalid_argument("interpolate: nodal_values size mismatch");
  if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12)
    throw std::domain_error("interpolate: x outside reference interval [-1,1]");
  double result = 0.0;
  for (int j = 0; j < n; ++j) {
    double lj = 1.0;
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      lj *= (x - rule.nodes[m]) / (rule.nodes[j] - rule.nodes[m]);
    }
    result += nodal_values[j] * lj;
  }
  return result;
}

Eigen::MatrixXd consistent_mass_matrix(int p) {
  const QuadratureRule1D& gll = gll_rule(p);  // validates p
  const int n = p + 1;
  const QuadratureRule1D gauss = gauss_legendre_rule(n);  // exact to 2n-1 = 2p+1
  // Cardinal values l_j(gauss node) by the product formula (node-safe even
  // when a Gauss node coincides with a GLL node, e.g. 0 for even p).
  Eigen::MatrixXd card(n, n);
  for (int q = 0; q < n; ++q)
    for (int j = 0; j < n; ++j) {
      double v = 1.0;
      for (int m = 0; m < n; ++m) {
        if (m == j) continue;
        v *= (gauss.nodes[q] - gll.nodes[m]) / (gll.nodes[j] - gll.nodes[m]);
      }
      card(q, j) = v;
    }
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int q = 0; q < n; ++q) acc += gauss.weights[q] * card(q, i) * card(q, j);
      mass(i, j) = acc;
      mass(j, i) = acc;
    }
  return mass;
}

QuadratureRule1D gauss_legendre_rule(int n_points) {
  if (n_points < 1) throw std::invalid_argument("gauss_legendre_rule: need >= 1 point");
  const int n = n_points;
  QuadratureRule1D rule;
  rule.order_p = n - 1;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    // Classic asymptotic initial guess for the k-th root of P_n.
    double x = -std::cos(M_PI * (k + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double pn, dpn;
      legendre(n, x, pn, dpn);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    double pn, dpn;
    legendre(n, x, pn, dpn);
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dpn * dpn);
  }
  for (int k = 0; k < n - 1 - k; ++k) {
    const double v = 0.5 * (rule.nodes[k] - rule.nodes[n - 1 - k]);
    rule.nodes[k] = v;
    rule.nodes[n - 1 - k] = -v;
    const double w = 0.5 * (rule.weights[k] + rule.weights[n - 1 - k]);
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace lidg
