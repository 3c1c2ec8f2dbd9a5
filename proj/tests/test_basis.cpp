#include "doctest.h"

#include <lidg/basis.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace lidg;

namespace {

/// Independent Legendre evaluator (three-term recurrence), used to find GLL
/// nodes without going through the library's Newton iteration.
double legendre(int n, double x) {
  double pm = 1.0, pc = x;
  if (n == 0) return pm;
  for (int k = 1; k < n; ++k) {
    const double pn = ((2 * k + 1) * x * pc - k * pm) / (k + 1);
    pm = pc;
    pc = pn;
  }
  return pc;
}

/// P_n'(x) for |x| < 1 via the standard identity.
double legendre_deriv(int n, double x) {
  return n * (x * legendre(n, x) - legendre(n - 1, x)) / (x * x - 1.0);
}

/// Interior GLL nodes of degree p = roots of P_p', found by sign-change
/// bisection on a fine grid. Pure bracketing, no derivative information.
std::vector<double> interior_gll_nodes_by_bisection(int p) {
  std::vector<double> roots;
  const int grid = 4000;
  const double a0 = -1.0 + 1e-9, b0 = 1.0 - 1e-9;
  double prev_x = a0, prev_f = legendre_deriv(p, a0);
  for (int g = 1; g <= grid; ++g) {
    const double x = a0 + (b0 - a0) * g / grid;
    const double f = legendre_deriv(p, x);
    if (prev_f == 0.0) roots.push_back(prev_x);
    if (prev_f * f < 0.0) {
      double lo = prev_x, hi = x, flo = prev_f;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = legendre_deriv(p, mid);
        if (flo * fm <= 0.0)
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
        if (hi - lo < 1e-15) break;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_f = f;
  }
  return roots;
}

/// Barycentric Lagrange evaluation, independent of the library's routine.
double barycentric_eval(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values,
                        double x) {
  const int n = static_cast<int>(nodes.size());
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    double w = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != j) w /= nodes[j] - nodes[m];
    if (x == nodes[j]) return values[j];
    const double t = w / (x - nodes[j]);
    num += t * values[j];
    den += t;
  }
  return num / den;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("gll rule: closed forms at p=1 and p=2") {
  const auto& r1 = gll_rule(1);
  CHECK(r1.nodes.size() == 2);
  CHECK(r1.nodes[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(r1.nodes[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r1.weights[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto& r2 = gll_rule(2);
  CHECK(r2.nodes.size() == 3);
  CHECK(std::abs(r2.nodes[0] + 1.0) < 1e-15);
  CHECK(std::abs(r2.nodes[1]) < 1e-15);
  CHECK(std::abs(r2.nodes[2] - 1.0) < 1e-15);
  CHECK(std::abs(r2.weights[0] - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(r2.weights[1] - 4.0 / 3.0) < 1e-15);
  CHECK(std::abs(r2.weights[2] - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("gll rule: p=6 nodes match bisection roots of the Legendre derivative") {
  const auto& rule = gll_rule(6);
  const std::vector<double> interior = interior_gll_nodes_by_bisection(6);
  REQUIRE(interior.size() == 5);
  CHECK(std::abs(rule.nodes[0] + 1.0) < 1e-15);
  CHECK(std::abs(rule.nodes[6] - 1.0) < 1e-15);
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(rule.nodes[i + 1] - interior[i]) < 1e-12);
}

TEST_CASE("gll rule: structural invariants for p in [0,14]") {
  for (int p = 0; p <= 14; ++p) {
    CAPTURE(p);
    const auto& rule = gll_rule(p);
    REQUIRE(rule.nodes.size() == p + 1);
    REQUIRE(rule.weights.size() == p + 1);
    CHECK(std::abs(rule.weights.sum() - 2.0) < 1e-14);
    for (int i = 0; i <= p; ++i) {
      CHECK(rule.weights[i] > 0.0);
      // symmetry of nodes and weights about 0
      CHECK(std::abs(rule.nodes[i] + rule.nodes[p - i]) < 1e-14);
      CHECK(std::abs(rule.weights[i] - rule.weights[p - i]) < 1e-14);
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    }
    if (p >= 1) {
      CHECK(rule.nodes[0] == -1.0);
      CHECK(rule.nodes[p] == 1.0);
    }
  }
  CHECK_THROWS_AS(gll_rule(-1), std::invalid_argument);
  CHECK_THROWS_AS(gll_rule(15), std::invalid_argument);
}

TEST_CASE("gll rule: exact for monomials up to degree 2p-1") {
  for (int p = 1; p <= 14; ++p) {
    CAPTURE(p);
    const auto& rule = gll_rule(p);
    for (int m = 0; m <= 2 * p - 1; ++m) {
      double q = 0.0;
      for (int i = 0; i <= p; ++i) q += rule.weights[i] * std::pow(rule.nodes[i], m);
      const double exact = (m % 2 == 0) ? 2.0 / (m + 1) : 0.0;
      CHECK(std::abs(q - exact) < 1e-13);
    }
    // degree 2p is *not* integrated exactly (this is what distinguishes GLL
    // from Gauss and makes the consistent mass matrix non-diagonal); the
    // miss shrinks like 4^-p, so only assert it where it is well resolved
    if (p <= 8) {
      double q2p = 0.0;
      for (int i = 0; i <= p; ++i)
        q2p += rule.weights[i] * std::pow(rule.nodes[i], 2 * p);
      CHECK(std::abs(q2p - 2.0 / (2 * p + 1)) > 1e-6);
    }
  }
}

TEST_CASE("differentiation matrix: exact on polynomials") {
  for (int p : {1, 2, 4, 7, 14}) {
    CAPTURE(p);
    const auto& rule = gll_rule(p);
    const auto& ops = lagrange_ops(p);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p + 1);
    CHECK(max_abs(ops.diff_matrix * ones) < 1e-13);
    CHECK(max_abs(ops.diff_matrix * rule.nodes - ones) < 1e-13);
  }
  // p=4: derivative of x^4 is 4x^3, inside the exactness range
  const auto& rule = gll_rule(4);
  const auto& ops = lagrange_ops(4);
  const Eigen::VectorXd x4 = rule.nodes.array().pow(4.0);
  const Eigen::VectorXd dx4 = 4.0 * rule.nodes.array().pow(3.0);
  CHECK(max_abs(ops.diff_matrix * x4 - dx4) < 1e-12);
}

TEST_CASE("summation by parts: W*D + (W*D)^T equals the boundary matrix") {
  for (int p = 1; p <= 14; ++p) {
    CAPTURE(p);
    const auto& rule = gll_rule(p);
    const auto& ops = lagrange_ops(p);
    const Eigen::MatrixXd WD = rule.weights.asDiagonal() * ops.diff_matrix;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p + 1, p + 1);
    B(0, 0) = -1.0;
    B(p, p) = 1.0;
    CHECK(max_abs(WD + WD.transpose() - B) < 1e-13);
  }
}

TEST_CASE("trace vectors: nodal read-offs at the endpoints") {
  for (int p : {1, 3, 8}) {
    CAPTURE(p);
    const auto& ops = lagrange_ops(p);
    for (int j = 0; j <= p; ++j) {
      CHECK(std::abs(ops.left_trace[j] - (j == 0 ? 1.0 : 0.0)) < 1e-14);
      CHECK(std::abs(ops.right_trace[j] - (j == p ? 1.0 : 0.0)) < 1e-14);
    }
  }
}

TEST_CASE("interpolate: cardinal property, constants, and a barycentric oracle") {
  const auto& rule = gll_rule(3);
  // cardinal property: unit nodal vector j evaluates to delta_ij at node i
  for (int j = 0; j <= 3; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    e[j] = 1.0;
    for (int i = 0; i <= 3; ++i)
      CHECK(std::abs(interpolate(rule, e, rule.nodes[i]) - (i == j ? 1.0 : 0.0)) <
            1e-14);
  }
  // constants are reproduced anywhere in [-1,1]
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 0.7);
  for (double x : {-1.0, -0.31, 0.0, 0.5, 1.0})
    CHECK(std::abs(interpolate(rule, c, x) - 0.7) < 1e-14);

  // random nodal values at x = 0.37 against an independent barycentric formula
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd vals(4);
  for (int i = 0; i < 4; ++i) vals[i] = uni(rng);
  CHECK(std::abs(interpolate(rule, vals, 0.37) -
                 barycentric_eval(rule.nodes, vals, 0.37)) < 1e-13);

  CHECK_THROWS_AS(interpolate(rule, vals, 1.1), std::domain_error);
  CHECK_THROWS_AS(interpolate(rule, vals, -1.0 - 1e-6), std::domain_error);
}

TEST_CASE("gauss-legendre rule: exactness to degree 2n-1 and symmetry") {
  for (int n : {1, 2, 4, 6, 9}) {
    CAPTURE(n);
    const QuadratureRule1D rule = gauss_legendre_rule(n);
    REQUIRE(rule.nodes.size() == n);
    CHECK(std::abs(rule.weights.sum() - 2.0) < 1e-14);
    for (int i = 0; i < n; ++i) {
      CHECK(rule.weights[i] > 0.0);
      CHECK(std::abs(rule.nodes[i] + rule.nodes[n - 1 - i]) < 1e-14);
      // Gauss nodes are interior roots of P_n
      CHECK(std::abs(legendre(n, rule.nodes[i])) < 1e-12);
    }
    for (int m = 0; m <= 2 * n - 1; ++m) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += rule.weights[i] * std::pow(rule.nodes[i], m);
      const double exact = (m % 2 == 0) ? 2.0 / (m + 1) : 0.0;
      CHECK(std::abs(q - exact) < 1e-13);
    }
  }
}

TEST_CASE("consistent mass matrix: closed form at p=1") {
  // l_0 = (1-x)/2, l_1 = (1+x)/2 on [-1,1]: diag 2/3, off-diag 1/3
  const Eigen::MatrixXd m = consistent_mass_matrix(1);
  CHECK(std::abs(m(0, 0) - 2.0 / 3.0) < 1e-14);
  CHECK(std::abs(m(1, 1) - 2.0 / 3.0) < 1e-14);
  CHECK(std::abs(m(0, 1) - 1.0 / 3.0) < 1e-14);
  CHECK(std::abs(m(1, 0) - 1.0 / 3.0) < 1e-14);
}

TEST_CASE("consistent mass matrix: quadrature-assembled oracle, row sums, SPD") {
  for (int p : {0, 2, 3, 6}) {
    CAPTURE(p);
    const auto& rule = gll_rule(p);
    const Eigen::MatrixXd m = consistent_mass_matrix(p);
    REQUIRE(m.rows() == p + 1);

    // independent assembly: evaluate cardinal polynomials via interpolate()
    // at the nodes of a Gauss rule exact for the degree-2p integrand
    const QuadratureRule1D gauss = gauss_legendre_rule(p + 2);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (int q = 0; q < p + 2; ++q) {
      Eigen::VectorXd card(p + 1);
      for (int j = 0; j <= p; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(p + 1);
        e[j] = 1.0;
        card[j] = interpolate(rule, e, gauss.nodes[q]);
      }
      oracle += gauss.weights[q] * card * card.transpose();
    }
    CHECK(max_abs(m - oracle) < 1e-13);

    // partition of unity: row i sums to the integral of l_i, which GLL
    // integrates exactly (degree p), so row sums reproduce the GLL weights
    for (int i = 0; i <= p; ++i)
      CHECK(std::abs(m.row(i).sum() - rule.weights[i]) < 1e-13);

    CHECK(max_abs(m - m.transpose()) == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    // genuinely non-diagonal for p >= 1
    if (p >= 1) CHECK(std::abs(m(0, p)) > 1e-6);
  }
}
