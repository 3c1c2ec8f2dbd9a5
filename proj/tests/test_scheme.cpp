#include "doctest.h"

#include <lidg/harness.hpp>
#include <lidg/scheme.hpp>
#include <lidg/stability.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

using namespace lidg;
using Cplx = std::complex<double>;

namespace {

FieldState sampled_field(const CartesianMesh& mesh, int p,
                         const std::function<double(const Vec3&)>& f) {
  return project_initial_condition(mesh, p, f);
}

FieldState random_field(const CartesianMesh& mesh, int p, unsigned seed,
                        double offset = 0.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FieldState st;
  st.mesh = &mesh;
  st.order_p = p;
  StShape sh{p, mesh.dim};
  st.elems.resize(mesh.total_elems());
  for (auto& e : st.elems) {
    e.resize(sh.n_space());
    for (int i = 0; i < e.size(); ++i) e[i] = offset + dist(gen);
  }
  return st;
}

double max_field_diff(const FieldState& a, const FieldState& b) {
  double m = 0.0;
  for (size_t k = 0; k < a.elems.size(); ++k)
    m = std::max(m, (a.elems[k] - b.elems[k]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("constant fields are fixed points of both schemes in every dimension") {
  for (int d : {1, 2, 3}) {
    for (int p : {0, 1, 3}) {
      CAPTURE(d);
      CAPTURE(p);
      const std::array<int, 3> n{4, d >= 2 ? 3 : 1, d >= 3 ? 3 : 1};
      const CartesianMesh mesh = build_mesh(d, n, {1.0, 1.2, 0.9});
      const SchemeConfig cfg =
          SchemeConfig::from_cfl(mesh, p, {1.0, d >= 2 ? 0.7 : 0.0, d >= 3 ? 0.4 : 0.0},
                                 0.5, 1.0);
      const FieldState st = sampled_field(mesh, p, [](const Vec3&) { return 0.7; });
      OperatorCache cache;
      const auto [lidg_out, rep] = [&] {
        switch (d) {
          case 1: return step_lidg_1d(st, cfg, cache);
          case 2: return step_lidg_2d(st, cfg, cache);
          default: return step_lidg_3d(st, cfg, cache);
        }
      }();
      CHECK(max_field_diff(lidg_out, st) < 1e-14);
      const FieldState ader_out = step_ader_standard(st, cfg, cache);
      CHECK(max_field_diff(ader_out, st) < 1e-14);
      (void)rep;
    }
  }
}

TEST_CASE("stage reports count local solves and communication stages") {
  OperatorCache cache;
  for (int d : {1, 2, 3}) {
    const std::array<int, 3> n{3, d >= 2 ? 3 : 1, d >= 3 ? 3 : 1};
    const CartesianMesh mesh = build_mesh(d, n, {1.0, 1.0, 1.0});
    const SchemeConfig cfg = SchemeConfig::from_cfl(
        mesh, 1, {1.0, d >= 2 ? 1.0 : 0.0, d >= 3 ? 1.0 : 0.0}, 0.3, 1.0);
    const FieldState st = random_field(mesh, 1, 11u);
    StageReport rep;
    switch (d) {
      case 1: rep = step_lidg_1d(st, cfg, cache).second; break;
      case 2: rep = step_lidg_2d(st, cfg, cache).second; break;
      default: rep = step_lidg_3d(st, cfg, cache).second; break;
    }
    CHECK(rep.local_solves_per_element == (1 << d));
    CHECK(rep.communication_stages == d);
  }
}

TEST_CASE("p=0 at unit CFL advances by an exact one-element shift") {
  const int n = 16;
  const CartesianMesh mesh = build_mesh(1, {n, 1, 1}, {2.0, 1, 1});
  // nu = u dt / dx = 1
  const SchemeConfig cfg =
      SchemeConfig::from_dt(mesh, 0, {1.0, 0, 0}, mesh.elem_sizes[0], 1.0);
  REQUIRE(cfg.cfl_vector[0] == doctest::Approx(1.0).epsilon(1e-15));
  const FieldState st = random_field(mesh, 0, 21u);
  OperatorCache cache;
  const FieldState out = step_lidg_1d(st, cfg, cache).first;
  // shift oracle: new value at element k is the old value at k-1 (periodic)
  for (int k = 0; k < n; ++k) {
    const int km1 = (k + n - 1) % n;
    CHECK(std::abs(out.elems[k][0] - st.elems[km1][0]) < 1e-14);
  }
}

TEST_CASE("run lands on t_final with the documented step counts") {
  const CartesianMesh mesh = build_mesh(1, {16, 1, 1}, {2.0, 1, 1});
  const double dt = dt_from_cfl(mesh, {1.0, 0, 0}, 0.8);
  auto ic = [](const Vec3& x) { return std::sin(M_PI * x[0]); };

  SUBCASE("integer multiple: exactly 3 steps") {
    const SchemeConfig cfg = SchemeConfig::from_dt(mesh, 2, {1.0, 0, 0}, dt, 3.0 * dt);
    const RunResult rr = run(mesh, cfg, ic, SchemeChoice::Lidg);
    CHECK(rr.steps == 3);
    CHECK(rr.state.time == doctest::Approx(3.0 * dt).epsilon(1e-14));
  }
  SUBCASE("fractional multiple: truncated 3rd step") {
    const SchemeConfig cfg = SchemeConfig::from_dt(mesh, 2, {1.0, 0, 0}, dt, 2.5 * dt);
    const RunResult rr = run(mesh, cfg, ic, SchemeChoice::Lidg);
    CHECK(rr.steps == 3);
    CHECK(rr.state.time == doctest::Approx(2.5 * dt).epsilon(1e-14));
  }
}

TEST_CASE("p=0 full-period advection returns the initial field") {
  const int n = 16;
  const CartesianMesh mesh = build_mesh(1, {n, 1, 1}, {2.0, 1, 1});
  const double dt = mesh.elem_sizes[0];  // nu = 1
  const SchemeConfig cfg = SchemeConfig::from_dt(mesh, 0, {1.0, 0, 0}, dt, n * dt);
  auto ic = [](const Vec3& x) { return std::cos(M_PI * x[0]) + 0.3; };
  const RunResult rr = run(mesh, cfg, ic, SchemeChoice::Lidg);
  CHECK(rr.steps == n);
  const FieldState init = sampled_field(mesh, 0, ic);
  CHECK(max_field_diff(rr.state, init) < 1e-13);
}

TEST_CASE("a Bloch mode is advanced by the amplification matrix") {
  // 1D: apply one real-scheme step to the mode field and compare against the
  // matrix image (and the dominant-eigenvalue multiplier) at that wavenumber.
  const int p = 3, n = 16;
  const CartesianMesh mesh = build_mesh(1, {n, 1, 1}, {2.0, 1, 1});
  const SchemeConfig cfg =
      SchemeConfig::from_dt(mesh, p, {1.0, 0, 0}, 0.9 * mesh.elem_sizes[0], 1.0);
  REQUIRE(cfg.cfl_vector[0] == doctest::Approx(0.9).epsilon(1e-15));
  const double theta = 2.0 * M_PI * 3.0 / n;
  const AmplificationSample amp = amplification_matrix(
      SchemeChoice::Lidg, p, 1, Vec3{0.9, 0, 0}, {theta, 0, 0});

  std::mt19937 gen(5u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXcd v(p + 1);
  for (int i = 0; i <= p; ++i) v[i] = Cplx(dist(gen), dist(gen));

  FieldStateT<Cplx> st;
  st.mesh = &mesh;
  st.order_p = p;
  st.elems.resize(n);
  for (int k = 0; k < n; ++k)
    st.elems[k] = std::exp(Cplx(0, theta * k)) * v;
  OperatorCache cache;
  const auto out = step_lidg<Cplx>(st, cfg, cache).first;

  const Eigen::VectorXcd gv = amp.matrix * v;
  double err = 0.0;
  for (int k = 0; k < n; ++k)
    err = std::max(err,
                   (out.elems[k] - std::exp(Cplx(0, theta * k)) * gv).cwiseAbs().maxCoeff());
  CHECK(err < 1e-10);

  // eigen-multiplier form: an eigenvector mode is multiplied by its eigenvalue
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(amp.matrix);
  int dom = 0;
  for (int i = 1; i <= p; ++i)
    if (std::abs(eig.eigenvalues()[i]) > std::abs(eig.eigenvalues()[dom])) dom = i;
  const Eigen::VectorXcd ev = eig.eigenvectors().col(dom);
  const Cplx lambda = eig.eigenvalues()[dom];
  for (int k = 0; k < n; ++k) st.elems[k] = std::exp(Cplx(0, theta * k)) * ev;
  const auto out2 = step_lidg<Cplx>(st, cfg, cache).first;
  double err2 = 0.0;
  for (int k = 0; k < n; ++k)
    err2 = std::max(
        err2, (out2.elems[k] - lambda * st.elems[k]).cwiseAbs().maxCoeff());
  CHECK(err2 < 1e-10);
}

TEST_CASE("2D step equals the per-mode amplification images (separable mode)") {
  const int p = 2, n = 8;
  const CartesianMesh mesh = build_mesh(2, {n, n, 1}, {2.0, 2.0, 1});
  const SchemeConfig cfg =
      SchemeConfig::from_cfl(mesh, p, {1.0, 1.0, 0}, 0.6, 1.0);
  const FieldState st = sampled_field(mesh, p, [](const Vec3& x) {
    return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
  });
  OperatorCache cache;
  const FieldState stepped = step_lidg_2d(st, cfg, cache).first;

  // Oracle: DFT the element grid, multiply each mode vector by the Bloch
  // matrix at its wavenumber pair, inverse DFT, compare field values.
  const StShape sh{p, 2};
  const int ns = sh.n_space();
  std::vector<Eigen::VectorXcd> hat(n * n, Eigen::VectorXcd::Zero(ns));
  for (int mx = 0; mx < n; ++mx)
    for (int my = 0; my < n; ++my)
      for (int kx = 0; kx < n; ++kx)
        for (int ky = 0; ky < n; ++ky) {
          const double ph = -2.0 * M_PI * (mx * kx + my * ky) / n;
          hat[mx * n + my] +=
              std::exp(Cplx(0, ph)) * st.elems[kx * n + ky].cast<Cplx>();
        }
  for (int mx = 0; mx < n; ++mx)
    for (int my = 0; my < n; ++my) {
      const AmplificationSample amp = amplification_matrix(
          SchemeChoice::Lidg, p, 2,
          Vec3{cfg.cfl_vector[0], cfg.cfl_vector[1], 0},
          {2.0 * M_PI * mx / n, 2.0 * M_PI * my / n, 0});
      hat[mx * n + my] = amp.matrix * hat[mx * n + my];
    }
  double err = 0.0;
  for (int kx = 0; kx < n; ++kx)
    for (int ky = 0; ky < n; ++ky) {
      Eigen::VectorXcd rec = Eigen::VectorXcd::Zero(ns);
      for (int mx = 0; mx < n; ++mx)
        for (int my = 0; my < n; ++my) {
          const double ph = 2.0 * M_PI * (mx * kx + my * ky) / n;
          rec += std::exp(Cplx(0, ph)) * hat[mx * n + my];
        }
      rec /= double(n * n);
      err = std::max(
          err, (rec - stepped.elems[kx * n + ky].cast<Cplx>()).cwiseAbs().maxCoeff());
    }
  CHECK(err < 1e-10);
}

TEST_CASE("2D step with transverse velocity zero reduces to 1D rows") {
  const int p = 2, n = 6;
  const CartesianMesh mesh2 = build_mesh(2, {n, n, 1}, {2.0, 1.5, 1});
  const CartesianMesh mesh1 = build_mesh(1, {n, 1, 1}, {2.0, 1, 1});
  const double dt = 0.4 * mesh2.elem_sizes[0];
  const SchemeConfig cfg2 = SchemeConfig::from_dt(mesh2, p, {1.0, 0.0, 0}, dt, 1.0);
  const SchemeConfig cfg1 = SchemeConfig::from_dt(mesh1, p, {1.0, 0, 0}, dt, 1.0);

  const FieldState st2 = random_field(mesh2, p, 31u);
  OperatorCache cache;
  const FieldState out2 = step_lidg_2d(st2, cfg2, cache).first;

  // Row oracle: for each element row ky and each xi_2 node iy, the 1D field
  // of those nodes steps independently (the xi_2 terms all carry u_2 = 0).
  const StShape sh2{p, 2};
  for (int ky = 0; ky < n; ++ky) {
    for (int iy = 0; iy <= p; ++iy) {
      FieldState st1;
      st1.mesh = &mesh1;
      st1.order_p = p;
      st1.elems.resize(n);
      for (int kx = 0; kx < n; ++kx) {
        st1.elems[kx].resize(p + 1);
        for (int ix = 0; ix <= p; ++ix)
          st1.elems[kx][ix] = st2.elems[kx * n + ky][ix * (p + 1) + iy];
      }
      const FieldState out1 = step_lidg_1d(st1, cfg1, cache).first;
      for (int kx = 0; kx < n; ++kx)
        for (int ix = 0; ix <= p; ++ix)
          CHECK(std::abs(out2.elems[kx * n + ky][ix * (p + 1) + iy] -
                         out1.elems[kx][ix]) < 1e-12);
    }
  }
}

TEST_CASE("3D step with w=0 matches the 2D step on each z-slab") {
  const int p = 1, n = 4;
  const CartesianMesh mesh3 = build_mesh(3, {n, n, n}, {2.0, 2.0, 1.0});
  const CartesianMesh mesh2 = build_mesh(2, {n, n, 1}, {2.0, 2.0, 1});
  const double dt = 0.3 * mesh3.elem_sizes[0];
  const SchemeConfig cfg3 = SchemeConfig::from_dt(mesh3, p, {1.0, 1.0, 0.0}, dt, 1.0);
  const SchemeConfig cfg2 = SchemeConfig::from_dt(mesh2, p, {1.0, 1.0, 0}, dt, 1.0);

  const FieldState st3 = random_field(mesh3, p, 41u);
  OperatorCache cache;
  const FieldState out3 = step_lidg_3d(st3, cfg3, cache).first;

  const int nn = p + 1;
  for (int kz = 0; kz < n; ++kz) {
    for (int iz = 0; iz < nn; ++iz) {
      FieldState st2;
      st2.mesh = &mesh2;
      st2.order_p = p;
      st2.elems.resize(n * n);
      for (int kx = 0; kx < n; ++kx)
        for (int ky = 0; ky < n; ++ky) {
          Eigen::VectorXd& e = st2.elems[kx * n + ky];
          e.resize(nn * nn);
          for (int ix = 0; ix < nn; ++ix)
            for (int iy = 0; iy < nn; ++iy)
              e[ix * nn + iy] =
                  st3.elems[(kx * n + ky) * n + kz][(ix * nn + iy) * nn + iz];
        }
      const FieldState out2 = step_lidg_2d(st2, cfg2, cache).first;
      for (int kx = 0; kx < n; ++kx)
        for (int ky = 0; ky < n; ++ky)
          for (int ix = 0; ix < nn; ++ix)
            for (int iy = 0; iy < nn; ++iy)
              CHECK(std::abs(
                        out3.elems[(kx * n + ky) * n + kz][(ix * nn + iy) * nn + iz] -
                        out2.elems[kx * n + ky][ix * nn + iy]) < 1e-12);
    }
  }
}

TEST_CASE("mass is conserved per step in every dimension and scheme") {
  OperatorCache cache;
  for (int d : {1, 2, 3}) {
    const int p = d == 3 ? 2 : 3;
    const std::array<int, 3> n{6, d >= 2 ? 5 : 1, d >= 3 ? 4 : 1};
    const CartesianMesh mesh = build_mesh(d, n, {2.0, 1.5, 1.0});
    const SchemeConfig cfg = SchemeConfig::from_cfl(
        mesh, p, {1.0, d >= 2 ? 0.8 : 0.0, d >= 3 ? 0.5 : 0.0}, 0.5, 1.0);
    // offset 2 keeps the mass away from zero so relative tolerance is meaningful
    const FieldState st = random_field(mesh, p, 51u + d, 2.0);
    const double m0 = total_mass(st);
    FieldState lidg_out;
    switch (d) {
      case 1: lidg_out = step_lidg_1d(st, cfg, cache).first; break;
      case 2: lidg_out = step_lidg_2d(st, cfg, cache).first; break;
      default: lidg_out = step_lidg_3d(st, cfg, cache).first; break;
    }
    CHECK(std::abs(total_mass(lidg_out) - m0) < 1e-12 * std::abs(m0));
    const FieldState ader_out = step_ader_standard(st, cfg, cache);
    CHECK(std::abs(total_mass(ader_out) - m0) < 1e-12 * std::abs(m0));
  }
}

TEST_CASE("the advection step is linear in the state") {
  const int p = 2, n = 5;
  const CartesianMesh mesh = build_mesh(2, {n, n, 1}, {2.0, 2.0, 1});
  const SchemeConfig cfg = SchemeConfig::from_cfl(mesh, p, {1.0, 0.6, 0}, 0.55, 1.0);
  OperatorCache cache;
  const FieldState x = random_field(mesh, p, 61u);
  const FieldState y = random_field(mesh, p, 62u);
  const double a = 1.3, b = -0.7;
  FieldState combo = x;
  for (int k = 0; k < n * n; ++k) combo.elems[k] = a * x.elems[k] + b * y.elems[k];

  const FieldState sx = step_lidg_2d(x, cfg, cache).first;
  const FieldState sy = step_lidg_2d(y, cfg, cache).first;
  const FieldState sc = step_lidg_2d(combo, cfg, cache).first;
  double err = 0.0;
  for (int k = 0; k < n * n; ++k)
    err = std::max(
        err, (sc.elems[k] - a * sx.elems[k] - b * sy.elems[k]).cwiseAbs().maxCoeff());
  CHECK(err < 1e-12);
}

TEST_CASE("1D energy is non-increasing up to the stability limit") {
  for (int p = 0; p <= 10; ++p) {
    for (double nu : {0.6, 1.0}) {
      CAPTURE(p);
      CAPTURE(nu);
      const CartesianMesh mesh = build_mesh(1, {8, 1, 1}, {2.0, 1, 1});
      const SchemeConfig cfg =
          SchemeConfig::from_dt(mesh, p, {1.0, 0, 0}, nu * mesh.elem_sizes[0], 1.0);
      FieldState st = random_field(mesh, p, 100u + p);
      OperatorCache cache;
      double e_prev = total_energy(st);
      const double e0 = e_prev;
      for (int s = 0; s < 100; ++s) {
        st = step_lidg_1d(st, cfg, cache).first;
        const double e = total_energy(st);
        CHECK(e <= e_prev + 1e-13 * e0);
        e_prev = e;
      }
    }
  }
}

TEST_CASE("standard ADER scan brackets its p=1 stability limit") {
  CHECK(scan_max_radius(SchemeChoice::Ader, 1, 1, Vec3{0.3, 0, 0}, 100) <=
        1.0 + 1e-10);
  CHECK(scan_max_radius(SchemeChoice::Ader, 1, 1, Vec3{0.4, 0, 0}, 100) >
        1.0 + 1e-6);
}

TEST_CASE("the run driver aborts on instability") {
  const CartesianMesh mesh = build_mesh(1, {16, 1, 1}, {2.0, 1, 1});
  // p=1 standard ADER at nu = 0.9 is far beyond its ~0.33 limit
  const double dt = 0.9 * mesh.elem_sizes[0];
  const SchemeConfig cfg = SchemeConfig::from_dt(mesh, 1, {1.0, 0, 0}, dt, 200.0 * dt);
  auto ic = [](const Vec3& x) { return std::sin(M_PI * x[0]); };
  CHECK_THROWS_AS(run(mesh, cfg, ic, SchemeChoice::Ader), std::runtime_error);
}
