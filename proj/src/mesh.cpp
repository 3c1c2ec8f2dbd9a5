#include "lidg/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lidg {

std::array<int, 3> CartesianMesh::unflatten(int e) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = e % n_elems[a];
    e /= n_elems[a];
  }
  return idx;
}

int CartesianMesh::flatten(const std::array<int, 3>& idx) const {
  int e = 0;
  for (int a = 0; a < dim; ++a) e = e * n_elems[a] + idx[a];
  return e;
}

CartesianMesh build_mesh(int dim, const std::array<int, 3>& n_per_dim,
                         const std::array<double, 3>& lengths,
                         const std::array<double, 3>& origin) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("build_mesh: dim must be 1, 2 or 3");
  CartesianMesh mesh;
  mesh.dim = dim;
  mesh.origin = origin;
  for (int a = 0; a < dim; ++a) {
    if (n_per_dim[a] < 1)
      throw std::invalid_argument("build_mesh: need >= 1 element per axis");
    if (!(lengths[a] > 0.0))
      throw std::invalid_argument("build_mesh: domain lengths must be positive");
    mesh.n_elems[a] = n_per_dim[a];
    mesh.domain_lengths[a] = lengths[a];
    mesh.elem_sizes[a] = lengths[a] / n_per_dim[a];
  }
  return mesh;
}

int neighbor(const CartesianMesh& mesh, int elem_index, int axis, Side side) {
  if (axis < 0 || axis >= mesh.dim)
    throw std::invalid_argument("neighbor: axis out of range");
  std::array<int, 3> idx = mesh.unflatten(elem_index);
  const int n = mesh.n_elems[axis];
  idx[axis] = (side == Side::High) ? (idx[axis] + 1) % n : (idx[axis] + n - 1) % n;
  return mesh.flatten(idx);
}

double dt_from_cfl(const CartesianMesh& mesh, const std::array<double, 3>& velocity,
                   double cfl_norm) {
  if (!(cfl_norm > 0.0)) throw std::invalid_argument("dt_from_cfl: cfl_norm must be > 0");
  double s2 = 0.0;
  for (int a = 0; a < mesh.dim; ++a) {
    const double r = velocity[a] / mesh.elem_sizes[a];
    s2 += r * r;
  }
  if (s2 == 0.0)
    throw std::invalid_argument("dt_from_cfl: zero velocity gives unbounded dt");
  return cfl_norm / std::sqrt(s2);
}

namespace {

void validate_velocity(int dim, const std::array<double, 3>& velocity) {
  for (int a = 0; a < dim; ++a)
    if (velocity[a] < 0.0)
      throw std::invalid_argument(
          "SchemeConfig: negative velocity component on axis " + std::to_string(a) +
          "; reflect the axis (flip velocity sign and mirror the initial condition)");
}

}  // namespace

SchemeConfig SchemeConfig::from_dt(const CartesianMesh& mesh, int order_p,
                                   const std::array<double, 3>& velocity, double dt,
                                   double t_final) {
  validate_velocity(mesh.dim, velocity);
  if (!(dt > 0.0)) throw std::invalid_argument("SchemeConfig: dt must be positive");
  SchemeConfig cfg;
  cfg.order_p = order_p;
  cfg.dim = mesh.dim;
  cfg.velocity = velocity;
  cfg.dt = dt;
  cfg.t_final = t_final;
  for (int a = 0; a < mesh.dim; ++a)
    cfg.cfl_vector[a] = velocity[a] * dt / mesh.elem_sizes[a];
  return cfg;
}

SchemeConfig SchemeConfig::from_cfl(const CartesianMesh& mesh, int order_p,
                                    const std::array<double, 3>& velocity,
                                    double cfl_norm, double t_final) {
  validate_velocity(mesh.dim, velocity);
  return from_dt(mesh, order_p, velocity, dt_from_cfl(mesh, velocity, cfl_norm),
                 t_final);
}

}  // namespace lidg
