#pragma once

#include <array>
#include <cstdint>

namespace lidg {

enum class Side : int { Low = 0, High = 1 };

/// Periodic uniform Cartesian mesh in d in {1,2,3} dimensions.
/// Elements are indexed flat, row-major with axis 0 slowest.
struct CartesianMesh {
  int dim = 1;
  std::array<int, 3> n_elems{1, 1, 1};          // per axis; 1 for unused axes
  std::array<double, 3> domain_lengths{0, 0, 0};
  std::array<double, 3> elem_sizes{0, 0, 0};    // dx_i = L_i / n_i
  std::array<double, 3> origin{0, 0, 0};        // low corner of the domain

  int total_elems() const {
    int n = 1;
    for (int a = 0; a < dim; ++a) n *= n_elems[a];
    return n;
  }
  std::array<int, 3> unflatten(int e) const;
  int flatten(const std::array<int, 3>& idx) const;
};

CartesianMesh build_mesh(int dim, const std::array<int, 3>& n_per_dim,
                         const std::array<double, 3>& lengths,
                         const std::array<double, 3>& origin = {0.0, 0.0, 0.0});

/// Periodic neighbor of an element across the given face.
int neighbor(const CartesianMesh& mesh, int elem_index, int axis, Side side);

/// dt such that the element CFL ||(u_i dt / dx_i)_i||_2 equals cfl_norm.
double dt_from_cfl(const CartesianMesh& mesh, const std::array<double, 3>& velocity,
                   double cfl_norm);

/// Static configuration of an advection run. Velocity components must be
/// nonnegative; negative components are handled upstream by axis reflection
/// (flip the velocity sign and mirror the initial condition), which is exact.
struct SchemeConfig {
  int order_p = 1;
  int dim = 1;
  std::array<double, 3> velocity{0, 0, 0};
  double dt = 0;
  double t_final = 0;
  std::array<double, 3> cfl_vector{0, 0, 0};  // nu_i = u_i dt / dx_i

  /// Build a config from a target element CFL norm; dt and cfl_vector are
  /// derived so the defining relation holds exactly as stored.
  static SchemeConfig from_cfl(const CartesianMesh& mesh, int order_p,
                               const std::array<double, 3>& velocity, double cfl_norm,
                               double t_final);
  /// Build a config from an explicit dt.
  static SchemeConfig from_dt(const CartesianMesh& mesh, int order_p,
                              const std::array<double, 3>& velocity, double dt,
                              double t_final);
};

}  // namespace lidg
