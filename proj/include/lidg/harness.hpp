#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lidg/burgers.hpp"
#include "lidg/scheme.hpp"

namespace lidg {

/// One row of a mesh-refinement study.
struct ConvergenceRow {
  int n_per_dim = 0;
  double h = 0.0;            // max over axes of the element size
  double rel_l2_error = 0.0;
  std::optional<double> observed_rate;  // absent on the first row
};

enum class Problem { Advection1D, Advection2D, Advection3D, Burgers2D };

struct RunSpec {
  Problem problem = Problem::Advection2D;
  int order_p = 2;
  std::vector<int> mesh_sizes;  // elements per axis, strictly increasing
  double cfl_norm = 0.6;
  double t_final = 2.0;
  SchemeChoice scheme = SchemeChoice::Lidg;
  std::string output_path;      // empty: no CSV written
  bool high_frequency_ic = false;  // 2D advection: sin(16 pi x) sin(16 pi y)
};

/// A benchmark problem: periodic domain, advection velocity (zero entries
/// for Burgers), initial condition and closed-form solution at time t.
struct ProblemSetup {
  int dim = 1;
  std::array<double, 3> lengths{1, 1, 1};
  Vec3 velocity{0, 0, 0};
  bool nonlinear = false;
  std::function<double(const Vec3&)> initial;
  std::function<double(const Vec3&, double)> exact;
};

ProblemSetup make_problem(Problem problem, bool high_frequency_ic = false);

/// Relative L2 error of the nodal state against a closed-form field,
/// integrated per element by Gauss-Legendre quadrature with
/// p + 1 + quadrature_boost points per axis (over-integration so the
/// measurement does not alias). Throws if the exact field has zero norm.
double relative_l2_error(const FieldState& state,
                         const std::function<double(const Vec3&)>& exact,
                         int quadrature_boost = 2);

/// log(err_prev / err_curr) / log(h_prev / h_curr).
double fit_rate(double err_prev, double err_curr, double h_prev, double h_curr);

/// Run the spec's mesh sequence, compare against the analytic solution
/// (shifted initial data for advection, characteristics for Burgers), and
/// write the CSV when an output path is set. Instability aborts are
/// rethrown with the offending mesh size attached.
std::vector<ConvergenceRow> convergence_study(const RunSpec& spec);

/// Deterministic CSV emission ('.' decimal, %.16e scientific fields).
std::string csv_field(double v);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows);

/// CLI entry point (subcommands: run, converge, vonneumann, stability-norm,
/// max-cfl). Returns the process exit status: 0 success, 1 runtime failure,
/// 2 usage error.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace lidg
