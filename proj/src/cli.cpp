#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lidg/harness.hpp"
#include "lidg/stability.hpp"

namespace lidg {

namespace {

Problem parse_problem(const std::string& name) {
  if (name == "advection1d") return Problem::Advection1D;
  if (name == "advection2d") return Problem::Advection2D;
  if (name == "advection3d") return Problem::Advection3D;
  if (name == "burgers2d") return Problem::Burgers2D;
  throw CLI::ValidationError("--problem", "unknown problem: " + name);
}

SchemeChoice parse_scheme(const std::string& name) {
  if (name == "lidg") return SchemeChoice::Lidg;
  if (name == "ader") return SchemeChoice::Ader;
  throw CLI::ValidationError("--scheme", "unknown scheme: " + name);
}

/// Print the CSV text to stdout and, when a path is given, to the file.
void emit(const std::string& csv_text, const std::string& path) {
  std::cout << csv_text;
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << csv_text;
  if (!out.good()) throw std::runtime_error("failed writing output file: " + path);
}

struct ConvergeArgs {
  std::string problem = "advection2d";
  int order = 2;
  std::vector<int> sizes;
  double cfl = 0.6;
  double t_final = 1.0;
  std::string scheme = "lidg";
  std::string output;
  bool high_frequency = false;
};

void add_common_run_flags(CLI::App* cmd, ConvergeArgs& a) {
  cmd->add_option("--problem", a.problem, "Benchmark problem")
      ->check(CLI::IsMember({"advection1d", "advection2d", "advection3d", "burgers2d"}));
  cmd->add_option("--order", a.order, "Polynomial order p")->check(CLI::Range(0, 14));
  cmd->add_option("--cfl", a.cfl, "Element CFL norm ||nu||_2")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tfinal", a.t_final, "Final time")->check(CLI::PositiveNumber);
  cmd->add_option("--scheme", a.scheme, "Time stepping scheme")
      ->check(CLI::IsMember({"lidg", "ader"}));
  cmd->add_option("--output", a.output, "CSV output path (stdout always)");
  cmd->add_flag("--high-frequency", a.high_frequency,
                "Use the sin(16 pi x) sin(16 pi y) initial condition (advection2d)");
  cmd->set_config("--config", "", "Flat key=value config file (flags win)");
}

int do_converge(const ConvergeArgs& a) {
  RunSpec spec;
  spec.problem = parse_problem(a.problem);
  spec.order_p = a.order;
  spec.mesh_sizes = a.sizes;
  spec.cfl_norm = a.cfl;
  spec.t_final = a.t_final;
  spec.scheme = parse_scheme(a.scheme);
  spec.high_frequency_ic = a.high_frequency;
  const std::vector<ConvergenceRow> rows = convergence_study(spec);
  emit(convergence_csv(rows), a.output);
  return 0;
}

struct VonNeumannArgs {
  std::string scheme = "lidg";
  int dim = 1;
  int order = 2;
  double cfl_min = 0.0;
  double cfl_max = 0.0;
  int cfl_steps = 9;
  int samples = 100;
  std::string output;
};

int do_vonneumann(const VonNeumannArgs& a) {
  if (a.cfl_max < a.cfl_min)
    throw CLI::ValidationError("--cfl-max", "must be >= --cfl-min");
  const SchemeChoice scheme = parse_scheme(a.scheme);
  std::string text = "cfl,max_radius\n";
  for (int i = 0; i < a.cfl_steps; ++i) {
    const double cfl =
        (a.cfl_steps == 1)
            ? a.cfl_min
            : a.cfl_min + i * (a.cfl_max - a.cfl_min) / (a.cfl_steps - 1);
    const double per_axis = cfl / std::sqrt(double(a.dim));
    const Vec3 nu{per_axis, a.dim > 1 ? per_axis : 0.0, a.dim > 2 ? per_axis : 0.0};
    const double radius = scan_max_radius(scheme, a.order, a.dim, nu, a.samples);
    text += csv_field(cfl) + ',' + csv_field(radius) + '\n';
  }
  emit(text, a.output);
  return 0;
}

struct StabilityNormArgs {
  int max_order = 10;
  std::vector<double> cfl_list;
  std::string output;
};

int do_stability_norm(const StabilityNormArgs& a) {
  // norm_w: spectral radius of the end-of-step difference matrix A in the
  // weight-induced metric. The radius is similarity-invariant, so weighting
  // by sqrt(w) leaves it unchanged; it equals 1 for nu <= 1 and exceeds 1
  // beyond. norm_2: the induced 2-norm, reported for comparison (it can
  // exceed 1 below the stability limit without implying growth).
  std::string text = "p,nu,norm_w,norm_2\n";
  for (int p = 0; p <= a.max_order; ++p) {
    for (double nu : a.cfl_list) {
      const StabilityMatrices sm = build_stability_matrices(p, nu);
      text += std::to_string(p) + ',' + csv_field(nu) + ',' +
              csv_field(spectral_radius(sm.A)) + ',' +
              csv_field(spectral_norm(sm.A)) + '\n';
    }
  }
  emit(text, a.output);
  return 0;
}

struct MaxCflArgs {
  std::string scheme = "lidg";
  int dim = 1;
  std::vector<int> orders{1, 2, 3};
  double tol = 0.01;
  int samples = 100;
  std::string output;
};

int do_max_cfl(const MaxCflArgs& a) {
  const SchemeChoice scheme = parse_scheme(a.scheme);
  std::string text = "scheme,p,dim,max_cfl\n";
  for (int p : a.orders) {
    const double c =
        max_stable_cfl(scheme, p, a.dim, Vec3{1, 1, 1}, a.tol, a.samples);
    text += a.scheme + ',' + std::to_string(p) + ',' + std::to_string(a.dim) + ',' +
            csv_field(c) + '\n';
  }
  emit(text, a.output);
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Locally implicit DG transport solver and stability toolkit"};
  app.require_subcommand(1);

  ConvergeArgs run_args;
  int run_elements = 16;
  CLI::App* cmd_run = app.add_subcommand("run", "Single simulation; reports the error");
  add_common_run_flags(cmd_run, run_args);
  cmd_run->add_option("--elements", run_elements, "Elements per axis")
      ->check(CLI::PositiveNumber);

  ConvergeArgs conv_args;
  CLI::App* cmd_conv =
      app.add_subcommand("converge", "Mesh-refinement study with observed rates");
  add_common_run_flags(cmd_conv, conv_args);
  cmd_conv->add_option("--sizes", conv_args.sizes, "Elements per axis, increasing")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  VonNeumannArgs vn_args;
  CLI::App* cmd_vn =
      app.add_subcommand("vonneumann", "Max spectral radius over a CFL range");
  cmd_vn->add_option("--scheme", vn_args.scheme)
      ->check(CLI::IsMember({"lidg", "ader"}));
  cmd_vn->add_option("--dim", vn_args.dim)->check(CLI::Range(1, 3));
  cmd_vn->add_option("--order", vn_args.order)->check(CLI::Range(0, 14));
  cmd_vn->add_option("--cfl-min", vn_args.cfl_min)->required()
      ->check(CLI::NonNegativeNumber);
  cmd_vn->add_option("--cfl-max", vn_args.cfl_max)->required()
      ->check(CLI::PositiveNumber);
  cmd_vn->add_option("--cfl-steps", vn_args.cfl_steps)->check(CLI::PositiveNumber);
  cmd_vn->add_option("--samples", vn_args.samples, "Wavenumber samples per axis")
      ->check(CLI::Range(2, 100000));
  cmd_vn->add_option("--output", vn_args.output);
  cmd_vn->set_config("--config", "", "Flat key=value config file (flags win)");

  StabilityNormArgs sn_args;
  CLI::App* cmd_sn = app.add_subcommand(
      "stability-norm", "Weighted and spectral norms of the update matrix");
  cmd_sn->add_option("--max-order", sn_args.max_order)->check(CLI::Range(0, 14));
  cmd_sn->add_option("--cfl-list", sn_args.cfl_list)
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cmd_sn->add_option("--output", sn_args.output);
  cmd_sn->set_config("--config", "", "Flat key=value config file (flags win)");

  MaxCflArgs mc_args;
  CLI::App* cmd_mc =
      app.add_subcommand("max-cfl", "Largest stable CFL norm by bisection");
  cmd_mc->add_option("--scheme", mc_args.scheme)
      ->check(CLI::IsMember({"lidg", "ader"}));
  cmd_mc->add_option("--dim", mc_args.dim)->check(CLI::Range(1, 3));
  cmd_mc->add_option("--orders", mc_args.orders)->delimiter(',')
      ->check(CLI::Range(0, 14));
  cmd_mc->add_option("--tol", mc_args.tol)->check(CLI::PositiveNumber);
  cmd_mc->add_option("--samples", mc_args.samples)->check(CLI::Range(2, 100000));
  cmd_mc->add_option("--output", mc_args.output);
  cmd_mc->set_config("--config", "", "Flat key=value config file (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) {
      run_args.sizes = {run_elements};
      return do_converge(run_args);
    }
    if (cmd_conv->parsed()) return do_converge(conv_args);
    if (cmd_vn->parsed()) return do_vonneumann(vn_args);
    if (cmd_sn->parsed()) return do_stability_norm(sn_args);
    if (cmd_mc->parsed()) return do_max_cfl(mc_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lidg
