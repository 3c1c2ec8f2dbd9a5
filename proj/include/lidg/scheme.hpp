#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "lidg/local_operator.hpp"
#include "lidg/mesh.hpp"

namespace lidg {

/// Nodal field over the mesh at one time level: per element, (p+1)^dim
/// spatial GLL values (row-major, last axis fastest — matching time slices
/// of ElementSolution).
template <typename S>
struct FieldStateT {
  const CartesianMesh* mesh = nullptr;
  int order_p = 0;
  std::vector<Eigen::VectorX<S>> elems;
  double time = 0.0;
};
using FieldState = FieldStateT<double>;

struct StageReport {
  int local_solves_per_element = 0;
  int communication_stages = 0;
};

enum class SchemeChoice { Lidg, Ader };

/// Physical coordinates of the spatial GLL node `sp` (flat, row-major) of
/// element `elem`.
Vec3 node_coords(const CartesianMesh& mesh, int p, int elem, int sp);

/// Collocation projection: sample the initial condition at mapped GLL nodes.
FieldState project_initial_condition(const CartesianMesh& mesh, int p,
                                     const std::function<double(const Vec3&)>& ic);

/// Global discrete integrals (GLL quadrature, physical scaling, fixed
/// summation order for reproducibility).
double total_mass(const FieldState& state);
double total_energy(const FieldState& state);  // 1/2 integral of q^2

/// Optional record of one 1D step's intermediate space-time solutions,
/// used by the energy-identity analysis.
template <typename S>
struct StepCaptureT {
  std::vector<ElementSolutionT<S>> predictors;
  std::vector<ElementSolutionT<S>> correctors;
};
using StepCapture = StepCaptureT<double>;

// The step functions are templated on the scalar so the identical stage
// logic serves both real time stepping (S = double, wrap phases 1) and the
// Bloch / von Neumann analysis (S = complex, single-element mesh, traces
// fetched across the periodic boundary picking up the phase e^{-i theta_a}).

template <typename S>
std::pair<FieldStateT<S>, StageReport> step_lidg(
    const FieldStateT<S>& state, const SchemeConfig& cfg, OperatorCache& cache,
    const std::array<S, 3>& wrap_low = {S(1), S(1), S(1)},
    StepCaptureT<S>* capture = nullptr);

template <typename S>
std::pair<FieldStateT<S>, StageReport> step_ader(
    const FieldStateT<S>& state, const SchemeConfig& cfg, OperatorCache& cache,
    const std::array<S, 3>& wrap_low = {S(1), S(1), S(1)});

/// Dimension-checked spellings of the locally implicit step.
std::pair<FieldState, StageReport> step_lidg_1d(const FieldState& state,
                                                const SchemeConfig& cfg,
                                                OperatorCache& cache,
                                                StepCapture* capture = nullptr);
std::pair<FieldState, StageReport> step_lidg_2d(const FieldState& state,
                                                const SchemeConfig& cfg,
                                                OperatorCache& cache);
std::pair<FieldState, StageReport> step_lidg_3d(const FieldState& state,
                                                const SchemeConfig& cfg,
                                                OperatorCache& cache);
/// Classic ADER-DG step: the predictor supplies both volume and flux terms
/// of an explicit corrector; only the temporal terms are implicit (and they
/// are local in space, so the corrector is one time-operator solve).
FieldState step_ader_standard(const FieldState& state, const SchemeConfig& cfg,
                              OperatorCache& cache);

struct RunResult {
  FieldState state;
  int steps = 0;
};

/// Repeated stepping until t_final with final-step truncation (the last step
/// shrinks dt and rescales nu so the run lands on t_final exactly). Aborts
/// with a runtime error if max|q| exceeds 1e6 x the initial max (instability).
RunResult run(const CartesianMesh& mesh, const SchemeConfig& cfg,
              const std::function<double(const Vec3&)>& initial_condition,
              SchemeChoice scheme);

}  // namespace lidg
