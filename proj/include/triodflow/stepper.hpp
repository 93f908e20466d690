#pragma once

/// @file stepper.hpp
/// @brief IMEX time stepping: geometry frozen at the old level, stiffness implicit.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "triodflow/assembly.hpp"
#include "triodflow/curve_mesh.hpp"

namespace triodflow {

struct CgOptions {
  double tol_rel = 1e-10;
  /// Iteration cap as a multiple of the number of scalar unknowns.
  std::size_t max_iter_factor = 20;
};

struct CgResult {
  std::vector<Vec2> x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradients from a zero initial guess on the constrained subspace.
/// Throws CgDidNotConverge once max_iter iterations are exceeded.
CgResult cg_solve(const ConstrainedOperator& op, std::span<const Vec2> rhs, double tol_rel, std::size_t max_iter);

struct StepReport {
  std::size_t cg_iterations = 0;
  double final_relative_residual = 0.0;
  double energy_after = 0.0;
  double min_segment_length_after = 0.0;
  /// max over curves and nodes 1..J of |increment| / delta
  double max_nodal_speed = 0.0;
};

std::pair<TriodState, StepReport> time_step(const TriodState& triod, const SimParams& params,
                                            const CgOptions& cg = {});

/// Fixed-N run, optionally cut short once the nodal speed drops below a threshold.
struct StoppingRule {
  std::optional<double> velocity_threshold;

  static StoppingRule fixed_steps() { return {}; }
  static StoppingRule velocity_below(double threshold) { return {threshold}; }
};

struct Trajectory {
  SimParams params;
  std::size_t stride = 1;
  /// states[k] is the state after k*stride steps
  std::vector<TriodState> states;
  /// reports[n-1] belongs to step n
  std::vector<StepReport> reports;
  TriodState final_state;
  /// index of the last step taken (N_tot when the velocity rule fired)
  std::size_t steps_taken = 0;
  bool stopped_by_velocity = false;
};

/// Called with (step index, state) for every state, including the initial one.
using StateObserver = std::function<void(std::size_t, const TriodState&)>;

/// stride == 0 records only the initial and final states.
Trajectory evolve(const TriodState& initial, const SimParams& params, const StoppingRule& stop = {},
                  std::size_t stride = 1, const StateObserver& observer = {}, const CgOptions& cg = {});

}  // namespace triodflow
