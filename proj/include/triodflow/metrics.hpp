#pragma once

/// @file metrics.hpp
/// @brief Errors against nested reference solutions, EOCs, and junction diagnostics.

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "triodflow/curve_mesh.hpp"
#include "triodflow/stepper.hpp"

namespace triodflow {

/// Index maps between a coarse discretisation and a finer reference one whose
/// space and time grids contain the coarse grids.
class NestedGridMap {
 public:
  /// Throws GridMismatch unless J divides J_ref, N divides N_ref and both runs
  /// cover the same time interval.
  NestedGridMap(std::size_t J, std::size_t N, double delta, std::size_t J_ref, std::size_t N_ref, double delta_ref);
  NestedGridMap(const SimParams& coarse, const SimParams& reference);

  std::size_t spatial_ratio() const noexcept { return m_; }
  std::size_t temporal_ratio() const noexcept { return k_; }
  std::size_t J() const noexcept { return J_; }
  std::size_t N() const noexcept { return N_; }
  std::size_t J_ref() const noexcept { return J_ * m_; }
  std::size_t N_ref() const noexcept { return N_ * k_; }
  double delta() const noexcept { return delta_; }
  double delta_ref() const noexcept { return delta_ref_; }

  std::size_t j_ref(std::size_t j) const noexcept { return j * m_; }
  std::size_t n_ref(std::size_t n) const noexcept { return n * k_; }
  /// Coarse node at or left of a reference node.
  std::size_t j_of(std::size_t j_ref) const noexcept { return j_ref / m_; }
  /// Coarse time level at or before a reference time level.
  std::size_t n_of(std::size_t n_ref) const noexcept { return n_ref / k_; }

 private:
  std::size_t J_;
  std::size_t N_;
  std::size_t m_;
  std::size_t k_;
  double delta_;
  double delta_ref_;
};

struct ErrorReport {
  double E1 = 0.0;  ///< max squared nodal position error
  double E2 = 0.0;  ///< max over time of the squared L2 error of the derivative
  double E3 = 0.0;  ///< time-integrated squared L2 error of the discrete velocity
  double E4 = 0.0;  ///< max junction sector deviation from 120 degrees
};

/// Streams reference states one time level at a time and accumulates E1-E3 of a
/// coarse trajectory recorded at every step. Feed it from an evolve observer so the
/// reference trajectory never has to be stored.
class ErrorAccumulator {
 public:
  /// Throws GridMismatch if the coarse trajectory is strided or does not match the map.
  ErrorAccumulator(const Trajectory& coarse, NestedGridMap map);

  /// Reference states must arrive in order n_ref = 0, 1, 2, ...
  void observe(std::size_t n_ref, const TriodState& reference);

  /// True once every reference level up to N_ref has been observed.
  bool complete() const noexcept;

  /// E1-E3 so far; E4 is left at zero (it needs no reference).
  ErrorReport report() const;

 private:
  const Trajectory* coarse_;
  NestedGridMap map_;
  std::optional<TriodState> previous_;
  std::size_t next_ = 0;
  double e1_ = 0.0;
  double e2_ = 0.0;
  double e3_ = 0.0;
};

/// max over coarse levels, nodes and curves of |U - U_ref|^2.
double error_E1(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map);
/// max over coarse levels of sum over reference elements of h_ref |U_x - U_ref,x|^2.
double error_E2(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map);
/// sum over reference steps of delta_ref times the exact L2 norm squared of the
/// velocity difference; both trajectories must be recorded at every step.
double error_E3(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map);
/// max over recorded states and sectors of |theta - 120| in degrees.
double error_E4(const Trajectory& traj);
double max_angle_deviation(const TriodState& triod);

ErrorReport compute_errors(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map);

/// EOCs of consecutive (resolution, error) pairs:
/// (log e_a - log e_b) / (log r_b - log r_a).
std::vector<double> eoc(const std::vector<std::pair<double, double>>& pairs);

struct EpsilonErrors {
  double angle = 0.0;     ///< max |theta - 120| in degrees
  double position = 0.0;  ///< distance of the junction from the straight-segment equilibrium
};

EpsilonErrors epsilon_errors(const TriodState& final_state, double z = 0.1);

struct JunctionCoefficients {
  /// 1 + epsilon |u_x| on the element next to the junction, per curve
  std::array<double, 3> tension{};
  /// max pairwise difference of sin(theta_i) / tension_i
  double sine_law_residual = 0.0;
};

JunctionCoefficients junction_coefficients(const TriodState& triod, double epsilon);

}  // namespace triodflow
