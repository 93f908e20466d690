#pragma once

/// @file scenarios.hpp
/// @brief Experiment scenarios: configuration, sweeps and their reports.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "triodflow/initial_data.hpp"
#include "triodflow/metrics.hpp"
#include "triodflow/spectral.hpp"
#include "triodflow/stepper.hpp"

namespace triodflow {

enum class ScenarioKind {
  convergence,
  convergence_time,
  epsilon_study,
  conditioning_mass,
  conditioning_system,
  spiral,
  self_intersect,
  custom,
};

ScenarioKind parse_scenario_kind(const std::string& name);
std::string to_string(ScenarioKind kind);

/// Named initial data for the custom scenario.
TriodState make_named_initial(const std::string& name, std::size_t J);

/// Validated scenario parameters. Only the fields relevant to `kind` are meaningful.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::custom;
  std::filesystem::path output_dir = "triodflow_out";

  double epsilon = 1e-3;
  std::vector<double> epsilons;
  std::size_t J = 20;
  std::vector<std::size_t> Js;
  std::vector<std::size_t> Ns;
  std::optional<std::size_t> N;
  std::optional<double> delta;
  std::vector<double> deltas;
  /// delta = delta_factor * h^2 when set
  std::optional<double> delta_factor;
  std::optional<double> T;
  std::size_t J_ref = 0;
  std::size_t N_ref = 0;
  std::optional<double> velocity_threshold;
  std::size_t max_steps = 0;
  double z = 0.1;
  bool rotated = true;
  JunctionFix junction_fix = JunctionFix::shift;
  std::string preset;
  std::string initial;
  std::vector<double> snapshot_times;
  std::size_t snapshot_stride = 0;
  bool record_wall_time = false;
};

/// Defaults of a scenario; `paper_scale` selects the larger reference run where one exists.
ScenarioConfig default_config(ScenarioKind kind, bool paper_scale = false);

/// Parses a JSON config. Unknown keys and keys that do not belong to the
/// scenario raise ConfigError, as do non-nested grids.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError if the combination of parameters cannot be run.
void validate_config(const ScenarioConfig& cfg);

/// Number of concurrent sweep points: TRIODFLOW_WORKERS if set, else the core count.
std::size_t worker_count();

/// Runs task(k) for k in [0, n) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task);

/// Per-run checks gathered by an observer while evolving.
struct RunDiagnostics {
  std::size_t steps = 0;
  std::size_t total_cg_iterations = 0;
  /// largest energy(n) - energy(n-1) over the run (negative if strictly decreasing)
  double max_energy_increase = 0.0;
  /// junction copies and endpoints bit-identical at every step
  bool invariants_hold = true;
  double min_segment_length = 0.0;
};

RunDiagnostics diagnose(const TriodState& initial, const Trajectory& traj);

struct NestedRow {
  SimParams params;
  ErrorReport errors;
  RunDiagnostics diagnostics;
};

struct NestedStudy {
  SimParams reference;
  std::vector<NestedRow> rows;
  RunDiagnostics reference_diagnostics;
};

/// Runs every coarse discretisation, then streams one reference run through
/// error accumulators for all of them.
NestedStudy run_nested_study(const std::function<TriodState(std::size_t)>& initial,
                             const std::vector<SimParams>& coarse, const SimParams& reference,
                             std::size_t workers);

/// Spatial study with delta = factor * h^2 over [0, T].
NestedStudy run_convergence_study(double epsilon, const std::vector<std::size_t>& Js, double delta_factor, double T,
                                  std::size_t J_ref, std::size_t workers);

/// Temporal study at fixed J over [0, T].
NestedStudy run_temporal_study(double epsilon, std::size_t J, const std::vector<std::size_t>& Ns, std::size_t N_ref,
                               double T, std::size_t workers);

struct EpsilonRow {
  double epsilon = 0.0;
  std::size_t N_tot = 0;
  bool relaxed = false;
  EpsilonErrors errors;
  JunctionCoefficients coefficients;
  TriodState final_state;
  RunDiagnostics diagnostics;
};

std::vector<EpsilonRow> run_epsilon_study(const std::vector<double>& epsilons, std::size_t J, double delta,
                                          double threshold, std::size_t max_steps, double z, std::size_t workers);

struct MassConditioningRow {
  double epsilon = 0.0;
  SpectrumReport spectrum;
};

std::vector<MassConditioningRow> run_mass_conditioning(const std::vector<double>& epsilons, std::size_t J,
                                                       double delta, bool rotated, std::size_t workers);

struct SystemConditioningRow {
  std::size_t J = 0;
  double delta = 0.0;
  std::vector<SpectrumReport> spectra;  ///< one per epsilon
};

std::vector<SystemConditioningRow> run_system_conditioning(const std::vector<std::size_t>& Js,
                                                           const std::vector<double>& epsilons, double delta_factor,
                                                           std::size_t workers);

struct StressRun {
  SimParams params;
  std::vector<double> times;
  std::vector<double> min_segment_lengths;  ///< per step, including the initial state
  std::vector<TriodState> snapshots;        ///< at the requested snapshot times
  std::vector<double> snapshot_times;
  RunDiagnostics diagnostics;
  TriodState final_state;
};

/// Evolves for a fixed number of steps, recording the minimal segment length
/// at every step and copies of the state at the requested times.
StressRun run_stress(const TriodState& initial, const SimParams& params, const std::vector<double>& snapshot_times);

/// Number of steps of size delta covering [0, T]; throws ConfigError unless T/delta is an integer.
std::size_t steps_for(double T, double delta);

struct ScenarioOutcome {
  std::vector<std::filesystem::path> files;
  nlohmann::ordered_json summary;
};

/// Runs a scenario and writes its CSV, JSON summary and SVG files into cfg.output_dir.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg);

}  // namespace triodflow
