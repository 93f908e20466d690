#include "triodflow/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "triodflow/errors.hpp"
#include "triodflow/report.hpp"

namespace triodflow {

namespace {

constexpr std::array<std::pair<ScenarioKind, const char*>, 8> kKindNames{{
    {ScenarioKind::convergence, "convergence"},
    {ScenarioKind::convergence_time, "convergence_time"},
    {ScenarioKind::epsilon_study, "epsilon_study"},
    {ScenarioKind::conditioning_mass, "conditioning_mass"},
    {ScenarioKind::conditioning_system, "conditioning_system"},
    {ScenarioKind::spiral, "spiral"},
    {ScenarioKind::self_intersect, "self_intersect"},
    {ScenarioKind::custom, "custom"},
}};

}  // namespace

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (const auto& [kind, text] : kKindNames) {
    if (name == text) return kind;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

std::string to_string(ScenarioKind kind) {
  for (const auto& [k, text] : kKindNames) {
    if (k == kind) return text;
  }
  return "unknown";
}

TriodState make_named_initial(const std::string& name, std::size_t J) {
  if (name == "convergence") return make_convergence_initial(J, true);
  if (name == "convergence_unrotated") return make_convergence_initial(J, false);
  if (name == "epsilon") return make_epsilon_initial(J);
  if (name == "spiral") return make_spiral_initial(J);
  if (name == "self_intersect") return make_self_intersect_initial(J);
  if (name == "steiner") return make_steiner_triod(J);
  throw ConfigError("unknown initial data '" + name +
                    "' (expected convergence, convergence_unrotated, epsilon, spiral, self_intersect or steiner)");
}

// ---------------------------------------------------------------------------
// Configuration

ScenarioConfig default_config(ScenarioKind kind, bool paper_scale) {
  ScenarioConfig c;
  c.kind = kind;
  switch (kind) {
    case ScenarioKind::convergence:
      c.epsilon = 1e-3;
      c.Js = {20, 30, 36, 45, 60, 90};
      c.delta_factor = 0.2;
      c.T = 0.2;
      c.J_ref = paper_scale ? 360 : 180;
      break;
    case ScenarioKind::convergence_time:
      c.epsilon = 1e-3;
      c.J = 60;
      c.Ns = {3456, 4320, 5760, 6912, 8640, 11520, 17280};
      c.N_ref = 34560;
      c.T = 0.2;
      break;
    case ScenarioKind::epsilon_study:
      c.epsilons = {1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5};
      c.J = 20;
      c.delta = 0.01;
      c.velocity_threshold = 1e-6;
      c.max_steps = 200000;
      c.z = 0.1;
      break;
    case ScenarioKind::conditioning_mass:
      c.epsilons = {1.0, 0.3, 0.09, 0.027, 0.0081, 0.00243, 0.000729, 0.0002187, 6.561e-05, 1.9683e-05, 5.9049e-06};
      c.J = 20;
      c.delta = 0.0025;
      c.rotated = true;
      break;
    case ScenarioKind::conditioning_system:
      c.Js = {10, 16, 24, 36, 48, 64};
      c.epsilons = {1e-1, 1e-5};
      c.delta_factor = 0.4;
      break;
    case ScenarioKind::spiral:
      c.epsilon = 1e-3;
      c.J = 60;
      c.deltas = {4e-4, 2e-4, 1e-4};
      c.T = 0.48;
      c.snapshot_times = {0.0, 0.04, 0.08, 0.16, 0.28, 0.48};
      break;
    case ScenarioKind::self_intersect:
      c.preset = "text";
      c.epsilon = 1e-3;
      c.J = 60;
      c.delta = 1e-4;
      c.T = 0.5;
      c.snapshot_times = {0.0, 0.02, 0.05, 0.06, 0.07, 0.5};
      c.junction_fix = JunctionFix::shift;
      break;
    case ScenarioKind::custom:
      c.epsilon = 1e-3;
      c.J = 20;
      break;
  }
  return c;
}

namespace {

const std::map<ScenarioKind, std::set<std::string>>& allowed_keys() {
  static const std::map<ScenarioKind, std::set<std::string>> keys{
      {ScenarioKind::convergence, {"epsilon", "J_list", "delta_factor", "T", "J_ref", "N_ref", "paper_scale"}},
      {ScenarioKind::convergence_time, {"epsilon", "J", "N_list", "N_ref", "T"}},
      {ScenarioKind::epsilon_study, {"epsilon_list", "J", "delta", "threshold", "max_steps", "z"}},
      {ScenarioKind::conditioning_mass, {"epsilon_list", "J", "delta", "rotated"}},
      {ScenarioKind::conditioning_system, {"J_list", "epsilon_list", "delta_factor"}},
      {ScenarioKind::spiral, {"epsilon", "J", "delta_list", "T", "snapshot_times"}},
      {ScenarioKind::self_intersect, {"preset", "epsilon", "J", "delta", "T", "junction_fix", "snapshot_times"}},
      {ScenarioKind::custom,
       {"initial", "epsilon", "J", "delta", "N", "T", "threshold", "snapshot_stride", "snapshot_times"}},
  };
  return keys;
}

const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys{"scenario", "output_dir", "record_wall_time"};
  return keys;
}

template <class T>
T get_as(const nlohmann::json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

double positive(const nlohmann::json& doc, const std::string& key) {
  const double v = get_as<double>(doc, key);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config key '" + key + "' must be positive");
  return v;
}

std::size_t count(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ConfigError("config key '" + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> positive_list(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError("config key '" + key + "' must be a nonempty list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !(e.get<double>() > 0.0)) {
      throw ConfigError("config key '" + key + "' must contain positive numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::size_t> count_list(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError("config key '" + key + "' must be a nonempty list");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() <= 0) {
      throw ConfigError("config key '" + key + "' must contain positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::vector<double> time_list(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || e.get<double>() < 0.0) {
      throw ConfigError("config key '" + key + "' must contain nonnegative times");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::size_t snapshot_step(double t, double delta) {
  const double n = std::round(t / delta);
  if (std::abs(n * delta - t) > 1e-9 * std::max(1.0, t)) {
    throw ConfigError("snapshot time " + format_double(t) + " is not a multiple of delta " + format_double(delta));
  }
  return static_cast<std::size_t>(n);
}

std::size_t steps_for_factor(double T, double factor, std::size_t J) {
  return steps_for(T, factor / static_cast<double>(J * J));
}

}  // namespace

std::size_t steps_for(double T, double delta) {
  if (!(T > 0.0) || !(delta > 0.0)) throw ConfigError("T and delta must be positive");
  const double n = std::round(T / delta);
  if (n < 1.0 || std::abs(n * delta - T) > 1e-9 * T) {
    throw ConfigError("T = " + format_double(T) + " is not an integer multiple of delta = " + format_double(delta));
  }
  return static_cast<std::size_t>(n);
}

ScenarioConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("scenario")) throw ConfigError("config is missing the 'scenario' key");
  const ScenarioKind kind = parse_scenario_kind(get_as<std::string>(doc, "scenario"));
  const auto& allowed = allowed_keys().at(kind);
  for (const auto& [key, value] : doc.items()) {
    if (!common_keys().contains(key) && !allowed.contains(key)) {
      throw ConfigError("key '" + key + "' is not a parameter of scenario '" + to_string(kind) + "'");
    }
  }

  const bool paper_scale = doc.contains("paper_scale") && get_as<bool>(doc, "paper_scale");
  ScenarioConfig c = default_config(kind, paper_scale);
  if (doc.contains("output_dir")) c.output_dir = get_as<std::string>(doc, "output_dir");
  if (doc.contains("record_wall_time")) c.record_wall_time = get_as<bool>(doc, "record_wall_time");

  if (doc.contains("epsilon")) c.epsilon = positive(doc, "epsilon");
  if (doc.contains("epsilon_list")) c.epsilons = positive_list(doc, "epsilon_list");
  if (doc.contains("J")) c.J = count(doc, "J");
  if (doc.contains("J_list")) c.Js = count_list(doc, "J_list");
  if (doc.contains("N_list")) c.Ns = count_list(doc, "N_list");
  if (doc.contains("N")) c.N = count(doc, "N");
  if (doc.contains("delta")) c.delta = positive(doc, "delta");
  if (doc.contains("delta_list")) c.deltas = positive_list(doc, "delta_list");
  if (doc.contains("delta_factor")) c.delta_factor = positive(doc, "delta_factor");
  if (doc.contains("T")) c.T = positive(doc, "T");
  if (doc.contains("J_ref")) c.J_ref = count(doc, "J_ref");
  if (doc.contains("N_ref")) c.N_ref = count(doc, "N_ref");
  if (doc.contains("threshold")) c.velocity_threshold = positive(doc, "threshold");
  if (doc.contains("max_steps")) c.max_steps = count(doc, "max_steps");
  if (doc.contains("z")) c.z = positive(doc, "z");
  if (doc.contains("rotated")) c.rotated = get_as<bool>(doc, "rotated");
  if (doc.contains("junction_fix")) c.junction_fix = parse_junction_fix(get_as<std::string>(doc, "junction_fix"));
  if (doc.contains("initial")) c.initial = get_as<std::string>(doc, "initial");
  if (doc.contains("snapshot_times")) c.snapshot_times = time_list(doc, "snapshot_times");
  if (doc.contains("snapshot_stride")) c.snapshot_stride = count(doc, "snapshot_stride");
  if (doc.contains("preset")) {
    c.preset = get_as<std::string>(doc, "preset");
    if (c.preset == "text") {
      c.J = 60;
    } else if (c.preset == "figure") {
      c.J = 20;
    } else {
      throw ConfigError("unknown self_intersect preset '" + c.preset + "' (expected text or figure)");
    }
    if (doc.contains("J")) c.J = count(doc, "J");
  }

  if (kind == ScenarioKind::custom) {
    if (c.initial.empty()) throw ConfigError("custom scenario requires 'initial'");
    (void)make_named_initial(c.initial, std::max<std::size_t>(c.J, 2));
    if (!c.delta) throw ConfigError("custom scenario requires 'delta'");
    if (c.N.has_value() == c.T.has_value()) throw ConfigError("custom scenario requires exactly one of 'N' and 'T'");
  }
  if (kind == ScenarioKind::convergence && doc.contains("N_ref")) {
    const std::size_t derived = steps_for_factor(*c.T, *c.delta_factor, c.J_ref);
    if (c.N_ref != derived) {
      throw ConfigError("N_ref = " + std::to_string(c.N_ref) + " does not match T / (delta_factor h_ref^2) = " +
                        std::to_string(derived));
    }
  }
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void validate_config(const ScenarioConfig& c) {
  auto need_J = [](std::size_t J) {
    if (J < 2) throw ConfigError("J must be at least 2");
  };
  switch (c.kind) {
    case ScenarioKind::convergence: {
      if (c.Js.empty()) throw ConfigError("J_list must not be empty");
      const std::size_t N_ref = steps_for_factor(*c.T, *c.delta_factor, c.J_ref);
      for (std::size_t J : c.Js) {
        need_J(J);
        const std::size_t N = steps_for_factor(*c.T, *c.delta_factor, J);
        try {
          (void)NestedGridMap(J, N, *c.delta_factor / double(J * J), c.J_ref, N_ref, *c.delta_factor / double(c.J_ref * c.J_ref));
        } catch (const GridMismatch& e) {
          throw ConfigError(std::string("grid not nested in the reference: ") + e.what());
        }
      }
      break;
    }
    case ScenarioKind::convergence_time:
      need_J(c.J);
      for (std::size_t N : c.Ns) {
        if (c.N_ref % N != 0) {
          throw ConfigError("N = " + std::to_string(N) + " does not divide N_ref = " + std::to_string(c.N_ref));
        }
      }
      break;
    case ScenarioKind::epsilon_study:
      need_J(c.J);
      if (!(c.z > 0.0 && c.z < 1.0)) throw ConfigError("z must lie in (0, 1)");
      break;
    case ScenarioKind::conditioning_mass:
    case ScenarioKind::self_intersect:
      need_J(c.J);
      if (c.kind == ScenarioKind::self_intersect) {
        for (double t : c.snapshot_times) snapshot_step(t, *c.delta);
        steps_for(*c.T, *c.delta);
      }
      break;
    case ScenarioKind::conditioning_system:
      for (std::size_t J : c.Js) need_J(J);
      break;
    case ScenarioKind::spiral:
      need_J(c.J);
      for (double d : c.deltas) {
        steps_for(*c.T, d);
        for (double t : c.snapshot_times) snapshot_step(t, d);
      }
      break;
    case ScenarioKind::custom:
      need_J(c.J);
      if (!c.delta) throw ConfigError("custom scenario requires 'delta'");
      if (c.N.has_value() == c.T.has_value()) throw ConfigError("custom scenario requires exactly one of 'N' and 'T'");
      if (c.T) steps_for(*c.T, *c.delta);
      for (double t : c.snapshot_times) snapshot_step(t, *c.delta);
      break;
  }
}

// ---------------------------------------------------------------------------
// Parallel sweeps

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRIODFLOW_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<std::size_t>(v);
  }
  return n;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          task(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

bool invariants_hold(const TriodState& s, const TriodState& initial) {
  const Vec2 p = s.curves[0].nodes.front();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& c = s.curves[i];
    if (!(c.nodes.front() == p)) return false;
    if (!(c.nodes.back() == c.endpoint) || !(c.endpoint == initial.curves[i].endpoint)) return false;
  }
  return true;
}

/// Observer that checks the junction and endpoint invariants at every step.
class InvariantMonitor {
 public:
  explicit InvariantMonitor(const TriodState& initial) : initial_(&initial) {}
  void operator()(std::size_t, const TriodState& s) {
    if (!invariants_hold(s, *initial_)) ok_ = false;
  }
  bool ok() const noexcept { return ok_; }

 private:
  const TriodState* initial_;
  bool ok_ = true;
};

RunDiagnostics summarize(const TriodState& initial, const Trajectory& traj, bool invariants_ok) {
  RunDiagnostics d;
  d.steps = traj.steps_taken;
  d.invariants_hold = invariants_ok;
  double prev = energy(initial, traj.params.epsilon());
  d.max_energy_increase = -std::numeric_limits<double>::infinity();
  d.min_segment_length = min_segment_length(initial);
  for (const auto& r : traj.reports) {
    d.total_cg_iterations += r.cg_iterations;
    d.max_energy_increase = std::max(d.max_energy_increase, r.energy_after - prev);
    prev = r.energy_after;
    d.min_segment_length = std::min(d.min_segment_length, r.min_segment_length_after);
  }
  if (traj.reports.empty()) d.max_energy_increase = 0.0;
  return d;
}

Trajectory monitored_evolve(const TriodState& initial, const SimParams& params, const StoppingRule& stop,
                            std::size_t stride, RunDiagnostics& diag, const StateObserver& extra = {}) {
  InvariantMonitor monitor(initial);
  const StateObserver obs = [&](std::size_t n, const TriodState& s) {
    monitor(n, s);
    if (extra) extra(n, s);
  };
  Trajectory traj = evolve(initial, params, stop, stride, obs);
  diag = summarize(initial, traj, monitor.ok());
  return traj;
}

}  // namespace

RunDiagnostics diagnose(const TriodState& initial, const Trajectory& traj) {
  bool ok = true;
  for (const auto& s : traj.states) ok = ok && invariants_hold(s, initial);
  return summarize(initial, traj, ok);
}

// ---------------------------------------------------------------------------
// Studies

NestedStudy run_nested_study(const std::function<TriodState(std::size_t)>& initial,
                             const std::vector<SimParams>& coarse, const SimParams& reference,
                             std::size_t workers) {
  std::vector<NestedGridMap> maps;
  maps.reserve(coarse.size());
  for (const auto& p : coarse) maps.emplace_back(p, reference);

  std::vector<std::optional<Trajectory>> trajs(coarse.size());
  std::vector<RunDiagnostics> diags(coarse.size());
  parallel_for(coarse.size(), workers, [&](std::size_t k) {
    const TriodState init = initial(coarse[k].J());
    trajs[k] = monitored_evolve(init, coarse[k], StoppingRule::fixed_steps(), 1, diags[k]);
  });

  std::vector<ErrorAccumulator> accs;
  accs.reserve(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) accs.emplace_back(*trajs[k], maps[k]);

  NestedStudy study{reference, {}, {}};
  const TriodState ref_init = initial(reference.J());
  monitored_evolve(ref_init, reference, StoppingRule::fixed_steps(), 0, study.reference_diagnostics,
                   [&](std::size_t n, const TriodState& s) {
                     for (auto& a : accs) a.observe(n, s);
                   });

  for (std::size_t k = 0; k < coarse.size(); ++k) {
    ErrorReport rep = accs[k].report();
    rep.E4 = error_E4(*trajs[k]);
    study.rows.push_back(NestedRow{coarse[k], rep, diags[k]});
  }
  return study;
}

NestedStudy run_convergence_study(double epsilon, const std::vector<std::size_t>& Js, double delta_factor, double T,
                                  std::size_t J_ref, std::size_t workers) {
  auto params_for = [&](std::size_t J) {
    return SimParams(epsilon, J, delta_factor / static_cast<double>(J * J), steps_for_factor(T, delta_factor, J));
  };
  std::vector<SimParams> coarse;
  for (std::size_t J : Js) coarse.push_back(params_for(J));
  return run_nested_study([](std::size_t J) { return make_convergence_initial(J); }, coarse,
                          params_for(J_ref), workers);
}

NestedStudy run_temporal_study(double epsilon, std::size_t J, const std::vector<std::size_t>& Ns, std::size_t N_ref,
                               double T, std::size_t workers) {
  std::vector<SimParams> coarse;
  for (std::size_t N : Ns) coarse.emplace_back(epsilon, J, T / static_cast<double>(N), N);
  return run_nested_study([](std::size_t j) { return make_convergence_initial(j); }, coarse,
                          SimParams(epsilon, J, T / static_cast<double>(N_ref), N_ref), workers);
}

std::vector<EpsilonRow> run_epsilon_study(const std::vector<double>& epsilons, std::size_t J, double delta,
                                          double threshold, std::size_t max_steps, double z, std::size_t workers) {
  std::vector<EpsilonRow> rows(epsilons.size());
  parallel_for(epsilons.size(), workers, [&](std::size_t k) {
    const SimParams params(epsilons[k], J, delta, max_steps);
    const TriodState init = make_epsilon_initial(J, z);
    EpsilonRow& row = rows[k];
    const Trajectory traj =
        monitored_evolve(init, params, StoppingRule::velocity_below(threshold), 0, row.diagnostics);
    row.epsilon = epsilons[k];
    row.N_tot = traj.steps_taken;
    row.relaxed = traj.stopped_by_velocity;
    row.errors = epsilon_errors(traj.final_state, z);
    row.coefficients = junction_coefficients(traj.final_state, epsilons[k]);
    row.final_state = traj.final_state;
  });
  return rows;
}

std::vector<MassConditioningRow> run_mass_conditioning(const std::vector<double>& epsilons, std::size_t J,
                                                       double delta, bool rotated, std::size_t workers) {
  const TriodState triod = make_convergence_initial(J, rotated);
  std::vector<MassConditioningRow> rows(epsilons.size());
  parallel_for(epsilons.size(), workers, [&](std::size_t k) {
    rows[k] = MassConditioningRow{epsilons[k], equilibrated_mass_spectrum(triod, epsilons[k], delta)};
  });
  std::vector<std::pair<double, double>> seq;
  for (const auto& r : rows) seq.emplace_back(r.epsilon, r.spectrum.cond2);
  if (seq.size() >= 2) {
    const auto e = conditioning_eoc(seq);
    for (std::size_t l = 1; l < rows.size(); ++l) rows[l].spectrum.eoc_vs_previous = e[l - 1];
  }
  return rows;
}

std::vector<SystemConditioningRow> run_system_conditioning(const std::vector<std::size_t>& Js,
                                                           const std::vector<double>& epsilons, double delta_factor,
                                                           std::size_t workers) {
  std::vector<SystemConditioningRow> rows(Js.size());
  for (std::size_t k = 0; k < Js.size(); ++k) {
    rows[k].J = Js[k];
    rows[k].delta = delta_factor / static_cast<double>(Js[k] * Js[k]);
    rows[k].spectra.resize(epsilons.size());
  }
  const std::size_t tasks = Js.size() * epsilons.size();
  parallel_for(tasks, workers, [&](std::size_t t) {
    auto& row = rows[t / epsilons.size()];
    const std::size_t e = t % epsilons.size();
    row.spectra[e] = system_condition(make_convergence_initial(row.J), epsilons[e], row.delta);
  });
  return rows;
}

StressRun run_stress(const TriodState& initial, const SimParams& params, const std::vector<double>& snapshot_times) {
  StressRun run{params, {}, {}, {}, {}, {}, initial};
  std::map<std::size_t, double> wanted;
  for (double t : snapshot_times) wanted.emplace(snapshot_step(t, params.delta()), t);
  const Trajectory traj = monitored_evolve(initial, params, StoppingRule::fixed_steps(), 0, run.diagnostics,
                                           [&](std::size_t n, const TriodState& s) {
                                             run.times.push_back(static_cast<double>(n) * params.delta());
                                             run.min_segment_lengths.push_back(min_segment_length(s));
                                             if (auto it = wanted.find(n); it != wanted.end()) {
                                               run.snapshots.push_back(s);
                                               run.snapshot_times.push_back(it->second);
                                             }
                                           });
  run.final_state = traj.final_state;
  return run;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

using Clock = std::chrono::steady_clock;

CsvCell opt(const std::vector<double>& v, std::size_t row) {
  if (row == 0 || row - 1 >= v.size()) return std::monostate{};
  return v[row - 1];
}

CsvCell integer(std::size_t v) { return static_cast<std::int64_t>(v); }

nlohmann::ordered_json json_list(const std::vector<double>& v) {
  auto a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

nlohmann::ordered_json json_list(const std::vector<std::size_t>& v) {
  auto a = nlohmann::ordered_json::array();
  for (std::size_t x : v) a.push_back(x);
  return a;
}

std::string tag(double v) { return format_double(v); }

void add_file(ScenarioOutcome& out, const std::filesystem::path& p) { out.files.push_back(p); }

void nested_table(const NestedStudy& study, bool temporal, const std::filesystem::path& path, ScenarioOutcome& out) {
  std::array<std::vector<std::pair<double, double>>, 4> series;
  for (const auto& r : study.rows) {
    const double res = static_cast<double>(temporal ? r.params.N() : r.params.J());
    series[0].emplace_back(res, r.errors.E1);
    series[1].emplace_back(res, r.errors.E2);
    series[2].emplace_back(res, r.errors.E3);
    series[3].emplace_back(res, r.errors.E4);
  }
  std::array<std::vector<double>, 4> eocs;
  if (study.rows.size() >= 2) {
    for (std::size_t k = 0; k < 4; ++k) {
      try {
        eocs[k] = eoc(series[k]);
      } catch (const InvalidSequence&) {
        // a zero error leaves the EOC column empty
      }
    }
  }
  CsvTable t({"J", "N", "E1", "EOC1", "E2", "EOC2", "E3", "EOC3", "E4", "EOC4"});
  for (std::size_t k = 0; k < study.rows.size(); ++k) {
    const auto& r = study.rows[k];
    t.add_row({integer(r.params.J()), integer(r.params.N()), r.errors.E1, opt(eocs[0], k), r.errors.E2,
               opt(eocs[1], k), r.errors.E3, opt(eocs[2], k), r.errors.E4, opt(eocs[3], k)});
  }
  t.write(path);
  add_file(out, path);

  auto& s = out.summary;
  s["result.J_ref"] = study.reference.J();
  s["result.N_ref"] = study.reference.N();
  std::vector<double> e1, e2, e3, e4, energy_rise;
  bool invariants = study.reference_diagnostics.invariants_hold;
  for (const auto& r : study.rows) {
    e1.push_back(r.errors.E1);
    e2.push_back(r.errors.E2);
    e3.push_back(r.errors.E3);
    e4.push_back(r.errors.E4);
    energy_rise.push_back(r.diagnostics.max_energy_increase);
    invariants = invariants && r.diagnostics.invariants_hold;
  }
  s["result.E1"] = json_list(e1);
  s["result.E2"] = json_list(e2);
  s["result.E3"] = json_list(e3);
  s["result.E4"] = json_list(e4);
  s["result.max_energy_increase"] = json_list(energy_rise);
  s["result.invariants_hold"] = invariants;
}

void write_snapshots(const StressRun& run, const std::string& prefix, const std::filesystem::path& dir,
                     ScenarioOutcome& out) {
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const auto path = dir / (prefix + "_t" + tag(run.snapshot_times[k]) + ".svg");
    write_svg(path, run.snapshots[k]);
    add_file(out, path);
  }
}

void stress_summary(const StressRun& run, const std::string& key, nlohmann::ordered_json& s) {
  const auto& q = run.min_segment_lengths;
  const auto min_it = std::min_element(q.begin(), q.end());
  s["result." + key + ".steps"] = run.diagnostics.steps;
  s["result." + key + ".min_segment_length.initial"] = q.front();
  s["result." + key + ".min_segment_length.minimum"] = *min_it;
  s["result." + key + ".min_segment_length.minimum_time"] = run.times[static_cast<std::size_t>(min_it - q.begin())];
  s["result." + key + ".min_segment_length.final"] = q.back();
  s["result." + key + ".final_energy"] = energy(run.final_state, run.params.epsilon());
  s["result." + key + ".junction"] = {run.final_state.junction().x, run.final_state.junction().y};
  s["result." + key + ".invariants_hold"] = run.diagnostics.invariants_hold;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const auto start = Clock::now();
  const std::size_t workers = worker_count();
  const auto& dir = cfg.output_dir;
  std::filesystem::create_directories(dir);

  ScenarioOutcome out;
  auto& s = out.summary;
  s["params.scenario"] = to_string(cfg.kind);

  switch (cfg.kind) {
    case ScenarioKind::convergence: {
      s["params.epsilon"] = cfg.epsilon;
      s["params.J_list"] = json_list(cfg.Js);
      s["params.delta_factor"] = *cfg.delta_factor;
      s["params.T"] = *cfg.T;
      s["params.J_ref"] = cfg.J_ref;
      const auto study = run_convergence_study(cfg.epsilon, cfg.Js, *cfg.delta_factor, *cfg.T, cfg.J_ref, workers);
      nested_table(study, false, dir / "convergence.csv", out);
      break;
    }
    case ScenarioKind::convergence_time: {
      s["params.epsilon"] = cfg.epsilon;
      s["params.J"] = cfg.J;
      s["params.N_list"] = json_list(cfg.Ns);
      s["params.N_ref"] = cfg.N_ref;
      s["params.T"] = *cfg.T;
      const auto study = run_temporal_study(cfg.epsilon, cfg.J, cfg.Ns, cfg.N_ref, *cfg.T, workers);
      nested_table(study, true, dir / "convergence_time.csv", out);
      break;
    }
    case ScenarioKind::epsilon_study: {
      s["params.epsilon_list"] = json_list(cfg.epsilons);
      s["params.J"] = cfg.J;
      s["params.delta"] = *cfg.delta;
      s["params.threshold"] = *cfg.velocity_threshold;
      s["params.max_steps"] = cfg.max_steps;
      s["params.z"] = cfg.z;
      const auto rows =
          run_epsilon_study(cfg.epsilons, cfg.J, *cfg.delta, *cfg.velocity_threshold, cfg.max_steps, cfg.z, workers);
      std::vector<std::pair<double, double>> ang, pos;
      for (const auto& r : rows) {
        ang.emplace_back(1.0 / r.epsilon, r.errors.angle);
        pos.emplace_back(1.0 / r.epsilon, r.errors.position);
      }
      std::vector<double> eoc_ang, eoc_pos;
      if (rows.size() >= 2) {
        eoc_ang = eoc(ang);
        eoc_pos = eoc(pos);
      }
      CsvTable t({"J", "N_tot", "epsilon", "E_ang", "EOC_ang", "E_pos", "EOC_pos"});
      std::vector<std::size_t> ntot;
      std::vector<double> res;
      bool relaxed = true;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        t.add_row({integer(cfg.J), integer(r.N_tot), r.epsilon, r.errors.angle, opt(eoc_ang, k), r.errors.position,
                   opt(eoc_pos, k)});
        ntot.push_back(r.N_tot);
        res.push_back(r.coefficients.sine_law_residual);
        relaxed = relaxed && r.relaxed;
        const auto svg = dir / ("epsilon_" + tag(r.epsilon) + ".svg");
        write_svg(svg, r.final_state);
        add_file(out, svg);
      }
      const auto csv = dir / "epsilon_study.csv";
      t.write(csv);
      add_file(out, csv);
      const auto init_svg = dir / "epsilon_initial.svg";
      write_svg(init_svg, make_epsilon_initial(cfg.J, cfg.z));
      add_file(out, init_svg);
      s["result.N_tot"] = json_list(ntot);
      s["result.all_relaxed"] = relaxed;
      s["result.sine_law_residual"] = json_list(res);
      break;
    }
    case ScenarioKind::conditioning_mass: {
      s["params.epsilon_list"] = json_list(cfg.epsilons);
      s["params.J"] = cfg.J;
      s["params.delta"] = *cfg.delta;
      s["params.rotated"] = cfg.rotated;
      const auto rows = run_mass_conditioning(cfg.epsilons, cfg.J, *cfg.delta, cfg.rotated, workers);
      CsvTable t({"l", "epsilon", "lambda_max", "lambda_min", "cond2", "EOC"});
      std::vector<double> conds;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& sp = rows[k].spectrum;
        t.add_row({integer(k + 1), rows[k].epsilon, sp.lambda_max, sp.lambda_min, sp.cond2,
                   sp.eoc_vs_previous ? CsvCell{*sp.eoc_vs_previous} : CsvCell{}});
        conds.push_back(sp.cond2);
      }
      const auto csv = dir / "conditioning_mass.csv";
      t.write(csv);
      add_file(out, csv);
      s["result.cond2"] = json_list(conds);
      break;
    }
    case ScenarioKind::conditioning_system: {
      s["params.J_list"] = json_list(cfg.Js);
      s["params.epsilon_list"] = json_list(cfg.epsilons);
      s["params.delta_factor"] = *cfg.delta_factor;
      const auto rows = run_system_conditioning(cfg.Js, cfg.epsilons, *cfg.delta_factor, workers);
      std::vector<std::string> header{"J", "h", "delta"};
      for (double e : cfg.epsilons) header.push_back("cond2_" + tag(e));
      header.push_back("ratio");
      CsvTable t(header);
      for (const auto& r : rows) {
        std::vector<CsvCell> cells{integer(r.J), 1.0 / static_cast<double>(r.J), r.delta};
        for (const auto& sp : r.spectra) cells.emplace_back(sp.cond2);
        cells.emplace_back(r.spectra.back().cond2 / r.spectra.front().cond2);
        t.add_row(std::move(cells));
      }
      const auto csv = dir / "conditioning_system.csv";
      t.write(csv);
      add_file(out, csv);
      break;
    }
    case ScenarioKind::spiral: {
      s["params.epsilon"] = cfg.epsilon;
      s["params.J"] = cfg.J;
      s["params.delta_list"] = json_list(cfg.deltas);
      s["params.delta_list_origin"] = "chosen default";
      s["params.T"] = *cfg.T;
      s["params.snapshot_times"] = json_list(cfg.snapshot_times);
      std::vector<StressRun> runs;
      runs.reserve(cfg.deltas.size());
      for (double d : cfg.deltas) {
        runs.push_back(StressRun{SimParams(cfg.epsilon, cfg.J, d, steps_for(*cfg.T, d)), {}, {}, {}, {}, {}, {}});
      }
      const TriodState init = make_spiral_initial(cfg.J);
      parallel_for(runs.size(), workers,
                   [&](std::size_t k) { runs[k] = run_stress(init, runs[k].params, cfg.snapshot_times); });
      CsvTable t({"delta", "step", "time", "min_segment_length"});
      for (const auto& r : runs) {
        for (std::size_t n = 0; n < r.times.size(); ++n) {
          t.add_row({r.params.delta(), integer(n), r.times[n], r.min_segment_lengths[n]});
        }
        write_snapshots(r, "spiral_delta" + tag(r.params.delta()), dir, out);
        stress_summary(r, "delta" + tag(r.params.delta()), s);
      }
      const auto csv = dir / "spiral_min_segment.csv";
      t.write(csv);
      add_file(out, csv);
      break;
    }
    case ScenarioKind::self_intersect: {
      s["params.preset"] = cfg.preset;
      s["params.epsilon"] = cfg.epsilon;
      s["params.J"] = cfg.J;
      s["params.delta"] = *cfg.delta;
      s["params.T"] = *cfg.T;
      s["params.junction_fix"] = cfg.junction_fix == JunctionFix::shift ? "shift" : "reinterpret";
      const SimParams params(cfg.epsilon, cfg.J, *cfg.delta, steps_for(*cfg.T, *cfg.delta));
      const StressRun run = run_stress(make_self_intersect_initial(cfg.J, cfg.junction_fix), params, cfg.snapshot_times);
      CsvTable t({"step", "time", "min_segment_length"});
      for (std::size_t n = 0; n < run.times.size(); ++n) {
        t.add_row({integer(n), run.times[n], run.min_segment_lengths[n]});
      }
      const auto csv = dir / "self_intersect_min_segment.csv";
      t.write(csv);
      add_file(out, csv);
      write_snapshots(run, "self_intersect", dir, out);
      stress_summary(run, "run", s);
      break;
    }
    case ScenarioKind::custom: {
      const std::size_t N = cfg.N ? *cfg.N : steps_for(*cfg.T, *cfg.delta);
      const SimParams params(cfg.epsilon, cfg.J, *cfg.delta, N);
      s["params.initial"] = cfg.initial;
      s["params.epsilon"] = cfg.epsilon;
      s["params.J"] = cfg.J;
      s["params.delta"] = *cfg.delta;
      s["params.N"] = N;
      if (cfg.velocity_threshold) s["params.threshold"] = *cfg.velocity_threshold;
      const TriodState init = make_named_initial(cfg.initial, cfg.J);
      const StoppingRule stop =
          cfg.velocity_threshold ? StoppingRule::velocity_below(*cfg.velocity_threshold) : StoppingRule::fixed_steps();
      std::map<std::size_t, TriodState> shots;
      std::set<std::size_t> wanted;
      for (double t : cfg.snapshot_times) wanted.insert(snapshot_step(t, *cfg.delta));
      RunDiagnostics diag;
      const Trajectory traj = monitored_evolve(init, params, stop, 0, diag, [&](std::size_t n, const TriodState& st) {
        const bool by_stride = cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0;
        if (by_stride || wanted.contains(n)) shots.emplace(n, st);
      });
      CsvTable t({"step", "time", "energy", "min_segment_length", "cg_iterations", "max_nodal_speed"});
      t.add_row({integer(0), 0.0, energy(init, cfg.epsilon), min_segment_length(init), CsvCell{}, CsvCell{}});
      for (std::size_t n = 0; n < traj.reports.size(); ++n) {
        const auto& r = traj.reports[n];
        t.add_row({integer(n + 1), static_cast<double>(n + 1) * *cfg.delta, r.energy_after, r.min_segment_length_after,
                   integer(r.cg_iterations), r.max_nodal_speed});
      }
      const auto csv = dir / "trajectory.csv";
      t.write(csv);
      add_file(out, csv);
      for (const auto& [n, st] : shots) {
        const auto svg = dir / ("custom_step" + std::to_string(n) + ".svg");
        write_svg(svg, st);
        add_file(out, svg);
      }
      s["result.steps_taken"] = traj.steps_taken;
      s["result.stopped_by_velocity"] = traj.stopped_by_velocity;
      s["result.final_energy"] = energy(traj.final_state, cfg.epsilon);
      s["result.junction"] = {traj.final_state.junction().x, traj.final_state.junction().y};
      s["result.max_energy_increase"] = diag.max_energy_increase;
      s["result.invariants_hold"] = diag.invariants_hold;
      break;
    }
  }

  if (cfg.record_wall_time) {
    s["result.wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  }
  const auto summary = dir / "summary.json";
  write_summary(summary, s);
  add_file(out, summary);
  return out;
}

}  // namespace triodflow
