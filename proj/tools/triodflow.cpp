#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "triodflow/errors.hpp"
#include "triodflow/scenarios.hpp"
#include "triodflow/version.hpp"

namespace {

using nlohmann::json;

/// Flags shared by the scenario subcommands; each one overrides the config key it names.
struct Overrides {
  std::string config;
  std::string output_dir;
  bool record_wall_time = false;
  json values = json::object();
};

json start_document(const Overrides& o, const std::string& scenario) {
  json doc = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw triodflow::ConfigError("cannot read config file " + o.config);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw triodflow::ConfigError("config file " + o.config + " is not valid JSON: " + e.what());
    }
  }
  doc["scenario"] = scenario;
  if (!o.output_dir.empty()) doc["output_dir"] = o.output_dir;
  if (o.record_wall_time) doc["record_wall_time"] = true;
  for (const auto& [k, v] : o.values.items()) doc[k] = v;
  return doc;
}

int execute(const triodflow::ScenarioConfig& cfg) {
  const auto outcome = triodflow::run_scenario(cfg);
  for (const auto& f : outcome.files) std::cout << f.string() << '\n';
  return 0;
}

template <class T>
void bind(CLI::App* cmd, Overrides& o, const std::string& flag, const std::string& key, const std::string& help) {
  auto* opt = cmd->add_option_function<T>(flag, [&o, key](const T& v) { o.values[key] = v; }, help);
  if constexpr (CLI::detail::is_mutable_container<T>::value) opt->delimiter(',');
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config whose values the flags override");
  cmd->add_option("-o,--output-dir", o.output_dir, "Directory for report files");
  cmd->add_flag("--record-wall-time", o.record_wall_time, "Store the wall time in the summary");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature flow of triods: experiments and reports"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the scenario described by a JSON config");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  Overrides conv_o;
  bool temporal = false;
  bool paper_scale = false;
  auto* conv = app.add_subcommand("convergence", "Errors against a nested reference run");
  add_common(conv, conv_o);
  conv->add_flag("--temporal", temporal, "Fix J and vary the number of steps");
  conv->add_flag("--paper-scale", paper_scale, "Use the finer reference (J_ref = 360)");
  bind<double>(conv, conv_o, "--epsilon", "epsilon", "Regularisation parameter");
  bind<std::vector<std::size_t>>(conv, conv_o, "--J-list", "J_list", "Element counts (spatial study)");
  bind<std::size_t>(conv, conv_o, "--J", "J", "Element count (temporal study)");
  bind<std::vector<std::size_t>>(conv, conv_o, "--N-list", "N_list", "Step counts (temporal study)");
  bind<std::size_t>(conv, conv_o, "--J-ref", "J_ref", "Reference element count");
  bind<std::size_t>(conv, conv_o, "--N-ref", "N_ref", "Reference step count");
  bind<double>(conv, conv_o, "--delta-factor", "delta_factor", "delta = factor * h^2");
  bind<double>(conv, conv_o, "-T,--final-time", "T", "Final time");

  Overrides eps_o;
  auto* eps = app.add_subcommand("epsilon", "Relax the axis-aligned triod for several epsilon");
  add_common(eps, eps_o);
  bind<std::vector<double>>(eps, eps_o, "--epsilon-list", "epsilon_list", "Values of epsilon");
  bind<std::size_t>(eps, eps_o, "--J", "J", "Element count");
  bind<double>(eps, eps_o, "--delta", "delta", "Time step");
  bind<double>(eps, eps_o, "--threshold", "threshold", "Stop when the nodal speed drops below this");
  bind<std::size_t>(eps, eps_o, "--max-steps", "max_steps", "Step cap");

  Overrides cond_o;
  bool system = false;
  auto* cond = app.add_subcommand("conditioning", "Spectra of the mass block or the system matrix");
  add_common(cond, cond_o);
  cond->add_flag("--system", system, "Condition numbers of the constrained system matrix");
  bind<std::vector<double>>(cond, cond_o, "--epsilon-list", "epsilon_list", "Values of epsilon");
  bind<std::size_t>(cond, cond_o, "--J", "J", "Element count (mass block)");
  bind<std::vector<std::size_t>>(cond, cond_o, "--J-list", "J_list", "Element counts (system matrix)");
  bind<double>(cond, cond_o, "--delta", "delta", "Time step (mass block)");
  bind<double>(cond, cond_o, "--delta-factor", "delta_factor", "delta = factor * h^2 (system matrix)");
  bind<bool>(cond, cond_o, "--rotated", "rotated", "Use the rotated initial data (mass block)");

  Overrides sp_o;
  auto* sp = app.add_subcommand("spiral", "Spiral stress test");
  add_common(sp, sp_o);
  bind<double>(sp, sp_o, "--epsilon", "epsilon", "Regularisation parameter");
  bind<std::size_t>(sp, sp_o, "--J", "J", "Element count");
  bind<std::vector<double>>(sp, sp_o, "--delta-list", "delta_list", "Time steps");
  bind<double>(sp, sp_o, "-T,--final-time", "T", "Final time");
  bind<std::vector<double>>(sp, sp_o, "--snapshot-times", "snapshot_times", "Times of the SVG snapshots");

  Overrides si_o;
  auto* si = app.add_subcommand("selfintersect", "Self-intersecting triod stress test");
  add_common(si, si_o);
  bind<std::string>(si, si_o, "--preset", "preset", "text (J=60) or figure (J=20)");
  bind<std::string>(si, si_o, "--junction-fix", "junction_fix", "shift or reinterpret");
  bind<double>(si, si_o, "--epsilon", "epsilon", "Regularisation parameter");
  bind<std::size_t>(si, si_o, "--J", "J", "Element count");
  bind<double>(si, si_o, "--delta", "delta", "Time step");
  bind<double>(si, si_o, "-T,--final-time", "T", "Final time");
  bind<std::vector<double>>(si, si_o, "--snapshot-times", "snapshot_times", "Times of the SVG snapshots");

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors share the config-error code.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) return execute(triodflow::load_config(config_path));
    if (*conv) {
      if (temporal) return execute(triodflow::parse_config(start_document(conv_o, "convergence_time")));
      if (paper_scale) conv_o.values["paper_scale"] = true;
      return execute(triodflow::parse_config(start_document(conv_o, "convergence")));
    }
    if (*eps) return execute(triodflow::parse_config(start_document(eps_o, "epsilon_study")));
    if (*cond) {
      return execute(
          triodflow::parse_config(start_document(cond_o, system ? "conditioning_system" : "conditioning_mass")));
    }
    if (*sp) return execute(triodflow::parse_config(start_document(sp_o, "spiral")));
    if (*si) return execute(triodflow::parse_config(start_document(si_o, "self_intersect")));
    std::cout << "triodflow " << triodflow::kVersion << '\n';
    return 0;
  } catch (const triodflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
