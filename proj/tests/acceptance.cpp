// Acceptance run: one PASS/FAIL line per criterion C1-C7.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "triodflow/assembly.hpp"
#include "triodflow/initial_data.hpp"
#include "triodflow/metrics.hpp"
#include "triodflow/scenarios.hpp"
#include "triodflow/spectral.hpp"
#include "triodflow/stepper.hpp"

using namespace triodflow;

namespace {

/// Collects failed checks of one criterion and prints detail lines as it goes.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    std::printf("  %s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& what) { std::printf("  %s\n", what.c_str()); }
  bool passed() const noexcept { return failures_.empty(); }
  std::size_t failures() const noexcept { return failures_.size(); }

 private:
  std::vector<std::string> failures_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename... Args>
std::string cat(const Args&... args) {
  std::ostringstream ss;
  ss.precision(6);
  (ss << ... << args);
  return ss.str();
}

bool within(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

std::string rel_text(double got, double want) {
  return cat(got, " vs ", want, " (", fmt("%+.2f", 100.0 * (got - want) / want), "%)");
}

/// Junction and endpoint bit-exactness over every run the criteria performed.
struct InvariantLog {
  std::size_t runs = 0;
  std::vector<std::string> broken;
  void record(const std::string& name, const RunDiagnostics& d) {
    ++runs;
    if (!d.invariants_hold) broken.push_back(name);
  }
};

std::vector<double> column(const NestedStudy& s, double ErrorReport::*field) {
  std::vector<double> out;
  for (const auto& r : s.rows) out.push_back(r.errors.*field);
  return out;
}

std::vector<double> eocs_by(const std::vector<double>& res, const std::vector<double>& err) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t k = 0; k < res.size(); ++k) pairs.emplace_back(res[k], err[k]);
  return eoc(pairs);
}

void log_study(const NestedStudy& s, InvariantLog& inv, const std::string& name) {
  for (const auto& r : s.rows) inv.record(cat(name, " J=", r.params.J(), " N=", r.params.N()), r.diagnostics);
  inv.record(name + " reference", s.reference_diagnostics);
  for (const auto& r : s.rows) {
    std::printf("  J=%zu N=%zu E1=%.5g E2=%.5g E3=%.5g E4=%.5g\n", r.params.J(), r.params.N(), r.errors.E1,
                r.errors.E2, r.errors.E3, r.errors.E4);
  }
}

void criterion_c1(Check& c, InvariantLog& inv, std::size_t workers) {
  const std::vector<std::size_t> Js{20, 30, 36, 45, 60};
  const auto study = run_convergence_study(1e-3, Js, 0.2, 0.2, 180, workers);
  c.note(cat("reference J=", study.reference.J(), " N=", study.reference.N()));
  c.expect(study.reference.N() == 32400, cat("reference N_ref = ", study.reference.N()));
  log_study(study, inv, "C1");

  const auto E2 = column(study, &ErrorReport::E2);
  const auto E4 = column(study, &ErrorReport::E4);
  std::vector<double> res(Js.begin(), Js.end());
  for (std::size_t k = 1; k < E2.size(); ++k) {
    c.expect(E2[k] < E2[k - 1], cat("E2 decreases from J=", Js[k - 1], " to J=", Js[k]));
  }
  const auto eoc2 = eocs_by(res, E2);
  const auto eoc4 = eocs_by(res, E4);
  for (std::size_t k = 0; k < eoc2.size(); ++k) {
    if (Js[k] >= 30) c.expect(eoc2[k] >= 1.5, cat("EOC2 J=", Js[k], "->", Js[k + 1], " = ", eoc2[k], " >= 1.5"));
  }
  for (std::size_t k = 0; k < eoc4.size(); ++k) {
    c.expect(eoc4[k] >= 0.8 && eoc4[k] <= 1.2, cat("EOC4 J=", Js[k], "->", Js[k + 1], " = ", eoc4[k], " in [0.8, 1.2]"));
  }
}

void criterion_c2(Check& c, InvariantLog& inv, std::size_t workers) {
  const auto study = run_convergence_study(1e-3, {20}, 0.2, 0.2, 360, workers);
  c.expect(study.reference.N() == 129600, cat("reference N_ref = ", study.reference.N()));
  log_study(study, inv, "C2");
  const auto& e = study.rows.front().errors;
  c.expect(within(e.E1, 0.0017525, 0.02), "E1 " + rel_text(e.E1, 0.0017525));
  c.expect(within(e.E2, 0.020997, 0.02), "E2 " + rel_text(e.E2, 0.020997));
  c.expect(within(e.E3, 0.030963, 0.02), "E3 " + rel_text(e.E3, 0.030963));
  c.expect(within(e.E4, 5.6986, 0.02), "E4 " + rel_text(e.E4, 5.6986));
}

void criterion_c3(Check& c, InvariantLog& inv, std::size_t workers) {
  const std::vector<std::size_t> Ns{3456, 4320, 5760, 6912, 8640};
  const auto study = run_temporal_study(1e-3, 60, Ns, 34560, 0.2, workers);
  log_study(study, inv, "C3");
  std::vector<double> res(Ns.begin(), Ns.end());
  const char* names[] = {"EOC1", "EOC2", "EOC3"};
  double ErrorReport::*fields[] = {&ErrorReport::E1, &ErrorReport::E2, &ErrorReport::E3};
  for (int f = 0; f < 3; ++f) {
    const auto e = eocs_by(res, column(study, fields[f]));
    std::string seq;
    for (double v : e) seq += cat(" ", v);
    c.note(cat(names[f], ":", seq));
    bool increasing = true;
    for (std::size_t k = 1; k < e.size(); ++k) increasing = increasing && e[k] > e[k - 1];
    c.expect(increasing, cat(names[f], " increasing"));
    c.expect(e.back() >= 1.5, cat(names[f], " final pair ", e.back(), " >= 1.5"));
  }
  const auto E4 = column(study, &ErrorReport::E4);
  const auto [lo, hi] = std::minmax_element(E4.begin(), E4.end());
  const double change = (*hi - *lo) / E4.front();
  c.expect(change <= 0.02, cat("E4 relative change ", change, " <= 0.02"));
}

void criterion_c4(Check& c, InvariantLog& inv, std::size_t workers) {
  const std::vector<double> eps{1.0, 0.1, 0.01, 0.001, 0.0001};
  const std::vector<double> ang{89.719, 12.759, 1.2665, 0.12656, 0.012655};
  const std::vector<double> pos{0.31184, 0.015937, 0.0014832, 0.00014736, 1.4726e-05};
  const std::vector<double> steps{669, 552, 3769, 18912, 8864};
  const auto rows = run_epsilon_study(eps, 20, 0.01, 1e-6, 200000, 0.1, workers);
  std::vector<double> e_ang, e_pos;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    inv.record(cat("C4 eps=", r.epsilon), r.diagnostics);
    c.expect(r.relaxed, cat("eps=", r.epsilon, " relaxed below the threshold"));
    c.expect(within(r.errors.angle, ang[k], 0.05), cat("eps=", r.epsilon, " E_ang ", rel_text(r.errors.angle, ang[k])));
    c.expect(within(r.errors.position, pos[k], 0.05),
             cat("eps=", r.epsilon, " E_pos ", rel_text(r.errors.position, pos[k])));
    c.expect(within(static_cast<double>(r.N_tot), steps[k], 0.2),
             cat("eps=", r.epsilon, " N_tot ", rel_text(static_cast<double>(r.N_tot), steps[k])));
    e_ang.push_back(r.errors.angle);
    e_pos.push_back(r.errors.position);
  }
  std::vector<double> inv_eps;
  for (double e : eps) inv_eps.push_back(1.0 / e);
  const auto eoc_ang = eocs_by(inv_eps, e_ang);
  const auto eoc_pos = eocs_by(inv_eps, e_pos);
  for (std::size_t k = 0; k < eoc_ang.size(); ++k) {
    if (eps[k] > 0.1) continue;
    c.expect(eoc_ang[k] >= 0.85 && eoc_ang[k] <= 1.35, cat("EOC_ang ", eps[k], "->", eps[k + 1], " = ", eoc_ang[k]));
    c.expect(eoc_pos[k] >= 0.85 && eoc_pos[k] <= 1.35, cat("EOC_pos ", eps[k], "->", eps[k + 1], " = ", eoc_pos[k]));
  }
}

void criterion_c5(Check& c, std::size_t workers) {
  const auto mass_cfg = default_config(ScenarioKind::conditioning_mass);
  const auto mass = run_mass_conditioning(mass_cfg.epsilons, 20, 0.0025, true, workers);
  c.expect(within(mass[0].spectrum.cond2, 5.9, 0.05), "cond2(eps=1) " + rel_text(mass[0].spectrum.cond2, 5.9));
  c.expect(within(mass[1].spectrum.cond2, 17.0, 0.05), "cond2(eps=0.3) " + rel_text(mass[1].spectrum.cond2, 17.0));
  for (std::size_t l = 1; l < mass.size(); ++l) {
    const double e = *mass[l].spectrum.eoc_vs_previous;
    c.expect(e >= -1.05 && e <= -0.85, cat("mass EOC at eps=", mass[l].epsilon, " = ", e, " in [-1.05, -0.85]"));
  }
  const auto sys = run_system_conditioning({10}, {1e-1, 1e-5}, 0.4, workers);
  const double c1 = sys[0].spectra[0].cond2;
  const double c5 = sys[0].spectra[1].cond2;
  c.expect(within(c1, 55.34, 0.10), "system cond2(1e-1) " + rel_text(c1, 55.34));
  c.expect(within(c5, 113.9, 0.10), "system cond2(1e-5) " + rel_text(c5, 113.9));
  c.expect(within(c5 / c1, 2.06, 0.15), "ratio " + rel_text(c5 / c1, 2.06));
}

double max_increment(const TriodState& a, const TriodState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < a.curves[i].nodes.size(); ++j) {
      const Vec2 d = a.curves[i].nodes[j] - b.curves[i].nodes[j];
      m = std::max({m, std::abs(d.x), std::abs(d.y)});
    }
  }
  return m;
}

Eigen::MatrixXd dense_of(const BlockTridiag& a) {
  const std::size_t n = 2 * a.nodes();
  Eigen::MatrixXd m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t q = 0; q < n; ++q) m(r, q) = a.entry(r, q);
  }
  return m;
}

void criterion_c6(Check& c, InvariantLog& inv) {
  {
    double worst = 0.0;
    for (double eps : {1e-5, 1e-3, 1e-1}) {
      const std::size_t J = 20;
      TriodState s = make_steiner_triod(J);
      const SimParams p(eps, J, 0.2 / 400.0, 100);
      for (int n = 0; n < 100; ++n) {
        TriodState next = time_step(s, p).first;
        worst = std::max(worst, max_increment(next, s));
        s = std::move(next);
      }
    }
    c.expect(worst <= 1e-9, cat("equilateral fixed point, max increment ", worst));
  }
  {
    const TriodState init = make_convergence_initial(20);
    const SimParams p(1e-3, 20, 0.2 / 400.0, 400);
    const auto traj = evolve(init, p, {}, 0);
    const auto d = diagnose(init, traj);
    inv.record("C6 energy run", d);
    c.expect(d.max_energy_increase <= 1e-12, cat("energy non-increasing, max rise ", d.max_energy_increase));
  }
  {
    std::mt19937_64 rng(2024);
    double proj = 0.0, mass_err = 0.0, cg_err = 0.0;
    for (std::size_t J = 1; J <= 8; ++J) {
      const Eigen::MatrixXd P = oracle::projection(J);
      proj = std::max({proj, (P * P - P).cwiseAbs().maxCoeff(), (P - P.transpose()).cwiseAbs().maxCoeff()});
      const TriodState t = oracle::random_triod(rng, J);
      const auto mats = assemble_curves(t, 1e-3, 1e-2);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto ref = oracle::assemble_curve(t.curves[i].nodes, 1e-3, 1e-2);
        mass_err = std::max(mass_err, (dense_of(mats.mass[i]) - ref.mass).cwiseAbs().maxCoeff() /
                                          std::max(1.0, ref.mass.cwiseAbs().maxCoeff()));
        mass_err = std::max(mass_err, (dense_of(mats.stiffness[i]) - ref.stiffness).cwiseAbs().maxCoeff() /
                                          std::max(1.0, ref.stiffness.cwiseAbs().maxCoeff()));
      }
      if (J < 2) continue;
      const SimParams p(1e-3, J, 0.3 / static_cast<double>(J * J), 1);
      const auto sys = build_step_system(t, p);
      const auto res = cg_solve(sys.op, sys.rhs, 1e-12, 40 * sys.op.size());
      const Eigen::MatrixXd B = oracle::subspace_basis(J);
      const Eigen::MatrixXd A = oracle::block_diagonal(t, p.epsilon(), p.delta(), true);
      const Eigen::VectorXd b = oracle::to_eigen(sys.rhs);
      const Eigen::VectorXd x = B * (B.transpose() * P * A * P * B).partialPivLu().solve(B.transpose() * b);
      cg_err = std::max(cg_err, (oracle::to_eigen(res.x) - x).norm() / x.norm());
    }
    c.expect(proj <= 1e-13, cat("projection idempotent and symmetric, ", proj));
    c.expect(mass_err <= 1e-13, cat("M and S match dense assembly, ", mass_err));
    c.expect(cg_err <= 1e-10, cat("CG matches dense solve, ", cg_err));
  }
  {
    double worst = 0.0;
    for (std::size_t J : {10u, 20u, 60u}) {
      for (double eps : {1e-5, 1e-3, 1e-1}) {
        const TriodState t = make_convergence_initial(J);
        const Vec2 shift{-0.4, 0.25};
        const SimParams p(eps, J, 0.2 / static_cast<double>(J * J), 1);
        worst = std::max(worst, max_increment(time_step(translate(t, shift), p).first,
                                              translate(time_step(t, p).first, shift)));
      }
    }
    c.expect(worst <= 1e-13, cat("translation equivariance, ", worst));
  }
  {
    const std::size_t J = 20;
    const TriodState init = make_epsilon_initial(J, 0.1);
    double worst = 0.0;
    const auto traj = evolve(init, SimParams(1e-3, J, 0.01, 100000), StoppingRule::velocity_below(1e-6), 0,
                             [&](std::size_t, const TriodState& s) {
                               for (std::size_t j = 0; j <= J; ++j) {
                                 worst = std::max({worst, std::abs(s.curves[0].nodes[j].y),
                                                   std::abs(s.curves[1].nodes[j].x - s.curves[2].nodes[j].x),
                                                   std::abs(s.curves[1].nodes[j].y + s.curves[2].nodes[j].y)});
                               }
                             });
    inv.record("C6 reflection run", diagnose(init, traj));
    c.expect(worst <= 1e-10, cat("reflection symmetry over ", traj.steps_taken, " steps, ", worst));
  }
  std::string broken;
  for (const auto& b : inv.broken) broken += " " + b;
  c.expect(inv.broken.empty(), cat("junction and endpoints bit-exact in all ", inv.runs, " runs", broken));
}

void criterion_c7(Check& c, InvariantLog& inv) {
  const TriodState spiral = make_spiral_initial(60);
  const auto run = run_stress(spiral, SimParams(1e-3, 60, 2e-4, steps_for(0.48, 2e-4)), {});
  inv.record("C7 spiral", run.diagnostics);
  const auto& q = run.min_segment_lengths;
  const auto min_it = std::min_element(q.begin(), q.end());
  c.note(cat("spiral min segment: initial ", q.front(), ", minimum ", *min_it, " at t=",
             run.times[static_cast<std::size_t>(min_it - q.begin())], ", final ", q.back()));
  c.expect(*min_it < q.front(), "spiral segment lengths first decrease");
  c.expect(q.back() > *min_it, "spiral segment lengths recover");

  const auto cfg = default_config(ScenarioKind::self_intersect);
  const TriodState si = make_self_intersect_initial(cfg.J, cfg.junction_fix);
  const auto run2 = run_stress(si, SimParams(cfg.epsilon, cfg.J, *cfg.delta, steps_for(*cfg.T, *cfg.delta)), {});
  inv.record("C7 self-intersection", run2.diagnostics);
  c.expect(run2.diagnostics.steps == steps_for(*cfg.T, *cfg.delta),
           cat("self-intersection run completed ", run2.diagnostics.steps, " steps"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks C1-C7"};
  bool paper_scale = false;
  std::vector<std::string> only;
  app.add_flag("--paper-scale", paper_scale, "also run C2 (reference J=360, about an hour)");
  app.add_option("--only", only, "run only the listed criteria, e.g. --only C4 C5");
  CLI11_PARSE(app, argc, argv);

  const std::set<std::string> selected(only.begin(), only.end());
  auto wanted = [&](const std::string& id) { return selected.empty() || selected.contains(id); };

  const std::size_t workers = worker_count();
  InvariantLog inv;
  int failed = 0;
  auto run = [&](const std::string& id, const std::string& title, const std::function<void(Check&)>& body) {
    if (!wanted(id)) return;
    std::printf("%s %s\n", id.c_str(), title.c_str());
    std::fflush(stdout);
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!c.passed()) ++failed;
    std::printf("%s %s (%zu failed checks, %.1f s)\n", id.c_str(), c.passed() ? "PASS" : "FAIL", c.failures(), secs);
    std::fflush(stdout);
  };

  run("C1", "spatial convergence", [&](Check& c) { criterion_c1(c, inv, workers); });
  if (paper_scale) {
    run("C2", "full-scale spot check", [&](Check& c) { criterion_c2(c, inv, workers); });
  } else if (wanted("C2")) {
    std::printf("C2 SKIP (enable with --paper-scale)\n");
  }
  run("C3", "temporal convergence", [&](Check& c) { criterion_c3(c, inv, workers); });
  run("C4", "epsilon study", [&](Check& c) { criterion_c4(c, inv, workers); });
  run("C5", "conditioning", [&](Check& c) { criterion_c5(c, workers); });
  run("C7", "stress runs", [&](Check& c) { criterion_c7(c, inv); });
  // Last, so that the invariant check covers every run above.
  run("C6", "property suite", [&](Check& c) { criterion_c6(c, inv); });

  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
