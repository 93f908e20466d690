#include "triodflow/stepper.hpp"

#include <algorithm>
#include <cmath>

namespace triodflow {

namespace {

double dot(std::span<const Vec2> a, std::span<const Vec2> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].x * b[k].x + a[k].y * b[k].y;
  return s;
}

void restrict_to_subspace(std::span<Vec2> v, std::size_t J) {
  apply_projection(v, J);
  apply_dirichlet_mask(v, J);
}

}  // namespace

CgResult cg_solve(const ConstrainedOperator& op, std::span<const Vec2> rhs, double tol_rel, std::size_t max_iter) {
  const std::size_t n = op.size();
  const std::size_t J = op.J();
  CgResult res;
  res.x.assign(n, Vec2{});

  std::vector<Vec2> b(rhs.begin(), rhs.end());
  restrict_to_subspace(b, J);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return res;

  std::vector<Vec2> r = b;
  std::vector<Vec2> p = r;
  std::vector<Vec2> ap(n);
  double rr = dot(r, r);

  // The recursive residual can drift from the true one; restart from the
  // current iterate until the true residual meets the tolerance.
  while (true) {
    while (std::sqrt(rr) > tol_rel * bnorm) {
      if (res.iterations >= max_iter) throw CgDidNotConverge(res.iterations, std::sqrt(rr) / bnorm);
      op.apply(p, ap);
      const double pap = dot(p, ap);
      const double alpha = rr / pap;
      for (std::size_t k = 0; k < n; ++k) {
        res.x[k] += alpha * p[k];
        r[k] -= alpha * ap[k];
      }
      const double rr_new = dot(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
      restrict_to_subspace(p, J);
      ++res.iterations;
    }
    op.apply(res.x, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
    rr = dot(r, r);
    res.relative_residual = std::sqrt(rr) / bnorm;
    if (res.relative_residual <= tol_rel) return res;
    p = r;
  }
}

std::pair<TriodState, StepReport> time_step(const TriodState& triod, const SimParams& params, const CgOptions& cg) {
  const std::size_t J = triod.J();
  const std::size_t n = J + 1;
  const StepSystem sys = build_step_system(triod, params);
  const CgResult sol = cg_solve(sys.op, sys.rhs, cg.tol_rel, cg.max_iter_factor * 2 * sys.op.size());

  TriodState next = triod;
  next.time = triod.time + params.delta();
  const Vec2 junction_incr = (sol.x[0] + sol.x[n] + sol.x[2 * n]) / 3.0;
  const Vec2 junction = triod.junction() + junction_incr;

  StepReport report;
  report.cg_iterations = sol.iterations;
  report.final_relative_residual = sol.relative_residual;
  for (std::size_t i = 0; i < 3; ++i) {
    auto& nodes = next.curves[i].nodes;
    nodes[0] = junction;
    for (std::size_t j = 1; j < J; ++j) nodes[j] += sol.x[i * n + j];
    // nodes[J] stays the fixed endpoint
    for (std::size_t j = 1; j <= J; ++j) {
      report.max_nodal_speed = std::max(report.max_nodal_speed, norm(sol.x[i * n + j]) / params.delta());
    }
  }
  report.energy_after = energy(next, params.epsilon());
  report.min_segment_length_after = min_segment_length(next);
  return {std::move(next), report};
}

Trajectory evolve(const TriodState& initial, const SimParams& params, const StoppingRule& stop, std::size_t stride,
                  const StateObserver& observer, const CgOptions& cg) {
  Trajectory traj{params, stride, {}, {}, initial, 0, false};
  traj.states.push_back(initial);
  if (observer) observer(0, initial);

  TriodState current = initial;
  for (std::size_t step = 1; step <= params.N(); ++step) {
    auto [next, report] = time_step(current, params, cg);
    current = std::move(next);
    traj.reports.push_back(report);
    traj.steps_taken = step;
    if (observer) observer(step, current);
    if (stride > 0 && step % stride == 0) traj.states.push_back(current);
    if (stop.velocity_threshold && report.max_nodal_speed < *stop.velocity_threshold) {
      traj.stopped_by_velocity = true;
      break;
    }
  }
  traj.final_state = std::move(current);
  if (stride == 0 && traj.steps_taken > 0) traj.states.push_back(traj.final_state);
  return traj;
}

}  // namespace triodflow
