#include "triodflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "triodflow/errors.hpp"
#include "triodflow/initial_data.hpp"

namespace triodflow {

namespace {

std::string describe(std::size_t J, std::size_t N) {
  return "(J=" + std::to_string(J) + ", N=" + std::to_string(N) + ")";
}

double sq(Vec2 v) { return dot(v, v); }

}  // namespace

NestedGridMap::NestedGridMap(std::size_t J, std::size_t N, double delta, std::size_t J_ref, std::size_t N_ref,
                             double delta_ref)
    : J_(J), N_(N), m_(0), k_(0), delta_(delta), delta_ref_(delta_ref) {
  const std::string pair = describe(J, N) + " vs reference " + describe(J_ref, N_ref);
  if (J == 0 || J_ref == 0 || J_ref % J != 0) throw GridMismatch("J must divide J_ref " + pair);
  if (N == 0 || N_ref == 0 || N_ref % N != 0) throw GridMismatch("N must divide N_ref " + pair);
  if (!(delta > 0.0) || !(delta_ref > 0.0)) throw GridMismatch("time steps must be positive " + pair);
  m_ = J_ref / J;
  k_ = N_ref / N;
  if (std::abs(delta - static_cast<double>(k_) * delta_ref) > 1e-12 * delta) {
    throw GridMismatch("time steps are not nested: delta must equal (N_ref/N) delta_ref " + pair);
  }
}

NestedGridMap::NestedGridMap(const SimParams& coarse, const SimParams& reference)
    : NestedGridMap(coarse.J(), coarse.N(), coarse.delta(), reference.J(), reference.N(), reference.delta()) {}

ErrorAccumulator::ErrorAccumulator(const Trajectory& coarse, NestedGridMap map) : coarse_(&coarse), map_(map) {
  if (coarse.stride != 1) throw GridMismatch("error evaluation needs a trajectory recorded at every step");
  if (coarse.params.J() != map.J() || coarse.states.size() != map.N() + 1) {
    throw GridMismatch("trajectory does not match the grid map " + describe(map.J(), map.N()));
  }
}

void ErrorAccumulator::observe(std::size_t n_ref, const TriodState& reference) {
  if (n_ref != next_) throw GridMismatch("reference levels must arrive in order");
  if (n_ref > map_.N_ref()) throw GridMismatch("reference level beyond N_ref");
  if (reference.J() != map_.J_ref()) throw GridMismatch("reference state has the wrong number of elements");

  const std::size_t J = map_.J();
  const std::size_t m = map_.spatial_ratio();
  const std::size_t Jr = map_.J_ref();
  const double h = 1.0 / static_cast<double>(J);
  const double hr = 1.0 / static_cast<double>(Jr);
  const auto& states = coarse_->states;

  if (n_ref % map_.temporal_ratio() == 0) {
    const TriodState& u = states[map_.n_of(n_ref)];
    double e2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& cu = u.curves[i].nodes;
      const auto& ru = reference.curves[i].nodes;
      for (std::size_t j = 0; j <= J; ++j) e1_ = std::max(e1_, sq(cu[j] - ru[map_.j_ref(j)]));
      for (std::size_t e = 0; e < Jr; ++e) {
        const std::size_t c = e / m;
        const Vec2 dc = (cu[c + 1] - cu[c]) / h;
        const Vec2 dr = (ru[e + 1] - ru[e]) / hr;
        e2 += hr * sq(dc - dr);
      }
    }
    e2_ = std::max(e2_, e2);
  }

  if (previous_) {
    // Step from level n_ref-1 to n_ref; the coarse step containing it starts at n.
    const std::size_t n = map_.n_of(n_ref - 1);
    const auto& u0 = states[n];
    const auto& u1 = states[n + 1];
    const double dt = map_.delta();
    const double dtr = map_.delta_ref();
    double integral = 0.0;
    std::vector<Vec2> diff(Jr + 1);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& c0 = u0.curves[i].nodes;
      const auto& c1 = u1.curves[i].nodes;
      const auto& r0 = previous_->curves[i].nodes;
      const auto& r1 = reference.curves[i].nodes;
      for (std::size_t jr = 0; jr <= Jr; ++jr) {
        const std::size_t c = jr / m;
        const std::size_t r = jr % m;
        Vec2 vc = (c1[c] - c0[c]) / dt;
        if (r != 0) {
          const double w = static_cast<double>(r) / static_cast<double>(m);
          vc = (1.0 - w) * vc + w * ((c1[c + 1] - c0[c + 1]) / dt);
        }
        diff[jr] = vc - (r1[jr] - r0[jr]) / dtr;
      }
      // The difference is linear on each reference element.
      for (std::size_t e = 0; e < Jr; ++e) {
        const Vec2 a = diff[e];
        const Vec2 b = diff[e + 1];
        integral += hr / 3.0 * (sq(a) + dot(a, b) + sq(b));
      }
    }
    e3_ += dtr * integral;
  }

  previous_ = reference;
  ++next_;
}

bool ErrorAccumulator::complete() const noexcept { return next_ == map_.N_ref() + 1; }

ErrorReport ErrorAccumulator::report() const { return ErrorReport{e1_, e2_, e3_, 0.0}; }

namespace {

ErrorReport stored_errors(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map) {
  if (ref.stride != 1 || ref.states.size() != map.N_ref() + 1) {
    throw GridMismatch("reference trajectory must be recorded at every step up to N_ref");
  }
  ErrorAccumulator acc(traj, map);
  for (std::size_t n = 0; n < ref.states.size(); ++n) acc.observe(n, ref.states[n]);
  return acc.report();
}

}  // namespace

double error_E1(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map) {
  return stored_errors(traj, ref, map).E1;
}

double error_E2(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map) {
  return stored_errors(traj, ref, map).E2;
}

double error_E3(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map) {
  return stored_errors(traj, ref, map).E3;
}

double max_angle_deviation(const TriodState& triod) {
  double worst = 0.0;
  for (double theta : junction_sector_angles(triod)) worst = std::max(worst, std::abs(theta - 120.0));
  return worst;
}

double error_E4(const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("E4 needs a nonempty trajectory");
  double worst = 0.0;
  for (const auto& s : traj.states) worst = std::max(worst, max_angle_deviation(s));
  return worst;
}

ErrorReport compute_errors(const Trajectory& traj, const Trajectory& ref, const NestedGridMap& map) {
  ErrorReport rep = stored_errors(traj, ref, map);
  rep.E4 = error_E4(traj);
  return rep;
}

std::vector<double> eoc(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw InvalidSequence("EOC needs at least two entries");
  for (const auto& [r, e] : pairs) {
    if (!(r > 0.0) || !(e > 0.0)) throw InvalidSequence("EOC inputs must be positive");
  }
  std::vector<double> out;
  out.reserve(pairs.size() - 1);
  for (std::size_t l = 1; l < pairs.size(); ++l) {
    const auto [ra, ea] = pairs[l - 1];
    const auto [rb, eb] = pairs[l];
    if (ra == rb) throw InvalidSequence("EOC resolutions must differ");
    out.push_back((std::log(ea) - std::log(eb)) / (std::log(rb) - std::log(ra)));
  }
  return out;
}

EpsilonErrors epsilon_errors(const TriodState& final_state, double z) {
  EpsilonErrors err;
  err.angle = max_angle_deviation(final_state);
  err.position = norm(final_state.junction() - steiner_point(z));
  return err;
}

JunctionCoefficients junction_coefficients(const TriodState& triod, double epsilon) {
  const double h = 1.0 / static_cast<double>(triod.J());
  JunctionCoefficients out;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto geom = element_geometry(triod.curves[i], h, i);
    out.tension[i] = 1.0 + epsilon * geom.length_element.front();
  }
  const auto theta = junction_sector_angles(triod);
  std::array<double, 3> ratio{};
  for (std::size_t i = 0; i < 3; ++i) ratio[i] = std::sin(theta[i] * std::numbers::pi / 180.0) / out.tension[i];
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  out.sine_law_residual = *hi - *lo;
  return out;
}

}  // namespace triodflow
