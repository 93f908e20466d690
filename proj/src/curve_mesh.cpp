#include "triodflow/curve_mesh.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace triodflow {

SimParams::SimParams(double epsilon, std::size_t J, double delta, std::size_t N)
    : epsilon_(epsilon), J_(J), delta_(delta), N_(N) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (J == 0) throw std::invalid_argument("J must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
}

CurveChain interpolate_initial(const CurveFunction& curve_fn, std::size_t J) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  CurveChain chain;
  chain.nodes.reserve(J + 1);
  for (std::size_t j = 0; j <= J; ++j) {
    chain.nodes.push_back(curve_fn(static_cast<double>(j) / static_cast<double>(J)));
  }
  chain.endpoint = chain.nodes.back();
  return chain;
}

TriodState make_triod(std::array<CurveChain, 3> curves, double time) {
  const std::size_t J = curves[0].elements();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& c = curves[i];
    if (c.nodes.size() < 2 || c.elements() != J) {
      throw std::invalid_argument("all three curves need the same number of elements (>= 1)");
    }
    if (!(c.nodes.back() == c.endpoint)) {
      throw std::invalid_argument("curve " + std::to_string(i) + ": last node differs from endpoint");
    }
  }
  if (!(curves[0].nodes[0] == curves[1].nodes[0] && curves[0].nodes[0] == curves[2].nodes[0])) {
    throw std::invalid_argument("curves do not share the triple junction");
  }
  return TriodState{std::move(curves), time};
}

ElementGeometry element_geometry(const CurveChain& curve, double h, std::size_t curve_index) {
  const std::size_t n = curve.elements();
  ElementGeometry g;
  g.length_element.resize(n);
  g.tangent.resize(n);
  g.normal.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    const Vec2 chord = curve.nodes[e + 1] - curve.nodes[e];
    const double len = norm(chord);
    if (!(len > kMinChordLength)) throw DegenerateElement(curve_index, e, len);
    g.length_element[e] = len / h;
    g.tangent[e] = chord / len;
    g.normal[e] = perp(g.tangent[e]);
  }
  return g;
}

double energy(const TriodState& triod, double epsilon) {
  const double h = 1.0 / static_cast<double>(triod.J());
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto g = element_geometry(triod.curves[i], h, i);
    for (double q : g.length_element) total += h * (q + 0.5 * epsilon * q * q);
  }
  return total;
}

std::array<double, 3> sector_angles_from_tangents(const std::array<Vec2, 3>& tangents) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  std::array<double, 3> polar{};
  for (std::size_t i = 0; i < 3; ++i) {
    double a = std::atan2(tangents[i].y, tangents[i].x) * kDeg;
    if (a < 0.0) a += 360.0;
    polar[i] = a;
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return polar[a] < polar[b]; });

  // Sector between sorted rays k and k+1 lies opposite the remaining ray.
  std::array<double, 3> sectors{};
  sectors[order[2]] = polar[order[1]] - polar[order[0]];
  sectors[order[0]] = polar[order[2]] - polar[order[1]];
  sectors[order[1]] = 360.0 - sectors[order[2]] - sectors[order[0]];
  return sectors;
}

std::array<double, 3> junction_sector_angles(const TriodState& triod) {
  std::array<Vec2, 3> tangents{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& nodes = triod.curves[i].nodes;
    const Vec2 chord = nodes[1] - nodes[0];
    const double len = norm(chord);
    if (!(len > kMinChordLength)) throw DegenerateElement(i, 0, len);
    tangents[i] = chord / len;
  }
  return sector_angles_from_tangents(tangents);
}

double min_segment_length(const TriodState& triod) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : triod.curves) {
    for (std::size_t e = 0; e + 1 < c.nodes.size(); ++e) m = std::min(m, norm(c.nodes[e + 1] - c.nodes[e]));
  }
  return m;
}

namespace {

template <class F>
TriodState map_points(const TriodState& triod, F&& f) {
  TriodState out = triod;
  for (auto& c : out.curves) {
    for (auto& p : c.nodes) p = f(p);
    c.endpoint = f(c.endpoint);
  }
  return out;
}

}  // namespace

TriodState rotate(const TriodState& triod, double angle_deg) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a);
  const double s = std::sin(a);
  return map_points(triod, [c, s](Vec2 p) { return Vec2{c * p.x - s * p.y, s * p.x + c * p.y}; });
}

TriodState translate(const TriodState& triod, Vec2 shift) {
  return map_points(triod, [shift](Vec2 p) { return p + shift; });
}

}  // namespace triodflow
