#pragma once

/// @file curve_mesh.hpp
/// @brief Discrete triods on the uniform reference mesh of [0,1].
///
/// A triod is three piecewise-linear curves. Node 0 of every curve is the
/// shared triple junction, node J the fixed outer endpoint. The junction is
/// stored once per curve; the stepper keeps the three copies bit-identical.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "triodflow/errors.hpp"

namespace triodflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  constexpr Vec2& operator+=(Vec2 b) {
    x += b.x;
    y += b.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 b) {
    x -= b.x;
    y -= b.y;
    return *this;
  }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// Chords shorter than this abort the computation.
inline constexpr double kMinChordLength = 1e-12;

/// Discretisation parameters. The mesh width is always derived from J.
class SimParams {
 public:
  SimParams(double epsilon, std::size_t J, double delta, std::size_t N);

  double epsilon() const noexcept { return epsilon_; }
  std::size_t J() const noexcept { return J_; }
  double h() const noexcept { return 1.0 / static_cast<double>(J_); }
  double delta() const noexcept { return delta_; }
  std::size_t N() const noexcept { return N_; }
  double T() const noexcept { return static_cast<double>(N_) * delta_; }

 private:
  double epsilon_;
  std::size_t J_;
  double delta_;
  std::size_t N_;
};

struct CurveChain {
  std::vector<Vec2> nodes;  // J+1 nodes, nodes.back() == endpoint
  Vec2 endpoint;

  std::size_t elements() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
};

struct TriodState {
  std::array<CurveChain, 3> curves;
  double time = 0.0;

  std::size_t J() const noexcept { return curves[0].elements(); }
  Vec2 junction() const noexcept { return curves[0].nodes.front(); }
};

/// Per-element quantities of one curve; index e covers nodes e and e+1.
struct ElementGeometry {
  std::vector<double> length_element;  // |u_hx| = chord / h
  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;

  std::size_t size() const noexcept { return length_element.size(); }
};

using CurveFunction = std::function<Vec2(double)>;

/// Nodal interpolation of a parametrisation on the uniform mesh with J elements.
CurveChain interpolate_initial(const CurveFunction& curve_fn, std::size_t J);

/// Assembles a triod from three chains and checks the junction and endpoint invariants.
TriodState make_triod(std::array<CurveChain, 3> curves, double time = 0.0);

/// Throws DegenerateElement(curve_index, e) if a chord is not longer than kMinChordLength.
ElementGeometry element_geometry(const CurveChain& curve, double h, std::size_t curve_index = 0);

/// Sum over curves of the integral of |u_x| + (epsilon/2)|u_x|^2, exact for polygons.
double energy(const TriodState& triod, double epsilon);

/// Sector angles in degrees at the junction; entry i is the sector opposite curve i.
std::array<double, 3> junction_sector_angles(const TriodState& triod);

/// Sector angles given the three outgoing tangent directions (any length > 0).
std::array<double, 3> sector_angles_from_tangents(const std::array<Vec2, 3>& tangents);

double min_segment_length(const TriodState& triod);

/// Rotates every node and endpoint counter-clockwise about the origin.
TriodState rotate(const TriodState& triod, double angle_deg);

TriodState translate(const TriodState& triod, Vec2 shift);

}  // namespace triodflow
