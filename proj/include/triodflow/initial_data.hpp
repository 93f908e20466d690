#pragma once

/// @file initial_data.hpp
/// @brief Initial triods of the experiment scenarios.

#include <cstddef>
#include <string_view>

#include "triodflow/curve_mesh.hpp"

namespace triodflow {

/// (sqrt(3) - sqrt(2)) / 2, the junction abscissa of the convergence triod before rotation.
double convergence_junction_offset();

/// Convergence-test triod sampled at J elements, optionally rotated by 18 degrees.
TriodState make_convergence_initial(std::size_t J, bool rotated = true);

/// Axis-aligned inconsistent triod: a horizontal chain from (-zt,0) to (1,0) and two
/// vertical chains to (-zt, +-z), zt = sqrt(1 - z^2).
TriodState make_epsilon_initial(std::size_t J, double z = 0.1);

/// Junction of the straight-segment equilibrium for epsilon = 0: (-zt + z/sqrt(3), 0).
Vec2 steiner_point(double z = 0.1);

/// Three spirals x (cos(6 pi x + g_i), sin(6 pi x + g_i)), g_i = 0, 2pi/3, 4pi/3.
TriodState make_spiral_initial(std::size_t J);

/// How the self-intersection data are made to share a junction. The printed
/// curves 2 and 3 start at (0, b(0)) and (0, -b(0)) instead of the origin.
enum class JunctionFix {
  shift,        ///< translate curves 2 and 3 by minus their value at x = 0
  reinterpret,  ///< use b(x) - b(0) in place of b(x)
};

JunctionFix parse_junction_fix(std::string_view name);

/// b(x) = (3/2) sqrt(3) (x - 1/3)^2 - sqrt(3)/2
double self_intersect_profile(double x);

TriodState make_self_intersect_initial(std::size_t J, JunctionFix fix = JunctionFix::shift);

/// Three straight unit segments from the origin at polar angles 90, 210, 330 degrees.
TriodState make_steiner_triod(std::size_t J);

}  // namespace triodflow
