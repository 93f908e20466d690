#include "triodflow/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "triodflow/errors.hpp"

namespace triodflow {

namespace {

void require_resolution(std::size_t J) {
  if (J < 2) throw std::invalid_argument("initial data need J >= 2");
}

}  // namespace

double convergence_junction_offset() { return (std::sqrt(3.0) - std::sqrt(2.0)) / 2.0; }

TriodState make_convergence_initial(std::size_t J, bool rotated) {
  require_resolution(J);
  const double zt = convergence_junction_offset();
  const double s3 = std::sqrt(3.0);
  const double s2 = std::sqrt(2.0);
  const double pi = std::numbers::pi;
  auto c1 = interpolate_initial(
      [=](double x) { return Vec2{zt + x * (1.0 - zt), (1.0 - zt) * std::sin(pi * x) / (2.0 * pi)}; }, J);
  auto c2 = interpolate_initial([=](double x) { return Vec2{zt - s3 * x / 2.0, s2 * x / 2.0}; }, J);
  auto c3 = interpolate_initial([=](double x) { return Vec2{zt - s3 * x * x / 2.0, -s2 * x / 2.0}; }, J);
  TriodState t = make_triod({std::move(c1), std::move(c2), std::move(c3)});
  return rotated ? rotate(t, 18.0) : t;
}

TriodState make_epsilon_initial(std::size_t J, double z) {
  require_resolution(J);
  if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("z must lie in (0, 1)");
  const double zt = std::sqrt(1.0 - z * z);
  auto c1 = interpolate_initial([=](double x) { return Vec2{-zt + x * (1.0 + zt), 0.0}; }, J);
  auto c2 = interpolate_initial([=](double x) { return Vec2{-zt, x * z}; }, J);
  auto c3 = interpolate_initial([=](double x) { return Vec2{-zt, -x * z}; }, J);
  return make_triod({std::move(c1), std::move(c2), std::move(c3)});
}

Vec2 steiner_point(double z) { return Vec2{-std::sqrt(1.0 - z * z) + z / std::sqrt(3.0), 0.0}; }

TriodState make_spiral_initial(std::size_t J) {
  require_resolution(J);
  const double pi = std::numbers::pi;
  std::array<CurveChain, 3> curves;
  for (std::size_t i = 0; i < 3; ++i) {
    const double gamma = 2.0 * pi * static_cast<double>(i) / 3.0;
    curves[i] = interpolate_initial(
        [=](double x) { return Vec2{x * std::cos(6.0 * pi * x + gamma), x * std::sin(6.0 * pi * x + gamma)}; }, J);
  }
  return make_triod(std::move(curves));
}

JunctionFix parse_junction_fix(std::string_view name) {
  if (name == "shift") return JunctionFix::shift;
  if (name == "reinterpret") return JunctionFix::reinterpret;
  throw ConfigError("unknown junction_fix '" + std::string(name) + "' (expected shift or reinterpret)");
}

double self_intersect_profile(double x) {
  const double s3 = std::sqrt(3.0);
  return 1.5 * s3 * (x - 1.0 / 3.0) * (x - 1.0 / 3.0) - s3 / 2.0;
}

TriodState make_self_intersect_initial(std::size_t J, JunctionFix fix) {
  require_resolution(J);
  const double b0 = self_intersect_profile(0.0);
  auto c1 = interpolate_initial([](double x) { return Vec2{x, 0.0}; }, J);
  CurveChain c2;
  CurveChain c3;
  if (fix == JunctionFix::reinterpret) {
    const auto b = [b0](double x) { return self_intersect_profile(x) - b0; };
    c2 = interpolate_initial([=](double x) { return Vec2{-x, b(x)}; }, J);
    c3 = interpolate_initial([=](double x) { return Vec2{x, -b(x)}; }, J);
  } else {
    c2 = interpolate_initial([](double x) { return Vec2{-x, self_intersect_profile(x)}; }, J);
    c3 = interpolate_initial([](double x) { return Vec2{x, -self_intersect_profile(x)}; }, J);
    for (auto& p : c2.nodes) p -= Vec2{0.0, b0};
    for (auto& p : c3.nodes) p += Vec2{0.0, b0};
    c2.nodes[0] = Vec2{};
    c3.nodes[0] = Vec2{};
    c2.endpoint = c2.nodes.back();
    c3.endpoint = c3.nodes.back();
  }
  return make_triod({std::move(c1), std::move(c2), std::move(c3)});
}

TriodState make_steiner_triod(std::size_t J) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  std::array<CurveChain, 3> curves;
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = (90.0 + 120.0 * static_cast<double>(i)) * std::numbers::pi / 180.0;
    const Vec2 dir{std::cos(a), std::sin(a)};
    curves[i] = interpolate_initial([=](double x) { return x * dir; }, J);
  }
  return make_triod(std::move(curves));
}

}  // namespace triodflow
