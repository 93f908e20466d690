#pragma once

/// @file assembly.hpp
/// @brief Per-curve mass/stiffness matrices and the constrained step operator.
///
/// Unknowns of the three curves are stored as one flat vector of planar
/// points, entry `i*(J+1) + j` holding node j of curve i. Each per-curve
/// matrix is block tridiagonal with 2x2 blocks; all element integrals are
/// exact because the geometric factors are constant on each element.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "triodflow/curve_mesh.hpp"

namespace triodflow {

struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

  static constexpr Mat2 identity(double s = 1.0) { return {s, 0.0, 0.0, s}; }
  static constexpr Mat2 outer(Vec2 a, Vec2 b) { return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y}; }
  constexpr Mat2 transposed() const { return {xx, yx, xy, yy}; }

  friend constexpr Mat2 operator+(Mat2 a, Mat2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yx + b.yx, a.yy + b.yy}; }
  friend constexpr Mat2 operator*(double s, Mat2 a) { return {s * a.xx, s * a.xy, s * a.yx, s * a.yy}; }
  friend constexpr Vec2 operator*(Mat2 a, Vec2 v) { return {a.xx * v.x + a.xy * v.y, a.yx * v.x + a.yy * v.y}; }
  constexpr Mat2& operator+=(Mat2 b) {
    xx += b.xx;
    xy += b.xy;
    yx += b.yx;
    yy += b.yy;
    return *this;
  }
  friend constexpr bool operator==(Mat2, Mat2) = default;
};

/// Symmetric block-tridiagonal matrix over J+1 nodes.
class BlockTridiag {
 public:
  explicit BlockTridiag(std::size_t J) : diag_(J + 1), off_(J) {}

  std::size_t nodes() const noexcept { return diag_.size(); }
  std::vector<Mat2>& diag() noexcept { return diag_; }
  const std::vector<Mat2>& diag() const noexcept { return diag_; }
  /// off()[j] is block (j, j+1); block (j+1, j) is its transpose.
  std::vector<Mat2>& off() noexcept { return off_; }
  const std::vector<Mat2>& off() const noexcept { return off_; }

  /// Block (j, k); zero outside the band.
  Mat2 block(std::size_t j, std::size_t k) const;

  /// Scalar entry in the node-major 2(J+1) indexing (row 2j+a, column 2k+b).
  double entry(std::size_t row, std::size_t col) const;

  /// out = A * in for one curve's node vector.
  void multiply(std::span<const Vec2> in, std::span<Vec2> out) const;

  friend BlockTridiag operator+(const BlockTridiag& a, const BlockTridiag& b);

 private:
  std::vector<Mat2> diag_;
  std::vector<Mat2> off_;
};

BlockTridiag assemble_mass(const ElementGeometry& geom, double h, double epsilon, double delta);
BlockTridiag assemble_stiffness(const ElementGeometry& geom, double h, double epsilon);

/// Replaces the three junction entries by their mean; all other entries untouched.
void apply_projection(std::span<Vec2> v, std::size_t J);
std::vector<Vec2> projected(std::span<const Vec2> v, std::size_t J);

/// Zeroes the node-J entry of every curve.
void apply_dirichlet_mask(std::span<Vec2> v, std::size_t J);

/// Flattens the nodal positions of a triod.
std::vector<Vec2> flatten(const TriodState& triod);

/// v -> Mask P diag(A_1, A_2, A_3) P Mask v, applied matrix-free.
class ConstrainedOperator {
 public:
  explicit ConstrainedOperator(std::array<BlockTridiag, 3> blocks);

  std::size_t J() const noexcept { return blocks_[0].nodes() - 1; }
  std::size_t size() const noexcept { return 3 * blocks_[0].nodes(); }
  const std::array<BlockTridiag, 3>& blocks() const noexcept { return blocks_; }

  void apply(std::span<const Vec2> in, std::span<Vec2> out) const;

 private:
  std::array<BlockTridiag, 3> blocks_;
};

struct StepSystem {
  ConstrainedOperator op;
  std::vector<Vec2> rhs;
};

/// Mass and stiffness of all three curves frozen at the given state.
struct CurveMatrices {
  std::array<BlockTridiag, 3> mass;
  std::array<BlockTridiag, 3> stiffness;
};

CurveMatrices assemble_curves(const TriodState& triod, double epsilon, double delta);

/// Operator and right-hand side for the increment U^n - U^{n-1} of one IMEX step.
StepSystem build_step_system(const TriodState& triod, const SimParams& params);

}  // namespace triodflow
