#include "triodflow/assembly.hpp"

#include <stdexcept>

namespace triodflow {

Mat2 BlockTridiag::block(std::size_t j, std::size_t k) const {
  if (j == k) return diag_[j];
  if (k == j + 1) return off_[j];
  if (j == k + 1) return off_[k].transposed();
  return {};
}

double BlockTridiag::entry(std::size_t row, std::size_t col) const {
  const Mat2 b = block(row / 2, col / 2);
  const std::size_t a = row % 2;
  const std::size_t c = col % 2;
  if (a == 0) return c == 0 ? b.xx : b.xy;
  return c == 0 ? b.yx : b.yy;
}

void BlockTridiag::multiply(std::span<const Vec2> in, std::span<Vec2> out) const {
  const std::size_t n = diag_.size();
  for (std::size_t j = 0; j < n; ++j) {
    Vec2 acc = diag_[j] * in[j];
    if (j + 1 < n) acc += off_[j] * in[j + 1];
    if (j > 0) acc += off_[j - 1].transposed() * in[j - 1];
    out[j] = acc;
  }
}

BlockTridiag operator+(const BlockTridiag& a, const BlockTridiag& b) {
  if (a.nodes() != b.nodes()) throw std::invalid_argument("block size mismatch");
  BlockTridiag c = a;
  for (std::size_t j = 0; j < c.diag_.size(); ++j) c.diag_[j] += b.diag_[j];
  for (std::size_t j = 0; j < c.off_.size(); ++j) c.off_[j] += b.off_[j];
  return c;
}

BlockTridiag assemble_mass(const ElementGeometry& geom, double h, double epsilon, double delta) {
  const std::size_t J = geom.size();
  BlockTridiag m(J);
  for (std::size_t e = 0; e < J; ++e) {
    const double q = geom.length_element[e];
    // Element density (1/delta)(q nu nu^T + eps q^2 tau tau^T), times the hat integrals h/3, h/6.
    const Mat2 density = (1.0 / delta) * (q * Mat2::outer(geom.normal[e], geom.normal[e]) +
                                          (epsilon * q * q) * Mat2::outer(geom.tangent[e], geom.tangent[e]));
    m.diag()[e] += (h / 3.0) * density;
    m.diag()[e + 1] += (h / 3.0) * density;
    m.off()[e] += (h / 6.0) * density;
  }
  return m;
}

BlockTridiag assemble_stiffness(const ElementGeometry& geom, double h, double epsilon) {
  const std::size_t J = geom.size();
  BlockTridiag s(J);
  for (std::size_t e = 0; e < J; ++e) {
    const double coeff = (epsilon + 1.0 / geom.length_element[e]) / h;
    s.diag()[e] += Mat2::identity(coeff);
    s.diag()[e + 1] += Mat2::identity(coeff);
    s.off()[e] += Mat2::identity(-coeff);
  }
  return s;
}

void apply_projection(std::span<Vec2> v, std::size_t J) {
  if (v.size() != 3 * (J + 1)) throw std::invalid_argument("projection: vector size mismatch");
  const std::size_t stride = J + 1;
  const Vec2 mean = (v[0] + v[stride] + v[2 * stride]) / 3.0;
  v[0] = mean;
  v[stride] = mean;
  v[2 * stride] = mean;
}

std::vector<Vec2> projected(std::span<const Vec2> v, std::size_t J) {
  std::vector<Vec2> out(v.begin(), v.end());
  apply_projection(std::span<Vec2>(out), J);
  return out;
}

void apply_dirichlet_mask(std::span<Vec2> v, std::size_t J) {
  if (v.size() != 3 * (J + 1)) throw std::invalid_argument("mask: vector size mismatch");
  for (std::size_t i = 0; i < 3; ++i) v[i * (J + 1) + J] = Vec2{};
}

std::vector<Vec2> flatten(const TriodState& triod) {
  std::vector<Vec2> u;
  u.reserve(3 * (triod.J() + 1));
  for (const auto& c : triod.curves) u.insert(u.end(), c.nodes.begin(), c.nodes.end());
  return u;
}

ConstrainedOperator::ConstrainedOperator(std::array<BlockTridiag, 3> blocks)
    : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.nodes() != blocks_[0].nodes()) throw std::invalid_argument("operator blocks differ in size");
  }
}

void ConstrainedOperator::apply(std::span<const Vec2> in, std::span<Vec2> out) const {
  const std::size_t n = blocks_[0].nodes();
  const std::size_t J = n - 1;
  std::vector<Vec2> v(in.begin(), in.end());
  apply_dirichlet_mask(v, J);
  apply_projection(std::span<Vec2>(v), J);
  for (std::size_t i = 0; i < 3; ++i) {
    blocks_[i].multiply(std::span<const Vec2>(v).subspan(i * n, n), out.subspan(i * n, n));
  }
  apply_projection(out, J);
  apply_dirichlet_mask(out, J);
}

CurveMatrices assemble_curves(const TriodState& triod, double epsilon, double delta) {
  const std::size_t J = triod.J();
  const double h = 1.0 / static_cast<double>(J);
  CurveMatrices out{{BlockTridiag(J), BlockTridiag(J), BlockTridiag(J)},
                    {BlockTridiag(J), BlockTridiag(J), BlockTridiag(J)}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto geom = element_geometry(triod.curves[i], h, i);
    out.mass[i] = assemble_mass(geom, h, epsilon, delta);
    out.stiffness[i] = assemble_stiffness(geom, h, epsilon);
  }
  return out;
}

StepSystem build_step_system(const TriodState& triod, const SimParams& params) {
  const std::size_t J = triod.J();
  if (J != params.J()) throw std::invalid_argument("triod resolution differs from params.J");
  auto mats = assemble_curves(triod, params.epsilon(), params.delta());

  // rhs = -Mask P diag(S) P U, with S U summed from element differences so that
  // a translation of U only enters through rounding of the differences.
  std::vector<Vec2> u = flatten(triod);
  apply_projection(std::span<Vec2>(u), J);
  std::vector<Vec2> rhs(u.size());
  const std::size_t n = J + 1;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& off = mats.stiffness[i].off();
    for (std::size_t e = 0; e < J; ++e) {
      const Vec2 flux = -off[e].xx * (u[i * n + e + 1] - u[i * n + e]);
      rhs[i * n + e] += flux;
      rhs[i * n + e + 1] -= flux;
    }
  }
  apply_projection(std::span<Vec2>(rhs), J);
  apply_dirichlet_mask(rhs, J);

  std::array<BlockTridiag, 3> system{mats.mass[0] + mats.stiffness[0], mats.mass[1] + mats.stiffness[1],
                                     mats.mass[2] + mats.stiffness[2]};
  return StepSystem{ConstrainedOperator(std::move(system)), std::move(rhs)};
}

}  // namespace triodflow
