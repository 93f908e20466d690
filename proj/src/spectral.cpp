#include "triodflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "triodflow/assembly.hpp"
#include "triodflow/errors.hpp"

namespace triodflow {

std::vector<double> jacobi_eigenvalues(DenseMatrix a, double tol, std::size_t max_sweeps) {
  const std::size_t n = a.size();
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  }
  frob = std::sqrt(frob);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    }
    if (std::sqrt(off) <= tol * frob) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace {

DenseMatrix dense_block_diagonal(const std::array<BlockTridiag, 3>& blocks) {
  const std::size_t nodes = blocks[0].nodes();
  const std::size_t per = 2 * nodes;
  DenseMatrix a(3 * per);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t r = 0; r < per; ++r) {
      const std::size_t lo = r >= 3 ? r - 3 : 0;
      const std::size_t hi = std::min(per, r + 4);
      for (std::size_t c = lo; c < hi; ++c) a(i * per + r, i * per + c) = blocks[i].entry(r, c);
    }
  }
  return a;
}

SpectrumReport make_report(const std::vector<double>& ev) {
  SpectrumReport rep;
  rep.lambda_min = ev.front();
  rep.lambda_max = ev.back();
  rep.cond2 = rep.lambda_max / rep.lambda_min;
  return rep;
}

}  // namespace

DenseMatrix dense_mass_block(const TriodState& triod, double epsilon, double delta) {
  const auto mats = assemble_curves(triod, epsilon, delta);
  return dense_block_diagonal(mats.mass);
}

SpectrumReport equilibrated_mass_spectrum(const TriodState& triod, double epsilon, double delta) {
  DenseMatrix a = dense_mass_block(triod, epsilon, delta);
  const std::size_t n = a.size();
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a(i, i) > 0.0)) throw NonpositiveDiagonal("mass block diagonal entry " + std::to_string(i) + " is not positive");
    scale[i] = 1.0 / std::sqrt(a(i, i));
  }
  // D^{-1}A is similar to the symmetric D^{-1/2} A D^{-1/2}.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= scale[i] * scale[j];
  }
  return make_report(jacobi_eigenvalues(std::move(a)));
}

std::vector<std::vector<double>> constrained_basis(std::size_t J) {
  if (J < 2) throw std::invalid_argument("constrained basis needs J >= 2");
  const std::size_t nodes = J + 1;
  const std::size_t n = 6 * nodes;
  std::vector<std::vector<double>> basis;
  basis.reserve(6 * J - 4);
  const double w = 1.0 / std::sqrt(3.0);
  for (std::size_t comp = 0; comp < 2; ++comp) {
    std::vector<double> col(n, 0.0);
    for (std::size_t i = 0; i < 3; ++i) col[2 * (i * nodes) + comp] = w;
    basis.push_back(std::move(col));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 1; j < J; ++j) {
      for (std::size_t comp = 0; comp < 2; ++comp) {
        std::vector<double> col(n, 0.0);
        col[2 * (i * nodes + j) + comp] = 1.0;
        basis.push_back(std::move(col));
      }
    }
  }
  return basis;
}

DenseMatrix reduced_system_matrix(const TriodState& triod, double epsilon, double delta) {
  const std::size_t J = triod.J();
  const auto mats = assemble_curves(triod, epsilon, delta);
  const DenseMatrix a = dense_block_diagonal(
      {mats.mass[0] + mats.stiffness[0], mats.mass[1] + mats.stiffness[1], mats.mass[2] + mats.stiffness[2]});
  const auto basis = constrained_basis(J);

  // Sparse view of the basis columns.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    for (std::size_t r = 0; r < basis[k].size(); ++r) {
      if (basis[k][r] != 0.0) cols[k].emplace_back(r, basis[k][r]);
    }
  }
  DenseMatrix red(basis.size());
  for (std::size_t p = 0; p < cols.size(); ++p) {
    for (std::size_t q = 0; q < cols.size(); ++q) {
      double s = 0.0;
      for (const auto& [r, wr] : cols[p]) {
        for (const auto& [c, wc] : cols[q]) s += wr * a(r, c) * wc;
      }
      red(p, q) = s;
    }
  }
  return red;
}

SpectrumReport system_condition(const TriodState& triod, double epsilon, double delta) {
  return make_report(jacobi_eigenvalues(reduced_system_matrix(triod, epsilon, delta)));
}

std::vector<double> conditioning_eoc(const std::vector<std::pair<double, double>>& values) {
  if (values.size() < 2) throw InvalidSequence("EOC needs at least two entries");
  for (const auto& [p, c] : values) {
    if (!(p > 0.0) || !(c > 0.0)) throw InvalidSequence("EOC inputs must be positive");
  }
  std::vector<double> out;
  for (std::size_t l = 1; l < values.size(); ++l) {
    const auto [p0, c0] = values[l - 1];
    const auto [p1, c1] = values[l];
    if (p0 == p1) throw InvalidSequence("EOC parameters must differ");
    out.push_back((std::log(c0) - std::log(c1)) / (std::log(p0) - std::log(p1)));
  }
  return out;
}

}  // namespace triodflow
