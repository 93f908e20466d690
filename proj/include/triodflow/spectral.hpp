#pragma once

/// @file spectral.hpp
/// @brief Conditioning of the mass block and of the constrained system matrix.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "triodflow/curve_mesh.hpp"

namespace triodflow {

/// Dense row-major square matrix, just enough for the eigen computations here.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.
std::vector<double> jacobi_eigenvalues(DenseMatrix a, double tol = 1e-14, std::size_t max_sweeps = 100);

struct SpectrumReport {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double cond2 = 0.0;
  std::optional<double> eoc_vs_previous;
};

/// diag(M_1, M_2, M_3) in scalar indexing 2*(i*(J+1)+j)+component, no constraints applied.
DenseMatrix dense_mass_block(const TriodState& triod, double epsilon, double delta);

/// Spectrum of diag(M_1,M_2,M_3) after dividing every row by its diagonal entry.
SpectrumReport equilibrated_mass_spectrum(const TriodState& triod, double epsilon, double delta);

/// Orthonormal basis of the constrained subspace (shared junction, node J removed),
/// one column per entry; dimension 6J-4. Columns are in the scalar indexing above.
std::vector<std::vector<double>> constrained_basis(std::size_t J);

/// B^T diag(M+S) B for the orthonormal constrained basis B.
DenseMatrix reduced_system_matrix(const TriodState& triod, double epsilon, double delta);

/// lambda_max / lambda_min of the reduced system matrix.
SpectrumReport system_condition(const TriodState& triod, double epsilon, double delta);

/// EOC of consecutive (parameter, cond2) pairs:
/// (log c_{l-1} - log c_l) / (log p_{l-1} - log p_l).
std::vector<double> conditioning_eoc(const std::vector<std::pair<double, double>>& values);

}  // namespace triodflow
