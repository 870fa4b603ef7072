#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace speclab {

/// Eigen-data of the N x N symmetric tridiagonal matrix with the given
/// diagonal and unit off-diagonals.  Eigenvalues are located by Sturm-count
/// bisection; squared first components of normalized eigenvectors come from
/// inverse iteration on the isolated eigenvalues.
struct JacobiEigenOptions {
  double eig_tol = 1e-12;
  double spacing_warn = 1e-13;
  int jobs = 1;
};

struct JacobiSpectralResult {
  std::vector<double> eigenvalues;  // ascending, restricted to [E1, E2)
  std::vector<double> weights;      // squared first eigenvector components
  double min_spacing = 0.0;         // over the returned eigenvalues
  bool ill_conditioned = false;     // some cluster unresolved below tolerance
};

/// Number of eigenvalues strictly below x (negative Sturm pivots).
std::int64_t sturm_count_below(std::span<const double> diag, double x);

/// Batched Sturm counts; one sweep over the diagonal per block of shifts.
void sturm_counts_below(std::span<const double> diag,
                        std::span<const double> shifts,
                        std::span<std::int64_t> out, int jobs = 1);

JacobiSpectralResult jacobi_first_component_weights(
    std::span<const double> diag, double E1, double E2,
    const JacobiEigenOptions& opts = {});

}  // namespace speclab
