#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "speclab/dynamics.hpp"
#include "speclab/energy.hpp"
#include "speclab/potential.hpp"

namespace speclab {

/// A finite real sequence indexed n = 1..L living in the weighted space with
/// inner product <u,v> = sum u(n) v(n) n.
struct WeightedSequence {
  std::vector<double> values;  // values[i] is entry n = i+1

  std::int64_t length() const { return std::int64_t(values.size()); }
};

double weighted_inner_product(const WeightedSequence& u,
                              const WeightedSequence& v);
double weighted_norm(const WeightedSequence& u);

struct SumCheckpoint {
  std::int64_t L;
  double value;
};

/// Partial-sum diagnostic: final value, running extrema over all partial
/// sums, checkpoints on a log grid (powers of 10^(1/4) from 100), and the
/// least-squares slope of checkpoint value against ln L over [fit_Lmin, L].
/// A bounded sum has slope near 0; the harmonic sum has slope 1.
struct SumDiagnostic {
  std::int64_t L = 0;
  double value = 0.0;
  double running_max = 0.0;
  double running_min = 0.0;
  double drift_slope = 0.0;
  std::vector<SumCheckpoint> checkpoints;
};

struct SumOptions {
  std::int64_t fit_Lmin = 1000;
  std::shared_ptr<const std::vector<double>> vtab;  // optional shared table
};

/// sum_{n=1}^{L} cos(4 pi theta(n,k)) / n with theta(n,k) the Prufer angle
/// after n steps (free case: theta(n) = (n+1) k).
SumDiagnostic weighted_cos4_sum(const Potential& p, const EnergyPoint& ep,
                                std::int64_t L, const SumOptions& opts = {});

/// sum_{n=1}^{L} sin(2 pi theta(n,k1)) sin(2 pi theta(n,k2)) / n for
/// distinct k1, k2 in a closed subinterval of (0, 1/2).
SumDiagnostic cross_sin_sum(const Potential& p, double k1, double k2,
                            std::int64_t L, const SumOptions& opts = {});

/// Positive control for the drift estimator: the harmonic sum itself.
SumDiagnostic harmonic_control_sum(std::int64_t L, const SumOptions& opts = {});

/// A(k) = sum_{n=1}^{L} sin^2(2 pi theta(n,k)) / n; grows like (1/2) ln L.
double normalization_constant(const Potential& p, const EnergyPoint& ep,
                              std::int64_t L);

/// e(n) = sin(2 pi theta(n,k)) / (sqrt(A) n), a unit vector of the weighted
/// space built from the phase sequence.
WeightedSequence unit_phase_vector(const Potential& p, const EnergyPoint& ep,
                                   std::int64_t L);

struct OrthogonalityReport {
  double alpha = 0.0;  // N sup_{i != j} |<e_i, e_j>|
  double lhs = 0.0;    // sum |<g, e_i>|^2
  double rhs = 0.0;    // (1 + alpha) ||g||^2
  bool applicable = true;  // alpha < 1 and all vectors unit
  bool holds = true;       // lhs <= rhs + 1e-10
};

/// Almost-orthogonality inequality for near-orthonormal unit systems.
/// Flags alpha >= 1 as inapplicable, non-unit inputs as errors.
OrthogonalityReport almost_orthogonality_check(
    const WeightedSequence& g, const std::vector<WeightedSequence>& units);

}  // namespace speclab
