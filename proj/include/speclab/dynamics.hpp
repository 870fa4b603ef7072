#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "speclab/energy.hpp"
#include "speclab/potential.hpp"

namespace speclab {

/// Real 2x2 matrix [a b; c d] with unit determinant, stored together with a
/// log-scale accumulator: the represented matrix is exp(log_scale) * [a b; c d].
/// Entries are renormalized once their magnitude passes rescale_threshold, so
/// products over very long ranges neither overflow nor underflow.
struct TransferMatrix {
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;
  double log_scale = 0.0;

  static constexpr double rescale_threshold = 1e300;

  static TransferMatrix identity() { return {}; }

  /// One-step map (u(n-1), u(n)) -> (u(n), u(n+1)) of the difference
  /// equation u(n+1) + u(n-1) + v u(n) = E u(n): the matrix [0 1; -1 E-v].
  static TransferMatrix one_step(const EnergyPoint& ep, double v);

  /// Left-multiplies by the one-step matrix at potential value v.
  void apply_step(const EnergyPoint& ep, double v);

  /// Determinant of the represented matrix minus one (should vanish).
  double det_residual() const;

  double max_abs_entry() const;
};

/// Product of one-step matrices over sites 1..L: maps (u(0), u(1)) to
/// (u(L), u(L+1)) for any solution.  For Dirichlet data (0,1) the second
/// column (b, d) is (u(L), u(L+1)).
TransferMatrix transfer_product(const Potential& p, const EnergyPoint& ep,
                                std::int64_t L);

/// (u(L), u(L+1)) for the Dirichlet solution u(0)=0, u(1)=1, as
/// exp(log_scale) * (uL, uL1).
struct DirichletEndpoint {
  double uL = 0.0;
  double uL1 = 1.0;
  double log_scale = 0.0;
};

DirichletEndpoint dirichlet_endpoint(const Potential& p, const EnergyPoint& ep,
                                     std::int64_t L);

/// Batched variant: one pass of the scalar recursion per block of energies,
/// sharing a precomputed table vtab[n] = V(n) (must cover n = 1..L).
std::vector<DirichletEndpoint> dirichlet_endpoint_batch(
    std::span<const double> vtab, std::span<const double> energies,
    std::int64_t L, int jobs = 1);

/// Polar representation of a solution pair: the vector
///   Y = (1/sin pi k) [sin pi k, 0; -cos pi k, 1] (u_prev, u_cur)^T
/// written as Y = R (sin(pi theta - pi k), cos(pi theta - pi k))^T.
struct PolarPair {
  double R;           // |Y| > 0
  double theta_mod1;  // theta reduced to [0, 1)
};

PolarPair prufer_from_vector(double u_prev, double u_cur,
                             const EnergyPoint& ep);

/// Prufer state at step n, describing the solution pair (u(n), u(n+1)).
/// The angle is kept as an exact integer winding plus a fractional part in
/// [0,1), so lift differences stay accurate at n ~ 1e7.
struct PrueferState {
  std::int64_t n = 0;
  double logR = 0.0;
  double theta_wind = 0.0;
  double theta_frac = 0.0;

  double theta() const { return theta_wind + theta_frac; }
};

struct FlowOptions {
  /// Below this |sin(pi theta)| the cotangent recursion is replaced by one
  /// linear step of the solution vector.
  double delta_cot = 1e-6;
};

/// Dirichlet initial state: R(0) = 1/sin(pi k), theta(0) = k.
PrueferState prufer_initial_state(const EnergyPoint& ep);

/// One step of the amplitude/angle recursion with potential value v:
///   R(n+1)^2/R(n)^2 = 1 - (v/sin pi k) sin(2 pi theta)
///                       + (v/sin pi k)^2 sin^2(pi theta)
///   cot(pi theta(n+1) - pi k) = cot(pi theta(n)) - v/sin pi k
/// The angle branch is fixed by theta(n+1) - theta(n) - k in (-1/2, 1/2].
/// Throws numerical_fault if the amplitude ratio is not positive.
PrueferState prufer_step(const PrueferState& s, double v,
                         const EnergyPoint& ep, const FlowOptions& opts = {});

/// Sequential Prufer evolution of a fixed (potential, energy) pair with
/// audit counters.  Step n -> n+1 consumes V(n+1), matching the solution
/// pair (u(n), u(n+1)) evolving to (u(n+1), u(n+2)).
class PrueferFlow {
 public:
  PrueferFlow(Potential p, EnergyPoint ep, FlowOptions opts = {});
  PrueferFlow(Potential p, EnergyPoint ep,
              std::shared_ptr<const std::vector<double>> vtab,
              FlowOptions opts = {});

  const PrueferState& state() const { return s_; }
  const EnergyPoint& energy() const { return ep_; }

  /// Advances one step; returns theta(n+1) - theta(n) - k.
  double advance();
  void advance_to(std::int64_t n);

  double last_v() const { return last_v_; }

  /// Steps with |V/sin pi k| < 1/2 where the angle increment exceeded the
  /// admissible bound by more than 1e-12.
  std::int64_t increment_bound_violations() const { return violations_; }

 private:
  Potential p_;
  EnergyPoint ep_;
  FlowOptions opts_;
  std::shared_ptr<const std::vector<double>> vtab_;
  PrueferState s_;
  double last_v_ = 0.0;
  std::int64_t violations_ = 0;
};

/// States 0..L+1 of the flow (L+2 entries).
std::vector<PrueferState> prufer_trace(const Potential& p,
                                       const EnergyPoint& ep, std::int64_t L,
                                       const FlowOptions& opts = {});

/// The telescoped amplitude identity over steps 1..L-1:
///   lhs     = 2 (logR(L-1) - logR(0))           [trace indices]
///   rhs_sum = - sum_{n=1}^{L-1} (V(n)/sin pi k) sin(2 pi theta(n-1))
/// where theta(n-1) is the angle entering the step that consumes V(n).
/// residual = lhs - rhs_sum obeys |residual| <= second_order_bound
///          = 2 sum (V(n)/sin pi k)^2.
struct AmplitudeIdentity {
  double lhs = 0.0;
  double rhs_sum = 0.0;
  double residual = 0.0;
  double second_order_bound = 0.0;
  double log_R_final = 0.0;  // logR at trace index L-1
};

AmplitudeIdentity log_amplitude_identity(const Potential& p,
                                         const EnergyPoint& ep,
                                         std::int64_t L,
                                         const FlowOptions& opts = {});

/// log R(H)^2 = 2 logR at trace index H, for a block of quasimomenta.
/// Computed by the linear recursion (no trig), lane-blocked.
std::vector<double> log_amplitude_sq_batch(const Potential& p,
                                           std::span<const double> ks,
                                           std::int64_t H, int jobs = 1);

}  // namespace speclab
