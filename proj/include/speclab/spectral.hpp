#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "speclab/dynamics.hpp"
#include "speclab/energy.hpp"
#include "speclab/potential.hpp"

namespace speclab {

/// Complexified quasimomentum: 2 cos(pi (k + i gamma)) = z on the branch
/// k in (0,1), gamma < 0 (upper half plane).
struct ComplexEnergy {
  std::complex<double> z;
  double k;
  double gamma;
};

/// Inverts z = 2 cos(pi (k + i gamma)) for Im z > 0.  Throws otherwise.
ComplexEnergy complex_quasimomentum(std::complex<double> z);

/// Weyl m-function of the potential cut off at L, via the decaying solution
/// u~(n) = e^{-i pi (k + i gamma) n} for n >= L back-propagated to 0:
/// m(z) = -u~(1)/u~(0).  Herglotz: Im m > 0 for Im z > 0.
std::complex<double> weyl_m_truncated(const Potential& p, std::int64_t L,
                                      const ComplexEnergy& ce);

struct SpectralDensitySample {
  EnergyPoint ep;
  std::int64_t L;
  double density;  // d mu_L / dE > 0 on (-2,2)
};

/// Exact density of the cutoff measure at real energy:
///   d mu_L/dE = (1/pi) sin(pi k) / ((d - b cos(pi k))^2 + b^2 sin^2(pi k))
/// with (b, d) = (u(L), u(L+1)) of the Dirichlet solution under V_L.
SpectralDensitySample spectral_density_truncated(const Potential& p,
                                                 std::int64_t L,
                                                 const EnergyPoint& ep);

/// Density at a block of energies, sharing one table of V_L values.
std::vector<double> spectral_density_batch(const Potential& p, std::int64_t L,
                                           std::span<const double> energies,
                                           int jobs = 1);

enum class MeasureMethod { quadrature, oracle };

struct MeasureEstimate {
  double E1 = 0.0, E2 = 0.0;
  double mass = 0.0;
  double err_estimate = 0.0;
  MeasureMethod method = MeasureMethod::quadrature;
  bool converged = true;  // quadrature refinement stayed within depth limit
};

struct QuadratureOptions {
  double abs_tol = 1e-8;
  int max_depth = 40;
  int jobs = 1;
};

/// mu_L((E1, E2)) by adaptive Simpson quadrature of the exact density.
/// Panels are pre-split at the density's oscillation scale (~ 1/L in E)
/// before bisection refinement.
MeasureEstimate measure_of_interval(const Potential& p, std::int64_t L,
                                    double E1, double E2,
                                    const QuadratureOptions& opts = {});

struct OracleOptions {
  double eig_tol = 1e-12;
  int jobs = 1;
};

struct OracleMeasure {
  MeasureEstimate est;
  std::int64_t eigenvalue_count = 0;
  double min_spacing = 0.0;
  bool ill_conditioned = false;
};

/// Brute-force finite-section oracle: spectral mass of [E1, E2) for the
/// N x N tridiagonal truncation (diagonal V(1..N), unit off-diagonals),
/// summing squared first components of normalized eigenvectors.
OracleMeasure oracle_spectral_measure(const Potential& p, std::int64_t N,
                                      double E1, double E2,
                                      const OracleOptions& opts = {});

/// Free half-line spectral measure of (E1, E2), closed form.
double free_measure(double E1, double E2);

struct TwoMeasureReport {
  double eps = 0.0, M = 0.0, C = 0.0;
  double mass_ref = 0.0;    // mu_{L_ref}(E - eps, E + eps)
  double mass_inner = 0.0;  // mu_L(E - eps/2, E + eps/2)
  double deficit = 0.0;     // mass_ref - mass_inner
  double bound = 0.0;       // -C eps^M
  bool violation = false;   // deficit < bound
};

/// Comparison mu(E-eps,E+eps) >= mu_L(E-eps/2,E+eps/2) - C eps^M with the
/// full measure proxied by mu_{L_ref}.  Requires eps > L^{-1/(1+sigma)}.
TwoMeasureReport two_measure_comparison(const Potential& p, std::int64_t L,
                                        std::int64_t L_ref, double E,
                                        double eps, double M, double sigma,
                                        double C,
                                        const QuadratureOptions& opts = {});

}  // namespace speclab
