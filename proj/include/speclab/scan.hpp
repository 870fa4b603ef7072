#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "speclab/potential.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

/// Parameters of the multiscale separated-singular-interval experiment.
/// Scale m works at eps_m = eps^m with horizon L_m = floor(eps_m^{-(1+sigma)})
/// and separation length eps_m^{1/N^2}.
struct ScanConfig {
  double beta = 0.5;   // in (0,1); M = 1 + beta
  double sigma = 0.5;  // > 0
  double eps = 0.1;    // in (0,1)
  int N = 10;
  double C1 = 0.0;  // <= 0 means: calibrate from the residual envelope
  double window_klo = 0.1;
  double window_khi = 0.4;
  double grid_resolution = 4.0;       // grid points per separation length
  std::int64_t min_grid_points = 512;  // lower bound on the k-grid size
  std::int64_t scale_L_cap = 10000000;
  int jobs = 1;

  double M() const { return 1.0 + beta; }
  double eps_m(int m) const;
  std::int64_t L_m(int m) const;
  double separation_length(int m) const;  // eps_m^{1/N^2}
  double r2_threshold(int m) const;       // C(I) eps_m^{1-beta}
  double CI() const;  // 2 sup_{window} 1/sin^2(pi k)
  void validate() const;
};

/// Empirical envelope of the amplitude-identity residual over the window,
/// taken over the zero and power-decay(B=1) families.  Used as the default
/// bridge constant between small amplitude and large phase sums.
double bridge_constant_envelope(double klo, double khi, std::int64_t L,
                                int grid_points = 17);

double effective_C1(const ScanConfig& cfg, std::int64_t L);

struct ScanPoint {
  double k = 0.0;
  double log_R2 = 0.0;   // log R^2 at the scale horizon
  double R2 = 0.0;
  double sum_value = 0.0;      // |sum V(n) sin(2 pi theta)| certificate
  double sum_threshold = 0.0;  // (1-beta) C1 log(1/eps_m)
  double residual = 0.0;       // amplitude-identity residual
  double residual_bound = 0.0;
  bool condition1 = false;
};

struct SeparatedSet {
  int m = 0;
  double eps_m = 0.0;
  std::int64_t L_m = 0;
  double C1 = 0.0;
  double r2_threshold = 0.0;
  double grid_spacing = 0.0;
  std::int64_t grid_points = 0;
  std::int64_t candidate_count = 0;   // grid points below the R^2 threshold
  std::vector<double> candidates;     // their k values (ascending)
  std::vector<ScanPoint> accepted;    // separated + condition-1 certified
  std::vector<ScanPoint> rejected;    // separated but condition 1 failed
  std::vector<double> marginal;       // R^2 within a factor 2 of threshold
  bool grid_insufficient = false;     // two accepted points in adjacent cells
  std::int64_t boundary_adjacent = 0;  // accepted points with candidate neighbor
};

struct SeparationPointReport {
  double k = 0.0;
  double sum_value = 0.0;
  bool pass = false;
};

struct SeparationReport {
  bool ok = false;
  bool condition1_ok = false;
  bool condition2_ok = false;
  double sum_threshold = 0.0;
  double gap_required = 0.0;
  double min_gap = 0.0;
  std::vector<SeparationPointReport> points;
};

/// Checks the two separation conditions at scale m for the given points:
/// large weighted potential-phase sums and pairwise gaps >= eps_m^{1/N^2}.
SeparationReport separation_test(std::span<const double> ks,
                                 const Potential& p, const ScanConfig& cfg,
                                 int m);

/// Scans the window for quasimomenta with anomalously small Prufer
/// amplitude at the scale horizon, greedily selects a maximal subset with
/// pairwise gaps >= 2 eps_m^{1/N^2}, and certifies each selected point by
/// the amplitude identity.
SeparatedSet singular_interval_scan(const Potential& p, const ScanConfig& cfg,
                                    int m);

struct CoverReport {
  std::int64_t count = 0;
  std::vector<std::pair<double, double>> intervals;  // in k
  double candidate_mass = 0.0;  // mu_{L_m} of the covered set (in E)
};

struct ScaleReport {
  int m = 0;
  bool skipped = false;
  std::string note;
  SeparatedSet set;
  CoverReport cover;
};

struct ScanReport {
  double C1 = 0.0;
  std::vector<ScaleReport> scales;
  bool count_exceeded = false;  // some accepted set larger than N
  bool cover_exceeded = false;  // some cover larger than 8N
};

ScanReport count_bound_experiment(const Potential& p, const ScanConfig& cfg,
                                  std::span<const int> scales);

struct DimensionOptions {
  MeasureMethod method = MeasureMethod::quadrature;
  std::int64_t oracle_N = 0;  // 0: defaults to 10 L
  QuadratureOptions quad;
};

struct DimensionFit {
  double slope = 0.0;
  std::vector<std::pair<double, double>> eps_mass;
  MeasureMethod method = MeasureMethod::quadrature;
};

/// Fits log mu_L(E - eps, E + eps) against log eps over the grid; slope near
/// 1 is smooth-density behavior, near 0 point-mass-like concentration.
/// Quadrature masses require every eps > 1/L (the density resolution scale)
/// and E inside (-2,2); the oracle method also covers energies outside the
/// band.
DimensionFit local_dimension_diagnostic(const Potential& p, std::int64_t L,
                                        double E,
                                        std::span<const double> eps_grid,
                                        const DimensionOptions& opts = {});

}  // namespace speclab
