#include "speclab/embedded.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "speclab/common.hpp"
#include "speclab/dynamics.hpp"

namespace speclab {

namespace {

double log_r_slope(const Potential& p, double k, std::int64_t L) {
  PrueferFlow flow(p, EnergyPoint::from_k(k));
  const std::int64_t n_lo = std::max<std::int64_t>(2, L / 10);
  constexpr int kSamples = 25;
  std::vector<double> xs, ys;
  xs.reserve(kSamples);
  ys.reserve(kSamples);
  const double ratio = std::log(double(L) / double(n_lo));
  for (int i = 0; i < kSamples; ++i) {
    const std::int64_t n = std::int64_t(
        std::llround(double(n_lo) * std::exp(ratio * double(i) / (kSamples - 1))));
    flow.advance_to(n);
    xs.push_back(std::log(double(flow.state().n)));
    ys.push_back(flow.state().logR);
  }
  return linear_fit(xs, ys).slope;
}

}  // namespace

EmbeddedResult embedded_eigenvalue_experiment(double c, double k0, double phi0,
                                              std::int64_t L, int n_phases,
                                              double k_offset) {
  if (L < 100)
    throw std::invalid_argument("embedded_eigenvalue_experiment: L >= 100");
  if (n_phases < 1)
    throw std::invalid_argument("embedded_eigenvalue_experiment: n_phases");
  if (!(k0 - k_offset > 0.0 && k0 + k_offset < 0.5))
    throw std::invalid_argument(
        "embedded_eigenvalue_experiment: k0 +- offset must stay in (0, 1/2)");
  EmbeddedResult res;
  res.resonant_slope = std::numeric_limits<double>::infinity();
  res.off_resonant_min = std::numeric_limits<double>::infinity();
  res.off_resonant_max = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_phases; ++j) {
    const double phi = phi0 + kTwoPi * double(j) / double(n_phases);
    EmbeddedPhaseEntry entry;
    entry.phi = phi;
    const Potential p = Potential::wigner_von_neumann(c, k0, phi);
    entry.slope_resonant = log_r_slope(p, k0, L);
    entry.slope_below = log_r_slope(p, k0 - k_offset, L);
    entry.slope_above = log_r_slope(p, k0 + k_offset, L);
    res.resonant_slope = std::min(res.resonant_slope, entry.slope_resonant);
    res.off_resonant_min = std::min(
        res.off_resonant_min, std::min(entry.slope_below, entry.slope_above));
    res.off_resonant_max = std::max(
        res.off_resonant_max, std::max(entry.slope_below, entry.slope_above));
    res.phase_sweep.push_back(entry);
  }
  return res;
}

}  // namespace speclab
