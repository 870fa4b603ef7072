#pragma once

#include <cstdint>
#include <vector>

namespace speclab {

/// Resonance experiment for the amplitude-modulated oscillating potential
/// V(n) = c sin(2 pi k0 n + phi) / (1+n): at k = k0 the Prufer amplitude
/// drifts like a power of n (log R ~ slope * ln n) for suitable phases,
/// while off resonance the drift vanishes.
struct EmbeddedPhaseEntry {
  double phi = 0.0;
  double slope_resonant = 0.0;
  double slope_below = 0.0;  // at k0 - k_offset
  double slope_above = 0.0;  // at k0 + k_offset
};

struct EmbeddedResult {
  double resonant_slope = 0.0;       // min over the phase sweep
  double off_resonant_min = 0.0;     // extremes over phases and both offsets
  double off_resonant_max = 0.0;
  std::vector<EmbeddedPhaseEntry> phase_sweep;
};

/// Fits log R against ln n over n in [L/10, L] at k0 and k0 +- k_offset,
/// sweeping n_phases phases starting at phi0.
EmbeddedResult embedded_eigenvalue_experiment(double c, double k0, double phi0,
                                              std::int64_t L,
                                              int n_phases = 8,
                                              double k_offset = 0.05);

}  // namespace speclab
