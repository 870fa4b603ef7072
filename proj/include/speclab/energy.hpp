#pragma once

#include <cmath>
#include <stdexcept>

#include "speclab/common.hpp"

namespace speclab {

/// A point of the essential spectrum, E = 2 cos(pi k) with k in (0,1).
/// Stores both coordinates plus sin/cos of pi k, which every recursion needs.
struct EnergyPoint {
  double E;
  double k;
  double sin_pi_k;
  double cos_pi_k;

  static EnergyPoint from_k(double k) {
    if (!(k > 0.0 && k < 1.0))
      throw std::invalid_argument("EnergyPoint: k must be in (0,1)");
    EnergyPoint ep;
    ep.k = k;
    ep.sin_pi_k = std::sin(kPi * k);
    ep.cos_pi_k = std::cos(kPi * k);
    ep.E = 2.0 * ep.cos_pi_k;
    return ep;
  }

  static EnergyPoint from_energy(double E) {
    if (!(E > -2.0 && E < 2.0))
      throw std::invalid_argument("EnergyPoint: E must be in (-2,2)");
    EnergyPoint ep;
    ep.E = E;
    ep.k = std::acos(E / 2.0) / kPi;
    ep.cos_pi_k = E / 2.0;
    ep.sin_pi_k = std::sqrt(1.0 - ep.cos_pi_k * ep.cos_pi_k);
    return ep;
  }
};

}  // namespace speclab
