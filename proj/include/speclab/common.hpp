#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace speclab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Thrown when a recursion produces a value that is impossible in exact
/// arithmetic (non-positive amplitude ratio, NaN contamination).  Carries the
/// step index at which the fault was detected.
class numerical_fault : public std::runtime_error {
 public:
  numerical_fault(const std::string& what, std::int64_t index)
      : std::runtime_error(what + " at index " + std::to_string(index)),
        index_(index) {}
  std::int64_t index() const { return index_; }

 private:
  std::int64_t index_;
};

/// Kahan–Babuška (Neumaier) compensated accumulator.  Left-to-right
/// accumulation order; deterministic for a fixed input sequence.
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Reduce to the half-open window (-1/2, 1/2].
inline double wrap_pm_half(double x) {
  double d = x - std::round(x);
  if (d <= -0.5) d += 1.0;
  if (d > 0.5) d -= 1.0;
  return d;
}

/// Fractional part in [0, 1).
inline double frac01(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;  // guards x = -eps rounding up
  if (f < 0.0) f += 1.0;
  return f;
}

/// splitmix64 finalizer; the canonical 64-bit mixing function.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic uniform draw in [-1, 1) addressed by (seed, n).  Random
/// access: draw i is independent of draws before it.
inline double signed_uniform_at(std::uint64_t seed, std::uint64_t n) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(n));
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
  return 2.0 * u - 1.0;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Ordinary least squares y ~ slope*x + intercept.
inline LinearFit linear_fit(std::span<const double> xs,
                            std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("linear_fit: need >= 2 matching points");
  }
  double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate x");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = std::abs(ys[i] - (fit.slope * xs[i] + fit.intercept));
    fit.max_residual = std::max(fit.max_residual, r);
  }
  return fit;
}

/// Shortest-round-trip decimal rendering used by every CSV/JSON writer so
/// that identical runs produce byte-identical output.
inline std::string to_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace speclab
