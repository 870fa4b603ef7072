#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace speclab {

enum class PotentialFamily {
  zero,
  power_decay,
  wigner_von_neumann,
  sampled_table,
  seeded_random_decay,
};

std::string family_name(PotentialFamily f);

/// A half-line potential V(n), n >= 0.  Immutable after construction; safe
/// for concurrent reads.
///
/// Families:
///   zero                 V(n) = 0
///   power_decay          V(n) = B / (1+n)^alpha
///   wigner_von_neumann   V(n) = c sin(2 pi k0 n + phi) / (1+n)
///   sampled_table        V(n) = table[n] for n < table size, else 0
///   seeded_random_decay  V(n) = B u(n) / (1+n), u(n) in [-1,1) drawn by a
///                        splitmix64 counter generator addressed by (seed, n)
///
/// An optional cutoff L forces V(n) = 0 for n > L.  declared_bound, when
/// present, is a constant B with |V(n)| <= B/(1+n) for all n >= 0.
class Potential {
 public:
  static Potential zero();
  static Potential power_decay(double B, double alpha);
  static Potential wigner_von_neumann(double c, double k0, double phi);
  static Potential sampled_table(std::vector<double> values);
  static Potential seeded_random_decay(double B, std::uint64_t seed);

  /// V(n).  Total: defined for every n >= 0.
  double eval(std::int64_t n) const;

  /// The potential cut off at L: agrees with *this on 0..L, zero beyond.
  /// Idempotent; an existing tighter cutoff is kept.
  Potential with_cutoff(std::int64_t L) const;

  PotentialFamily family() const { return family_; }
  std::optional<std::int64_t> cutoff() const { return cutoff_; }
  std::optional<double> declared_bound() const { return declared_bound_; }

  double param(const std::string& name) const;  // family parameter by name
  std::uint64_t seed() const { return seed_; }

  /// Tabulates V(0..n_max) into a dense array (index n).
  std::vector<double> table(std::int64_t n_max) const;

  /// Short human-readable description, e.g. "power_decay B=1 alpha=1 L=100".
  std::string describe() const;

 private:
  Potential() = default;

  PotentialFamily family_ = PotentialFamily::zero;
  double a_ = 0.0;  // B or c
  double b_ = 0.0;  // alpha or k0
  double c_ = 0.0;  // phi
  std::uint64_t seed_ = 0;
  std::shared_ptr<const std::vector<double>> values_;
  std::optional<std::int64_t> cutoff_;
  std::optional<double> declared_bound_;
};

struct BoundCheck {
  bool ok = true;
  std::int64_t first_violation = -1;  // smallest violating n, -1 if none
  double value = 0.0;                 // |V(n)| at the violation
  double allowed = 0.0;               // B/(1+n) at the violation
};

/// Checks |V(n)| <= B/(1+n) for 0 <= n <= N.
BoundCheck verify_bound(const Potential& p, double B, std::int64_t N);

}  // namespace speclab
