#include "speclab/potential.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "speclab/common.hpp"

namespace speclab {

std::string family_name(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::zero:
      return "zero";
    case PotentialFamily::power_decay:
      return "power_decay";
    case PotentialFamily::wigner_von_neumann:
      return "wigner_von_neumann";
    case PotentialFamily::sampled_table:
      return "sampled_table";
    case PotentialFamily::seeded_random_decay:
      return "seeded_random_decay";
  }
  return "?";
}

Potential Potential::zero() {
  Potential p;
  p.family_ = PotentialFamily::zero;
  p.declared_bound_ = 0.0;
  return p;
}

Potential Potential::power_decay(double B, double alpha) {
  if (!(B > 0.0)) throw std::invalid_argument("power_decay: B must be > 0");
  if (!(alpha > 0.0))
    throw std::invalid_argument("power_decay: alpha must be > 0");
  Potential p;
  p.family_ = PotentialFamily::power_decay;
  p.a_ = B;
  p.b_ = alpha;
  // (1+n)^alpha >= 1+n only when alpha >= 1; otherwise no B/(1+n) bound.
  if (alpha >= 1.0) p.declared_bound_ = B;
  return p;
}

Potential Potential::wigner_von_neumann(double c, double k0, double phi) {
  if (!(k0 > 0.0 && k0 < 1.0))
    throw std::invalid_argument("wigner_von_neumann: k0 must be in (0,1)");
  Potential p;
  p.family_ = PotentialFamily::wigner_von_neumann;
  p.a_ = c;
  p.b_ = k0;
  p.c_ = phi;
  p.declared_bound_ = std::abs(c);
  return p;
}

Potential Potential::sampled_table(std::vector<double> values) {
  Potential p;
  p.family_ = PotentialFamily::sampled_table;
  double bound = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (!std::isfinite(values[n]))
      throw std::invalid_argument("sampled_table: non-finite entry");
    bound = std::max(bound, std::abs(values[n]) * (1.0 + double(n)));
  }
  p.values_ = std::make_shared<const std::vector<double>>(std::move(values));
  p.declared_bound_ = bound;
  return p;
}

Potential Potential::seeded_random_decay(double B, std::uint64_t seed) {
  if (!(B >= 0.0))
    throw std::invalid_argument("seeded_random_decay: B must be >= 0");
  Potential p;
  p.family_ = PotentialFamily::seeded_random_decay;
  p.a_ = B;
  p.seed_ = seed;
  p.declared_bound_ = B;
  return p;
}

double Potential::eval(std::int64_t n) const {
  if (n < 0) throw std::invalid_argument("Potential::eval: n must be >= 0");
  if (cutoff_ && n > *cutoff_) return 0.0;
  switch (family_) {
    case PotentialFamily::zero:
      return 0.0;
    case PotentialFamily::power_decay: {
      double den = b_ == 1.0 ? (1.0 + double(n)) : std::pow(1.0 + double(n), b_);
      return a_ / den;
    }
    case PotentialFamily::wigner_von_neumann:
      return a_ * std::sin(kTwoPi * b_ * double(n) + c_) / (1.0 + double(n));
    case PotentialFamily::sampled_table:
      return n < std::int64_t(values_->size()) ? (*values_)[std::size_t(n)]
                                               : 0.0;
    case PotentialFamily::seeded_random_decay:
      return a_ * signed_uniform_at(seed_, std::uint64_t(n)) /
             (1.0 + double(n));
  }
  return 0.0;
}

Potential Potential::with_cutoff(std::int64_t L) const {
  if (L < 1) throw std::invalid_argument("cutoff: L must be >= 1");
  Potential p = *this;
  p.cutoff_ = cutoff_ ? std::min(*cutoff_, L) : L;
  return p;
}

double Potential::param(const std::string& name) const {
  if (name == "B" || name == "c") return a_;
  if (name == "alpha" || name == "k0") return b_;
  if (name == "phi") return c_;
  throw std::invalid_argument("Potential::param: unknown name " + name);
}

std::vector<double> Potential::table(std::int64_t n_max) const {
  if (n_max < 0) throw std::invalid_argument("table: n_max must be >= 0");
  std::vector<double> t(std::size_t(n_max) + 1);
  for (std::int64_t n = 0; n <= n_max; ++n) t[std::size_t(n)] = eval(n);
  return t;
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << family_name(family_);
  switch (family_) {
    case PotentialFamily::zero:
      break;
    case PotentialFamily::power_decay:
      os << " B=" << a_ << " alpha=" << b_;
      break;
    case PotentialFamily::wigner_von_neumann:
      os << " c=" << a_ << " k0=" << b_ << " phi=" << c_;
      break;
    case PotentialFamily::sampled_table:
      os << " size=" << values_->size();
      break;
    case PotentialFamily::seeded_random_decay:
      os << " B=" << a_ << " seed=" << seed_;
      break;
  }
  if (cutoff_) os << " L=" << *cutoff_;
  return os.str();
}

BoundCheck verify_bound(const Potential& p, double B, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("verify_bound: N must be >= 1");
  BoundCheck r;
  for (std::int64_t n = 0; n <= N; ++n) {
    double v = std::abs(p.eval(n));
    double allowed = B / (1.0 + double(n));
    if (v > allowed) {
      r.ok = false;
      r.first_violation = n;
      r.value = v;
      r.allowed = allowed;
      return r;
    }
  }
  return r;
}

}  // namespace speclab
