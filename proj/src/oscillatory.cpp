#include "speclab/oscillatory.hpp"

#include <cmath>
#include <stdexcept>

#include "speclab/common.hpp"

namespace speclab {

double weighted_inner_product(const WeightedSequence& u,
                              const WeightedSequence& v) {
  if (u.length() != v.length())
    throw std::invalid_argument("weighted_inner_product: length mismatch");
  NeumaierSum s;
  for (std::size_t i = 0; i < u.values.size(); ++i)
    s.add(u.values[i] * v.values[i] * double(i + 1));
  return s.value();
}

double weighted_norm(const WeightedSequence& u) {
  return std::sqrt(weighted_inner_product(u, u));
}

namespace {

/// Streams terms f(n)/n for n = 1..L through the diagnostic accumulator.
class DiagnosticAccumulator {
 public:
  DiagnosticAccumulator(std::int64_t L, std::int64_t fit_Lmin)
      : L_(L), fit_Lmin_(fit_Lmin) {
    next_checkpoint_ = 100;
  }

  void add(std::int64_t n, double term) {
    sum_.add(term);
    const double v = sum_.value();
    if (n == 1) {
      running_max_ = running_min_ = v;
    } else {
      running_max_ = std::max(running_max_, v);
      running_min_ = std::min(running_min_, v);
    }
    if (n >= next_checkpoint_ || n == L_) {
      checkpoints_.push_back({n, v});
      while (next_checkpoint_ <= n) {
        ++exp_quarter_;
        next_checkpoint_ = std::int64_t(
            std::llround(std::pow(10.0, 2.0 + 0.25 * double(exp_quarter_))));
      }
    }
  }

  SumDiagnostic finish() const {
    SumDiagnostic d;
    d.L = L_;
    d.value = sum_.value();
    d.running_max = running_max_;
    d.running_min = running_min_;
    d.checkpoints = checkpoints_;
    std::vector<double> xs, ys;
    for (const auto& c : checkpoints_) {
      if (c.L >= fit_Lmin_) {
        xs.push_back(std::log(double(c.L)));
        ys.push_back(c.value);
      }
    }
    d.drift_slope = xs.size() >= 2 ? linear_fit(xs, ys).slope : 0.0;
    return d;
  }

 private:
  std::int64_t L_;
  std::int64_t fit_Lmin_;
  std::int64_t next_checkpoint_;
  int exp_quarter_ = 0;
  NeumaierSum sum_;
  double running_max_ = 0.0;
  double running_min_ = 0.0;
  std::vector<SumCheckpoint> checkpoints_;
};

}  // namespace

SumDiagnostic weighted_cos4_sum(const Potential& p, const EnergyPoint& ep,
                                std::int64_t L, const SumOptions& opts) {
  if (L < 1) throw std::invalid_argument("weighted_cos4_sum: L >= 1");
  DiagnosticAccumulator acc(L, opts.fit_Lmin);
  PrueferFlow flow = opts.vtab ? PrueferFlow(p, ep, opts.vtab)
                               : PrueferFlow(p, ep);
  for (std::int64_t n = 1; n <= L; ++n) {
    flow.advance();  // state now holds theta(n)
    acc.add(n, std::cos(2.0 * kTwoPi * flow.state().theta_frac) / double(n));
  }
  return acc.finish();
}

SumDiagnostic cross_sin_sum(const Potential& p, double k1, double k2,
                            std::int64_t L, const SumOptions& opts) {
  if (L < 1) throw std::invalid_argument("cross_sin_sum: L >= 1");
  if (k1 == k2) throw std::invalid_argument("cross_sin_sum: k1 == k2");
  auto in_half_band = [](double k) { return k > 0.0 && k < 0.5; };
  if (!in_half_band(k1) || !in_half_band(k2))
    throw std::invalid_argument("cross_sin_sum: k must lie in (0, 1/2)");
  DiagnosticAccumulator acc(L, opts.fit_Lmin);
  EnergyPoint e1 = EnergyPoint::from_k(k1);
  EnergyPoint e2 = EnergyPoint::from_k(k2);
  PrueferFlow f1 = opts.vtab ? PrueferFlow(p, e1, opts.vtab)
                             : PrueferFlow(p, e1);
  PrueferFlow f2 = opts.vtab ? PrueferFlow(p, e2, opts.vtab)
                             : PrueferFlow(p, e2);
  for (std::int64_t n = 1; n <= L; ++n) {
    f1.advance();
    f2.advance();
    const double s1 = std::sin(kTwoPi * f1.state().theta_frac);
    const double s2 = std::sin(kTwoPi * f2.state().theta_frac);
    acc.add(n, s1 * s2 / double(n));
  }
  return acc.finish();
}

SumDiagnostic harmonic_control_sum(std::int64_t L, const SumOptions& opts) {
  if (L < 1) throw std::invalid_argument("harmonic_control_sum: L >= 1");
  DiagnosticAccumulator acc(L, opts.fit_Lmin);
  for (std::int64_t n = 1; n <= L; ++n) acc.add(n, 1.0 / double(n));
  return acc.finish();
}

double normalization_constant(const Potential& p, const EnergyPoint& ep,
                              std::int64_t L) {
  if (L < 2) throw std::invalid_argument("normalization_constant: L >= 2");
  NeumaierSum a;
  PrueferFlow flow(p, ep);
  for (std::int64_t n = 1; n <= L; ++n) {
    flow.advance();
    const double s = std::sin(kTwoPi * flow.state().theta_frac);
    a.add(s * s / double(n));
  }
  return a.value();
}

WeightedSequence unit_phase_vector(const Potential& p, const EnergyPoint& ep,
                                   std::int64_t L) {
  if (L < 2) throw std::invalid_argument("unit_phase_vector: L >= 2");
  WeightedSequence e;
  e.values.resize(std::size_t(L));
  NeumaierSum a;
  PrueferFlow flow(p, ep);
  for (std::int64_t n = 1; n <= L; ++n) {
    flow.advance();
    const double s = std::sin(kTwoPi * flow.state().theta_frac);
    e.values[std::size_t(n - 1)] = s / double(n);
    a.add(s * s / double(n));
  }
  const double scale = 1.0 / std::sqrt(a.value());
  for (double& v : e.values) v *= scale;
  return e;
}

OrthogonalityReport almost_orthogonality_check(
    const WeightedSequence& g, const std::vector<WeightedSequence>& units) {
  if (units.empty())
    throw std::invalid_argument("almost_orthogonality_check: empty system");
  for (const auto& e : units) {
    if (std::abs(weighted_norm(e) - 1.0) > 1e-10)
      throw std::invalid_argument(
          "almost_orthogonality_check: non-unit vector");
  }
  OrthogonalityReport rep;
  const std::size_t N = units.size();
  double sup = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      sup = std::max(sup,
                     std::abs(weighted_inner_product(units[i], units[j])));
  rep.alpha = double(N) * sup;
  if (rep.alpha >= 1.0) {
    rep.applicable = false;
    rep.holds = true;  // inapplicable, not violated
    return rep;
  }
  NeumaierSum lhs;
  for (const auto& e : units) {
    const double c = weighted_inner_product(g, e);
    lhs.add(c * c);
  }
  rep.lhs = lhs.value();
  const double gn = weighted_norm(g);
  rep.rhs = (1.0 + rep.alpha) * gn * gn;
  rep.holds = rep.lhs <= rep.rhs + 1e-10;
  return rep;
}

}  // namespace speclab
