#include "speclab/oscillatory.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "speclab/common.hpp"

using namespace speclab;

namespace {

WeightedSequence potential_sequence(const Potential& p, std::int64_t L) {
  WeightedSequence v;
  v.values.resize(std::size_t(L));
  for (std::int64_t n = 1; n <= L; ++n)
    v.values[std::size_t(n - 1)] = p.eval(n);
  return v;
}

}  // namespace

TEST_CASE("weighted inner product basics") {
  WeightedSequence u;
  u.values = {1.0, 0.5, 1.0 / 3.0};  // u(n) = 1/n
  CHECK(weighted_inner_product(u, u) ==
        doctest::Approx(1.0 + 0.5 + 1.0 / 3.0).epsilon(1e-14));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    WeightedSequence a, b;
    for (int i = 0; i < 16; ++i) {
      a.values.push_back(d(rng));
      b.values.push_back(d(rng));
    }
    CHECK(weighted_inner_product(a, b) ==
          doctest::Approx(weighted_inner_product(b, a)).epsilon(1e-13));
  }
  WeightedSequence mismatched;
  mismatched.values = {1.0};
  CHECK_THROWS_AS(weighted_inner_product(u, mismatched),
                  std::invalid_argument);
}

TEST_CASE("potential norm bound B^2 (ln L + 1)") {
  const std::int64_t L = 10000;
  struct Case {
    Potential p;
    double B;
  } cases[] = {
      {Potential::power_decay(1.0, 1.0), 1.0},
      {Potential::wigner_von_neumann(1.0, 0.3, 0.5), 1.0},
      {Potential::seeded_random_decay(0.4, 8), 0.4},
  };
  for (const auto& c : cases) {
    auto v = potential_sequence(c.p, L);
    double norm2 = weighted_inner_product(v, v);
    CHECK(norm2 <= c.B * c.B * (std::log(double(L)) + 1.0));
  }
}

TEST_CASE("cos-4-theta sum matches the free closed form") {
  // free phases: theta(n) = (n+1) k, so the sum is sum cos(4 pi (n+1) k)/n
  const std::int64_t L = 10000;
  const double k = 0.3;
  auto diag = weighted_cos4_sum(Potential::zero(), EnergyPoint::from_k(k), L);
  NeumaierSum direct;
  for (std::int64_t n = 1; n <= L; ++n)
    direct.add(std::cos(2.0 * kTwoPi * frac01(double(n + 1) * k)) / double(n));
  CHECK(diag.value == doctest::Approx(direct.value()).epsilon(1e-9));
  CHECK(diag.running_min <= diag.value);
  CHECK(diag.value <= diag.running_max);
  CHECK(diag.checkpoints.size() >= 8);
}

TEST_CASE("bounded sum has a flat drift, harmonic control has slope one") {
  auto diag = weighted_cos4_sum(Potential::power_decay(1.0, 1.0),
                                EnergyPoint::from_k(0.3), 100000);
  CHECK(std::abs(diag.drift_slope) < 0.05);
  CHECK(diag.running_max - diag.running_min < 10.0);

  auto control = harmonic_control_sum(100000);
  CHECK(control.drift_slope == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("edge quasimomentum k=1/2 still evaluates finitely") {
  auto diag = weighted_cos4_sum(Potential::power_decay(1.0, 1.0),
                                EnergyPoint::from_k(0.5), 2000);
  CHECK(std::isfinite(diag.value));
}

TEST_CASE("cross sin sum") {
  auto p = Potential::power_decay(1.0, 1.0);
  SUBCASE("trigonometric split against the two cosine sums") {
    const std::int64_t L = 20000;
    const double k1 = 0.27, k2 = 0.29;
    auto direct = cross_sin_sum(p, k1, k2, L);
    PrueferFlow f1(p, EnergyPoint::from_k(k1));
    PrueferFlow f2(p, EnergyPoint::from_k(k2));
    NeumaierSum half_diff;
    for (std::int64_t n = 1; n <= L; ++n) {
      f1.advance();
      f2.advance();
      double a = kTwoPi * f1.state().theta_frac;
      double b = kTwoPi * f2.state().theta_frac;
      half_diff.add(0.5 * (std::cos(a - b) - std::cos(a + b)) / double(n));
    }
    CHECK(direct.value == doctest::Approx(half_diff.value()).epsilon(1e-10));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(cross_sin_sum(p, 0.3, 0.3, 100), std::invalid_argument);
    CHECK_THROWS_AS(cross_sin_sum(p, 0.3, 0.6, 100), std::invalid_argument);
  }
}

TEST_CASE("normalization constant") {
  auto p = Potential::power_decay(1.0, 1.0);
  auto ep = EnergyPoint::from_k(0.3);
  SUBCASE("half-harmonic minus half-cos4 identity") {
    const std::int64_t L = 10000;
    double A = normalization_constant(p, ep, L);
    double H = harmonic_control_sum(L).value;
    double C4 = weighted_cos4_sum(p, ep, L).value;
    CHECK(A == doctest::Approx(0.5 * H - 0.5 * C4).epsilon(1e-10));
  }
  SUBCASE("grows like half log L") {
    double A2 = normalization_constant(Potential::zero(), ep, 100);
    double A5 = normalization_constant(Potential::zero(), ep, 100000);
    CHECK(std::abs(A5 - 0.5 * std::log(1e5)) < 2.0);
    CHECK(std::abs((A5 - A2) - 0.5 * std::log(1000.0)) < 2.0);
  }
}

TEST_CASE("unit phase vectors have weighted norm one") {
  auto e = unit_phase_vector(Potential::power_decay(1.0, 1.0),
                             EnergyPoint::from_k(0.25), 5000);
  CHECK(weighted_norm(e) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("almost orthogonality") {
  const std::int64_t dim = 64;
  auto unit_basis_vector = [&](std::int64_t i) {
    WeightedSequence e;
    e.values.assign(std::size_t(dim), 0.0);
    e.values[std::size_t(i)] = 1.0 / std::sqrt(double(i + 1));
    return e;
  };
  SUBCASE("orthonormal system: alpha = 0 and Bessel holds") {
    std::vector<WeightedSequence> units;
    for (int i = 0; i < 6; ++i) units.push_back(unit_basis_vector(i));
    WeightedSequence g;
    g.values.assign(std::size_t(dim), 0.1);
    auto rep = almost_orthogonality_check(g, units);
    CHECK(rep.applicable);
    CHECK(rep.alpha == 0.0);
    CHECK(rep.holds);
    double g2 = weighted_inner_product(g, g);
    CHECK(rep.lhs <= g2 + 1e-12);
  }
  SUBCASE("single unit vector: Cauchy-Schwarz") {
    std::vector<WeightedSequence> units = {unit_basis_vector(3)};
    WeightedSequence g;
    g.values.assign(std::size_t(dim), 0.0);
    g.values[3] = 2.0;
    g.values[10] = -1.0;
    auto rep = almost_orthogonality_check(g, units);
    CHECK(rep.applicable);
    CHECK(rep.holds);
  }
  SUBCASE("duplicated vector is inapplicable, not violated") {
    std::vector<WeightedSequence> units = {unit_basis_vector(0),
                                           unit_basis_vector(0)};
    auto rep = almost_orthogonality_check(WeightedSequence{units[0]}, units);
    CHECK_FALSE(rep.applicable);
    CHECK(rep.holds);
  }
  SUBCASE("non-unit vectors are rejected") {
    WeightedSequence bad;
    bad.values.assign(std::size_t(dim), 0.5);
    std::vector<WeightedSequence> units = {bad};
    CHECK_THROWS_AS(almost_orthogonality_check(bad, units),
                    std::invalid_argument);
  }
  SUBCASE("randomized near-orthogonal campaign") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_unit = [&]() {
      WeightedSequence v;
      v.values.resize(std::size_t(dim));
      for (auto& x : v.values) x = gauss(rng);
      double nrm = weighted_norm(v);
      for (auto& x : v.values) x /= nrm;
      return v;
    };
    std::uniform_int_distribution<int> count(1, 8);
    int applicable = 0;
    for (int trial = 0; trial < 2000; ++trial) {
      int N = count(rng);
      std::vector<WeightedSequence> units;
      for (int i = 0; i < N; ++i) units.push_back(random_unit());
      WeightedSequence g = random_unit();
      auto rep = almost_orthogonality_check(g, units);
      if (rep.applicable) {
        ++applicable;
        CHECK(rep.holds);
      }
    }
    CHECK(applicable > 500);
  }
}
