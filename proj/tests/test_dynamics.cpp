#include "speclab/dynamics.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "speclab/common.hpp"

using namespace speclab;

namespace {

// Reference solution values by plain recursion in long double; independent of
// the production kernels.
std::vector<long double> reference_solution(const Potential& p, double E,
                                            std::int64_t L) {
  std::vector<long double> u(std::size_t(L) + 2);
  u[0] = 0.0L;
  u[1] = 1.0L;
  for (std::int64_t n = 1; n <= L; ++n)
    u[std::size_t(n) + 1] =
        (static_cast<long double>(E) - static_cast<long double>(p.eval(n))) *
            u[std::size_t(n)] -
        u[std::size_t(n) - 1];
  return u;
}

}  // namespace

TEST_CASE("one-step matrix") {
  auto ep0 = EnergyPoint::from_energy(0.0);
  auto t = TransferMatrix::one_step(ep0, 0.0);
  CHECK(t.a == 0.0);
  CHECK(t.b == 1.0);
  CHECK(t.c == -1.0);
  CHECK(t.d == 0.0);
  auto ep = EnergyPoint::from_k(0.3);
  auto t2 = TransferMatrix::one_step(ep, 0.5);
  CHECK(t2.d == doctest::Approx(2.0 * std::cos(0.3 * kPi) - 0.5));
  CHECK(t2.det_residual() < 1e-15);
}

TEST_CASE("transfer product free cases") {
  auto ep = EnergyPoint::from_energy(0.0);
  SUBCASE("E=0, L=4 gives the identity") {
    // direct multiplication oracle: [0 1; -1 0]^4 = I
    double m[2][2] = {{1, 0}, {0, 1}};
    for (int i = 0; i < 4; ++i) {
      double r0 = m[1][0], r1 = m[1][1];
      double s0 = -m[0][0], s1 = -m[0][1];
      m[0][0] = r0;
      m[0][1] = r1;
      m[1][0] = s0;
      m[1][1] = s1;
    }
    CHECK(m[0][0] == 1.0);
    CHECK(m[1][1] == 1.0);
    auto t = transfer_product(Potential::zero(), ep, 4);
    CHECK(t.a == 1.0);
    CHECK(t.b == 0.0);
    CHECK(t.c == 0.0);
    CHECK(t.d == 1.0);
    CHECK(t.log_scale == 0.0);
  }
  SUBCASE("E=0, L=1: u(1)=b=1, u(2)=d=0") {
    auto t = transfer_product(Potential::zero(), ep, 1);
    CHECK(t.b == 1.0);
    CHECK(t.d == 0.0);
  }
}

TEST_CASE("determinant preserved over long products") {
  auto ep = EnergyPoint::from_k(0.3);
  auto t = transfer_product(Potential::power_decay(1.0, 1.0), ep, 100);
  CHECK(t.det_residual() < 1e-9);
  auto t2 = transfer_product(Potential::seeded_random_decay(1.0, 7), ep, 100000);
  CHECK(t2.det_residual() < 1e-9);
}

TEST_CASE("transfer product rescales instead of overflowing") {
  // constant potential 2.5 over 2000 sites: hyperbolic growth ~ 2^n at E=0
  std::vector<double> vals(2001, 2.5);
  auto p = Potential::sampled_table(std::move(vals));
  auto ep = EnergyPoint::from_energy(0.0);
  auto t = transfer_product(p, ep, 2000);
  CHECK(t.log_scale > 0.0);
  CHECK(t.max_abs_entry() <= TransferMatrix::rescale_threshold);
  // growth rate oracle: x + 1/x = -2.5 -> |x| = 2, so log-growth is ln 2
  double log_norm = std::log(t.max_abs_entry()) + t.log_scale;
  CHECK(log_norm == doctest::Approx(2000.0 * std::log(2.0)).epsilon(0.01));

  auto end = dirichlet_endpoint(p, ep, 2000);
  double lt = std::log(std::abs(t.d)) + t.log_scale;
  double ld = std::log(std::abs(end.uL1)) + end.log_scale;
  CHECK(lt == doctest::Approx(ld).epsilon(1e-12));
}

TEST_CASE("dirichlet endpoint equals the transfer-matrix column") {
  auto p = Potential::seeded_random_decay(0.8, 11);
  auto ep = EnergyPoint::from_k(0.37);
  auto t = transfer_product(p, ep, 500);
  auto e = dirichlet_endpoint(p, ep, 500);
  CHECK(e.uL == doctest::Approx(t.b).epsilon(1e-12));
  CHECK(e.uL1 == doctest::Approx(t.d).epsilon(1e-12));
}

TEST_CASE("free solution closed form sin(pi k n)/sin(pi k)") {
  auto ep = EnergyPoint::from_k(0.3);
  auto e = dirichlet_endpoint(Potential::zero(), ep, 57);
  CHECK(e.uL ==
        doctest::Approx(std::sin(kPi * 0.3 * 57.0) / ep.sin_pi_k).epsilon(1e-11));
  CHECK(e.uL1 ==
        doctest::Approx(std::sin(kPi * 0.3 * 58.0) / ep.sin_pi_k).epsilon(1e-11));
}

TEST_CASE("batched endpoints match the scalar recursion") {
  auto p = Potential::power_decay(1.0, 1.0);
  auto vtab = p.table(301);
  std::vector<double> es;
  for (int i = 0; i < 19; ++i) es.push_back(-1.8 + 0.2 * i);
  auto batch = dirichlet_endpoint_batch(vtab, es, 300, 1);
  for (std::size_t i = 0; i < es.size(); ++i) {
    auto ref = dirichlet_endpoint(p, EnergyPoint::from_energy(es[i]), 300);
    CHECK(batch[i].uL == doctest::Approx(ref.uL).epsilon(1e-12));
    CHECK(batch[i].uL1 == doctest::Approx(ref.uL1).epsilon(1e-12));
  }
}

TEST_CASE("prufer_from_vector") {
  auto ep = EnergyPoint::from_k(0.25);
  SUBCASE("Dirichlet data (0,1): R = 1/sin(pi k), theta = k") {
    auto pp = prufer_from_vector(0.0, 1.0, ep);
    CHECK(pp.R == doctest::Approx(1.0 / ep.sin_pi_k).epsilon(1e-14));
    CHECK(pp.theta_mod1 == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("round trip reproduces the input pair") {
    auto check_roundtrip = [&](double up, double uc) {
      auto pp = prufer_from_vector(up, uc, ep);
      double y1 = pp.R * std::sin(kPi * (pp.theta_mod1 - ep.k));
      double y2 = pp.R * std::cos(kPi * (pp.theta_mod1 - ep.k));
      // theta mod 1 only determines Y up to overall sign
      double rc_up = y1;
      double rc_uc = y2 * ep.sin_pi_k + ep.cos_pi_k * y1;
      double sign = (std::abs(rc_up - up) + std::abs(rc_uc - uc) <
                     std::abs(rc_up + up) + std::abs(rc_uc + uc))
                        ? 1.0
                        : -1.0;
      CHECK(sign * rc_up == doctest::Approx(up).epsilon(1e-12).scale(1.0));
      CHECK(sign * rc_uc == doctest::Approx(uc).epsilon(1e-12).scale(1.0));
    };
    check_roundtrip(std::sin(kPi * 0.25), 0.0);
    check_roundtrip(-0.3, 1.7);
    check_roundtrip(2.0, -0.1);
  }
  SUBCASE("homogeneity: positive scaling moves R only") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      double up = d(rng), uc = d(rng);
      if (up == 0.0 && uc == 0.0) continue;
      auto one = prufer_from_vector(up, uc, ep);
      auto two = prufer_from_vector(2.0 * up, 2.0 * uc, ep);
      CHECK(two.R == doctest::Approx(2.0 * one.R).epsilon(1e-13));
      CHECK(two.theta_mod1 == doctest::Approx(one.theta_mod1).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(prufer_from_vector(0.0, 0.0, ep), std::invalid_argument);
}

TEST_CASE("free Prufer flow: theta(n) = (n+1)k, logR constant") {
  auto ep = EnergyPoint::from_k(0.25);
  auto trace = prufer_trace(Potential::zero(), ep, 1000);
  REQUIRE(trace.size() == 1002);
  CHECK(trace[0].logR == doctest::Approx(-std::log(ep.sin_pi_k)));
  CHECK(trace[0].theta() == doctest::Approx(0.25));
  for (std::size_t n = 0; n < trace.size(); n += 97) {
    CHECK(trace[n].theta() ==
          doctest::Approx(double(n + 1) * 0.25).epsilon(1e-13));
    CHECK(trace[n].logR == trace[0].logR);
  }
}

TEST_CASE("single step angle increment bound") {
  auto ep = EnergyPoint::from_k(0.3);
  auto s0 = prufer_initial_state(ep);
  for (double v : {0.01, -0.1, 0.3, -0.4}) {
    double x = std::abs(v / ep.sin_pi_k);
    REQUIRE(x < 0.5);
    auto s1 = prufer_step(s0, v, ep);
    double delta = s1.theta() - ep.k - s0.theta();
    CHECK(std::abs(delta) <= x + 1e-12);
  }
  SUBCASE("zero potential leaves logR and advances theta by k") {
    auto s1 = prufer_step(s0, 0.0, ep);
    CHECK(s1.logR == s0.logR);
    CHECK(s1.theta() == doctest::Approx(s0.theta() + ep.k).epsilon(1e-15));
  }
}

TEST_CASE("increment bound audited over a long random trace") {
  auto ep = EnergyPoint::from_k(0.25);
  auto p = Potential::seeded_random_decay(0.4, 99);
  PrueferFlow flow(p, ep);
  for (int i = 0; i < 100000; ++i) flow.advance();
  CHECK(flow.increment_bound_violations() == 0);
}

TEST_CASE("representation equivalence: recursion vs transfer solution") {
  const Potential pots[] = {Potential::power_decay(1.0, 1.0),
                            Potential::wigner_von_neumann(2.0, 0.3, 0.4),
                            Potential::seeded_random_decay(0.7, 3)};
  for (const auto& p : pots) {
    auto ep = EnergyPoint::from_k(0.3);
    const std::int64_t L = 2000;
    auto trace = prufer_trace(p, ep, L);
    auto u = reference_solution(p, ep.E, L);
    for (std::int64_t n = 0; n <= L; n += 53) {
      auto pp = prufer_from_vector(double(u[std::size_t(n)]),
                                   double(u[std::size_t(n) + 1]), ep);
      CHECK(std::abs(std::log(pp.R) - trace[std::size_t(n)].logR) < 1e-8);
      double dtheta = wrap_pm_half(pp.theta_mod1 -
                                   trace[std::size_t(n)].theta_frac);
      CHECK(std::abs(dtheta) < 1e-8);
    }
  }
}

TEST_CASE("cot-pole fallback agrees with the cotangent route") {
  auto ep = EnergyPoint::from_k(0.3);
  // state just off the pole: the production step takes the vector branch
  // below delta_cot; the long-double cotangent recursion is the oracle
  for (double f : {1e-7, 1e-8, 1.0 - 1e-7}) {
    PrueferState s;
    s.n = 10;
    s.logR = 0.3;
    s.theta_wind = 4.0;
    s.theta_frac = f;
    double v = 0.2;
    auto out = prufer_step(s, v, ep);
    long double x = (long double)(v) / (long double)(ep.sin_pi_k);
    long double spt = sinl((long double)(kPi)*f);
    long double cpt = cosl((long double)(kPi)*f);
    long double y = cpt / spt - x;
    long double alpha = atan2l(1.0L, y) / (long double)(kPi);
    double delta = wrap_pm_half(double(alpha) - f);
    long double s2 = 2.0L * spt * cpt, ss = spt * spt;
    long double ratio = 1.0L - x * s2 + x * x * ss;
    CHECK(out.theta() ==
          doctest::Approx(s.theta() + ep.k + delta).epsilon(1e-10));
    CHECK(out.logR ==
          doctest::Approx(0.3 + 0.5 * double(logl(ratio))).epsilon(1e-10));
  }
  SUBCASE("exact pole: potential does not act, angle advances by k") {
    PrueferState s;
    s.n = 0;
    s.logR = 1.0;
    s.theta_wind = 2.0;
    s.theta_frac = 0.0;
    auto out = prufer_step(s, 0.7, ep);
    CHECK(out.logR == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.theta() == doctest::Approx(s.theta() + ep.k).epsilon(1e-12));
  }
}

TEST_CASE("numerical faults carry the offending index") {
  auto ep = EnergyPoint::from_k(0.3);
  PrueferState s = prufer_initial_state(ep);
  s.n = 123;
  CHECK_THROWS_AS(prufer_step(s, std::nan(""), ep), numerical_fault);
  try {
    prufer_step(s, std::nan(""), ep);
  } catch (const numerical_fault& f) {
    CHECK(f.index() == 123);
  }
}

TEST_CASE("log amplitude identity") {
  SUBCASE("zero potential gives (0,0,0)") {
    auto ident =
        log_amplitude_identity(Potential::zero(), EnergyPoint::from_k(0.3), 500);
    CHECK(ident.lhs == 0.0);
    CHECK(ident.rhs_sum == 0.0);
    CHECK(ident.residual == 0.0);
  }
  SUBCASE("residual obeys the explicit second-order bound") {
    auto ep = EnergyPoint::from_k(0.3);
    auto p = Potential::power_decay(1.0, 1.0);
    auto ident = log_amplitude_identity(p, ep, 10000);
    NeumaierSum explicit_bound;
    for (std::int64_t n = 1; n <= 9999; ++n) {
      double x = 1.0 / ((1.0 + double(n)) * ep.sin_pi_k);
      explicit_bound.add(2.0 * x * x);
    }
    CHECK(ident.second_order_bound ==
          doctest::Approx(explicit_bound.value()).epsilon(1e-12));
    CHECK(std::abs(ident.residual) <= explicit_bound.value());
  }
  SUBCASE("lhs matches an independently accumulated trace") {
    auto ep = EnergyPoint::from_k(0.37);
    auto p = Potential::seeded_random_decay(0.5, 21);
    auto ident = log_amplitude_identity(p, ep, 300);
    auto trace = prufer_trace(p, ep, 300);
    CHECK(ident.lhs ==
          doctest::Approx(2.0 * (trace[299].logR - trace[0].logR))
              .epsilon(1e-12));
  }
  SUBCASE("residuals at different horizons differ by at most the tail") {
    auto ep = EnergyPoint::from_k(0.3);
    auto p = Potential::power_decay(1.0, 1.0);
    double r3 = log_amplitude_identity(p, ep, 1000).residual;
    double r5 = log_amplitude_identity(p, ep, 100000).residual;
    NeumaierSum tail;
    for (std::int64_t n = 1000; n <= 99999; ++n) {
      double x = 1.0 / ((1.0 + double(n)) * ep.sin_pi_k);
      tail.add(2.0 * x * x);
    }
    CHECK(std::abs(r5 - r3) <= tail.value());
  }
}

TEST_CASE("batched log amplitude matches the trig flow") {
  auto p = Potential::power_decay(1.0, 1.0);
  std::vector<double> ks = {0.12, 0.25, 0.33, 0.48};
  auto la = log_amplitude_sq_batch(p, ks, 400, 1);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    auto trace = prufer_trace(p, EnergyPoint::from_k(ks[i]), 400);
    CHECK(la[i] == doctest::Approx(2.0 * trace[400].logR).epsilon(1e-8));
  }
}
