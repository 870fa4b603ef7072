// Acceptance suite: one criterion per numbered block, each printing a single
// PASS/FAIL line with the measured values.  Exits nonzero if any criterion
// fails.  Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "speclab/common.hpp"
#include "speclab/dynamics.hpp"
#include "speclab/embedded.hpp"
#include "speclab/oscillatory.hpp"
#include "speclab/potential.hpp"
#include "speclab/scan.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("criterion %2d [%s] %-42s %s (%.1f s)\n", id,
              pass ? "PASS" : "FAIL", name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename Fn>
void criterion(int id, const char* name, Fn&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(id, name, pass, detail, dt);
}

// 1. free-density exactness
bool c1(std::string& detail) {
  double worst = 0.0;
  for (double k = 0.1; k < 0.46; k += 0.05) {
    for (std::int64_t L : {1, 10, 100}) {
      auto ep = EnergyPoint::from_k(k);
      auto s = spectral_density_truncated(Potential::zero(), L, ep);
      worst = std::max(worst, std::abs(s.density - ep.sin_pi_k / kPi));
    }
  }
  detail = "max |density - sin(pi k)/pi| = " + to_g17(worst) + " (< 1e-12)";
  return worst < 1e-12;
}

// 2. dual-route identity over random (k, L) pairs
bool c2(std::string& detail) {
  auto p = Potential::power_decay(1.0, 1.0);
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> kd(0.02, 0.98);
  std::uniform_int_distribution<std::int64_t> Ld(1, 100000);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    auto ep = EnergyPoint::from_k(kd(rng));
    std::int64_t L = Ld(rng);
    auto s = spectral_density_truncated(p, L, ep);
    auto trace = prufer_trace(p.with_cutoff(L), ep, L);
    double resid = std::abs(std::expm1(
        std::log(kPi) + std::log(s.density) + std::log(ep.sin_pi_k) +
        2.0 * trace[std::size_t(L) + 1].logR));
    worst = std::max(worst, resid);
  }
  detail = "max |pi d sin(pi k) R^2 - 1| = " + to_g17(worst) + " (< 1e-9)";
  return worst < 1e-9;
}

// 3. quadrature vs Sturm-bisection oracle
bool c3(std::string& detail) {
  auto p = Potential::power_decay(1.0, 1.0);
  auto quad = measure_of_interval(p, 200, -1.0, 1.0);
  auto orc = oracle_spectral_measure(p.with_cutoff(200), 100000, -1.0, 1.0);
  double diff = std::abs(quad.mass - orc.est.mass);
  detail = "quad " + to_g17(quad.mass) + " vs oracle " +
           to_g17(orc.est.mass) + ", |diff| = " + to_g17(diff) + " (< 1e-3)";
  return diff < 1e-3 && quad.converged && !orc.ill_conditioned;
}

// 4. angle-increment bound audit over 1e6 steps x 10 seeds
bool c4(std::string& detail) {
  std::int64_t violations = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PrueferFlow flow(Potential::seeded_random_decay(0.4, seed),
                     EnergyPoint::from_k(0.25));
    for (std::int64_t i = 0; i < 1000000; ++i) flow.advance();
    violations += flow.increment_bound_violations();
  }
  detail = std::to_string(violations) + " violations over 1e7 audited steps";
  return violations == 0;
}

// 5. bounded oscillatory sums vs harmonic positive control
bool c5(std::string& detail) {
  const Potential family[] = {
      Potential::zero(),
      Potential::power_decay(1.0, 1.0),
      Potential::power_decay(2.0, 1.0),
      Potential::wigner_von_neumann(2.0, 0.45, 0.7),
  };
  double worst = 0.0;
  for (const auto& p : family) {
    auto vtab = std::make_shared<const std::vector<double>>(p.table(1000001));
    for (double k = 0.10; k < 0.41; k += 0.05) {
      SumOptions so;
      so.vtab = vtab;
      auto diag = weighted_cos4_sum(p, EnergyPoint::from_k(k), 1000000, so);
      worst = std::max(worst, std::abs(diag.drift_slope));
    }
  }
  auto ctrl = harmonic_control_sum(1000000);
  detail = "max |drift| = " + to_g17(worst) + " (< 0.05), control slope " +
           to_g17(ctrl.drift_slope) + " (1 +- 0.01)";
  return worst < 0.05 && std::abs(ctrl.drift_slope - 1.0) < 0.01;
}

// 6. cross-sum log scaling in the gap
bool c6(std::string& detail) {
  auto p = Potential::power_decay(1.0, 1.0);
  auto vtab = std::make_shared<const std::vector<double>>(p.table(1000001));
  std::vector<double> xs, ys;
  for (int g = 1; g <= 5; ++g) {
    double gap = std::pow(10.0, -g);
    SumOptions so;
    so.vtab = vtab;
    auto diag = cross_sin_sum(p, 0.25, 0.25 + gap, 1000000, so);
    xs.push_back(std::log(1.0 / gap));
    ys.push_back(std::abs(diag.value));
  }
  double C = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    C = std::max(C, ys[i] / (xs[i] + 1.0));
  auto fit = linear_fit(xs, ys);
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double envelope = C * (xs[i] + 1.0);
    double resid = std::abs(ys[i] - (fit.slope * xs[i] + fit.intercept));
    worst_ratio = std::max(worst_ratio, resid / envelope);
  }
  detail = "envelope C = " + to_g17(C) + ", max residual/envelope = " +
           to_g17(worst_ratio) + " (< 0.2)";
  return worst_ratio < 0.2;
}

// 7. almost-orthogonality campaign
bool c7(std::string& detail) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&]() {
    WeightedSequence v;
    v.values.resize(64);
    for (auto& x : v.values) x = gauss(rng);
    double nrm = weighted_norm(v);
    for (auto& x : v.values) x /= nrm;
    return v;
  };
  std::uniform_int_distribution<int> count(1, 8);
  std::int64_t applicable = 0, violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    int N = count(rng);
    std::vector<WeightedSequence> units;
    units.reserve(std::size_t(N));
    for (int i = 0; i < N; ++i) units.push_back(random_unit());
    auto rep = almost_orthogonality_check(random_unit(), units);
    if (rep.applicable) {
      ++applicable;
      if (!rep.holds) ++violations;
    }
  }
  detail = std::to_string(applicable) + "/10000 applicable, " +
           std::to_string(violations) + " violations";
  return violations == 0 && applicable > 1000;
}

// 8. multiscale count and cover bounds
bool c8(std::string& detail) {
  ScanConfig cfg;
  cfg.beta = 0.5;
  cfg.sigma = 0.5;
  cfg.eps = 0.1;
  cfg.N = 10;
  cfg.window_klo = 0.1;
  cfg.window_khi = 0.4;
  const int scales[] = {1, 2, 3};
  auto rep = count_bound_experiment(Potential::power_decay(1.0, 1.0), cfg,
                                    scales);
  std::string counts;
  bool ok = true;
  for (const auto& sr : rep.scales) {
    ok = ok && !sr.skipped &&
         std::int64_t(sr.set.accepted.size()) <= cfg.N &&
         sr.cover.count <= 8 * cfg.N;
    counts += "m=" + std::to_string(sr.m) + ":" +
              std::to_string(sr.set.accepted.size()) + "/" +
              std::to_string(sr.cover.count) + " ";
  }
  detail = "accepted/cover per scale: " + counts + "(<= 10 / <= 80)";
  return ok && !rep.count_exceeded && !rep.cover_exceeded;
}

// 9. resonance experiment: drift signs and local dimension
bool c9(std::string& detail) {
  auto res = embedded_eigenvalue_experiment(8.0, 0.25, 0.0, 100000);
  bool res_slope_ok = res.resonant_slope < -0.5;
  bool off_ok = res.off_resonant_min > -0.05 && res.off_resonant_max < 0.05;

  const double E0 = 2.0 * std::cos(kPi * 0.25);
  std::vector<double> eps_grid = {0.1, 0.0316, 0.01, 0.00316, 0.001};
  DimensionOptions dop;
  dop.quad.abs_tol = 1e-10;
  auto fit = local_dimension_diagnostic(Potential::wigner_von_neumann(8.0, 0.25, 0.0),
                                        100000, E0, eps_grid, dop);
  auto ctrl = local_dimension_diagnostic(Potential::zero(), 1000, E0,
                                         std::vector<double>{0.05, 0.03, 0.02,
                                                             0.012, 0.008});
  bool dim_ok = fit.slope < 0.5;
  bool ctrl_ok = std::abs(ctrl.slope - 1.0) < 0.02;
  detail = "resonant slope " + to_g17(res.resonant_slope) +
           " (< -0.5), off-resonant [" + to_g17(res.off_resonant_min) + ", " +
           to_g17(res.off_resonant_max) + "] ((-0.05,0.05)), dim slope " +
           to_g17(fit.slope) + " (< 0.5), control " + to_g17(ctrl.slope) +
           " (1 +- 0.02)";
  return res_slope_ok && off_ok && dim_ok && ctrl_ok;
}

// 10. Herglotz property and quasimomentum round trip
bool c10(std::string& detail) {
  auto p = Potential::power_decay(1.0, 1.0);
  std::int64_t herglotz_ok = 0, total = 0;
  for (int i = 0; i < 334; ++i) {
    double E = -1.9 + 3.8 * double(i) / 333.0;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      ++total;
      auto m = weyl_m_truncated(p, 100, complex_quasimomentum({E, eps}));
      if (m.imag() > 0.0) ++herglotz_ok;
    }
  }
  double worst = 0.0;
  for (double re = -1.9; re <= 1.91; re += 0.05) {
    for (double im : {1e-6, 1e-4, 1e-2, 1.0}) {
      std::complex<double> z(re, im);
      auto ce = complex_quasimomentum(z);
      std::complex<double> back =
          2.0 * std::cos(kPi * std::complex<double>(ce.k, ce.gamma));
      worst = std::max(worst, std::abs(back - z) / (1.0 + std::abs(z)));
    }
  }
  // forward fixture: 2 cos(pi (0.25 - 0.1 i)) inverts to (0.25, -0.1)
  std::complex<double> zfix =
      2.0 * std::cos(kPi * std::complex<double>(0.25, -0.1));
  auto cefix = complex_quasimomentum(zfix);
  double fix_err =
      std::abs(cefix.k - 0.25) + std::abs(cefix.gamma - (-0.1));
  worst = std::max(worst, fix_err);
  detail = "Im m > 0 at " + std::to_string(herglotz_ok) + "/" +
           std::to_string(total) + " points, roundtrip worst " +
           to_g17(worst) + " (< 1e-10)";
  return herglotz_ok == total && worst < 1e-10;
}

// 11. two-measure comparison with calibrated constant
bool c11(std::string& detail) {
  const double eps = 0.05, M = 2.0, sigma = 0.5;
  const std::int64_t L = 1000, L_ref = 100000;
  QuadratureOptions q;
  q.abs_tol = 1e-6;  // masses only need to resolve the C eps^M scale

  // calibrate C on the free case; the free density is horizon-independent,
  // so the calibration pass runs at a small horizon
  double C = 0.0;
  for (int i = 0; i < 50; ++i) {
    double E = -1.5 + 3.0 * double(i) / 49.0;
    auto rep = two_measure_comparison(Potential::zero(), 300, 300, E, eps, M,
                                      sigma, 1.0, q);
    C = std::max(C, std::abs(rep.deficit) / std::pow(eps, M));
  }

  auto p = Potential::power_decay(1.0, 1.0);
  std::int64_t violations = 0;
  double worst_deficit = 0.0;
  for (int i = 0; i < 50; ++i) {
    double E = -1.5 + 3.0 * double(i) / 49.0;
    auto rep = two_measure_comparison(p, L, L_ref, E, eps, M, sigma, C, q);
    if (rep.violation) ++violations;
    worst_deficit = std::min(worst_deficit, rep.deficit);
  }
  detail = "C = " + to_g17(C) + ", min deficit " + to_g17(worst_deficit) +
           " >= " + to_g17(-C * std::pow(eps, M)) + ", " +
           std::to_string(violations) + " violations";
  return violations == 0;
}

}  // namespace

int main() {
  std::printf("speclab acceptance suite\n");
  criterion(1, "free-density exactness", c1);
  criterion(2, "dual-route density identity", c2);
  criterion(3, "oracle equivalence", c3);
  criterion(4, "angle-increment bound audit", c4);
  criterion(5, "bounded oscillatory sums", c5);
  criterion(6, "cross-sum log scaling", c6);
  criterion(7, "almost-orthogonality campaign", c7);
  criterion(8, "multiscale count and cover bounds", c8);
  criterion(9, "resonance drift and local dimension", c9);
  criterion(10, "Herglotz and quasimomentum round trip", c10);
  criterion(11, "two-measure comparison", c11);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
