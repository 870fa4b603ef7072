#include "speclab/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "speclab/common.hpp"
#include "speclab/dynamics.hpp"

namespace speclab {

double ScanConfig::eps_m(int m) const { return std::pow(eps, m); }

std::int64_t ScanConfig::L_m(int m) const {
  // one-ulp nudge so exact powers (e.g. 0.01^{-1.5} = 1000) floor correctly
  const double x = std::pow(eps_m(m), -(1.0 + sigma));
  return std::int64_t(std::floor(x * (1.0 + 4e-16)));
}

double ScanConfig::separation_length(int m) const {
  return std::pow(eps_m(m), 1.0 / (double(N) * double(N)));
}

double ScanConfig::CI() const {
  const double s = std::sin(kPi * window_klo);
  return 2.0 / (s * s);
}

double ScanConfig::r2_threshold(int m) const {
  return CI() * std::pow(eps_m(m), 1.0 - beta);
}

void ScanConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("ScanConfig: beta must be in (0,1)");
  if (!(sigma > 0.0))
    throw std::invalid_argument("ScanConfig: sigma must be > 0");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("ScanConfig: eps must be in (0,1)");
  if (N < 1) throw std::invalid_argument("ScanConfig: N must be >= 1");
  if (!(window_klo > 0.0 && window_khi < 0.5 && window_klo < window_khi))
    throw std::invalid_argument(
        "ScanConfig: window must be a closed subinterval of (0, 1/2)");
  if (!(grid_resolution > 0.0))
    throw std::invalid_argument("ScanConfig: grid_resolution must be > 0");
}

double bridge_constant_envelope(double klo, double khi, std::int64_t L,
                                int grid_points) {
  if (grid_points < 2)
    throw std::invalid_argument("bridge_constant_envelope: grid_points >= 2");
  const Potential families[2] = {Potential::zero(),
                                 Potential::power_decay(1.0, 1.0)};
  double env = 0.0;
  for (const Potential& p : families) {
    for (int i = 0; i < grid_points; ++i) {
      const double k =
          klo + (khi - klo) * double(i) / double(grid_points - 1);
      auto ident = log_amplitude_identity(p, EnergyPoint::from_k(k), L);
      env = std::max(env, std::abs(ident.residual));
    }
  }
  return env;
}

double effective_C1(const ScanConfig& cfg, std::int64_t L) {
  if (cfg.C1 > 0.0) return cfg.C1;
  return bridge_constant_envelope(cfg.window_klo, cfg.window_khi, L);
}

namespace {

struct Certificate {
  double sum_value;
  double residual;
  double residual_bound;
};

Certificate certify(const Potential& p, double k, std::int64_t L_m) {
  // identity over steps 1..L_m: lhs uses the amplitude at trace index L_m
  EnergyPoint ep = EnergyPoint::from_k(k);
  auto ident = log_amplitude_identity(p, ep, L_m + 1);
  Certificate c;
  c.sum_value = std::abs(ident.rhs_sum) * ep.sin_pi_k;
  c.residual = ident.residual;
  c.residual_bound = ident.second_order_bound;
  return c;
}

}  // namespace

SeparationReport separation_test(std::span<const double> ks,
                                 const Potential& p, const ScanConfig& cfg,
                                 int m) {
  cfg.validate();
  if (m < 1) throw std::invalid_argument("separation_test: m >= 1");
  for (double k : ks) {
    if (!(k >= cfg.window_klo && k <= cfg.window_khi))
      throw std::invalid_argument("separation_test: point outside the window");
  }
  SeparationReport rep;
  const std::int64_t L = cfg.L_m(m);
  const double C1 = effective_C1(cfg, L);
  rep.sum_threshold = (1.0 - cfg.beta) * C1 * std::log(1.0 / cfg.eps_m(m));
  rep.gap_required = cfg.separation_length(m);
  rep.condition1_ok = true;
  for (double k : ks) {
    Certificate c = certify(p, k, L);
    bool pass = c.sum_value >= rep.sum_threshold;
    rep.points.push_back({k, c.sum_value, pass});
    rep.condition1_ok = rep.condition1_ok && pass;
  }
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = i + 1; j < ks.size(); ++j)
      rep.min_gap = std::min(rep.min_gap, std::abs(ks[i] - ks[j]));
  rep.condition2_ok = ks.size() < 2 || rep.min_gap >= rep.gap_required;
  rep.ok = rep.condition1_ok && rep.condition2_ok;
  return rep;
}

SeparatedSet singular_interval_scan(const Potential& p, const ScanConfig& cfg,
                                    int m) {
  cfg.validate();
  if (m < 1) throw std::invalid_argument("singular_interval_scan: m >= 1");
  SeparatedSet set;
  set.m = m;
  set.eps_m = cfg.eps_m(m);
  set.L_m = cfg.L_m(m);
  set.r2_threshold = cfg.r2_threshold(m);
  set.C1 = effective_C1(cfg, set.L_m);

  const double sep = cfg.separation_length(m);
  const double width = cfg.window_khi - cfg.window_klo;
  double spacing = sep / cfg.grid_resolution;
  if (cfg.min_grid_points > 1)
    spacing = std::min(spacing, width / double(cfg.min_grid_points - 1));
  const std::int64_t npts = std::int64_t(std::ceil(width / spacing)) + 1;
  set.grid_points = npts;
  set.grid_spacing = width / double(npts - 1);

  std::vector<double> grid(static_cast<std::size_t>(npts));
  for (std::int64_t i = 0; i < npts; ++i)
    grid[std::size_t(i)] =
        cfg.window_klo + width * double(i) / double(npts - 1);

  const auto log_r2 = log_amplitude_sq_batch(p, grid, set.L_m, cfg.jobs);
  const double log_thresh = std::log(set.r2_threshold);

  std::vector<std::int64_t> cand_idx;
  std::vector<char> is_cand(std::size_t(npts), 0);
  for (std::int64_t i = 0; i < npts; ++i) {
    if (log_r2[std::size_t(i)] <= log_thresh) {
      cand_idx.push_back(i);
      is_cand[std::size_t(i)] = 1;
    } else if (log_r2[std::size_t(i)] <= log_thresh + std::log(2.0)) {
      set.marginal.push_back(grid[std::size_t(i)]);
    }
  }
  set.candidate_count = std::int64_t(cand_idx.size());
  for (std::int64_t i : cand_idx)
    set.candidates.push_back(grid[std::size_t(i)]);

  // Greedy maximal selection: smallest amplitude first, keep a point when
  // it is at least 2 eps_m^{1/N^2} away from everything already kept.
  std::vector<std::int64_t> order = cand_idx;
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    double ra = log_r2[std::size_t(a)], rb = log_r2[std::size_t(b)];
    return ra != rb ? ra < rb : a < b;
  });
  std::vector<std::int64_t> kept;
  for (std::int64_t i : order) {
    bool far = true;
    for (std::int64_t j : kept) {
      if (std::abs(grid[std::size_t(i)] - grid[std::size_t(j)]) < 2.0 * sep) {
        far = false;
        break;
      }
    }
    if (far) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  for (std::size_t a = 1; a < kept.size(); ++a)
    if (kept[a] - kept[a - 1] == 1) set.grid_insufficient = true;
  for (std::int64_t i : kept) {
    bool adj = (i > 0 && is_cand[std::size_t(i - 1)]) ||
               (i + 1 < npts && is_cand[std::size_t(i + 1)]);
    if (adj) ++set.boundary_adjacent;
  }

  const double thresh1 =
      (1.0 - cfg.beta) * set.C1 * std::log(1.0 / set.eps_m);
  for (std::int64_t i : kept) {
    ScanPoint pt;
    pt.k = grid[std::size_t(i)];
    pt.log_R2 = log_r2[std::size_t(i)];
    pt.R2 = std::exp(pt.log_R2);
    Certificate c = certify(p, pt.k, set.L_m);
    pt.sum_value = c.sum_value;
    pt.sum_threshold = thresh1;
    pt.residual = c.residual;
    pt.residual_bound = c.residual_bound;
    pt.condition1 = pt.sum_value >= thresh1;
    if (pt.condition1) {
      set.accepted.push_back(pt);
    } else {
      set.rejected.push_back(pt);
    }
  }
  return set;
}

namespace {

CoverReport cover_candidates(const Potential& p, const ScanConfig& cfg,
                             const SeparatedSet& set) {
  CoverReport cover;
  const double len = cfg.separation_length(set.m);
  std::size_t i = 0;
  while (i < set.candidates.size()) {
    const double a = set.candidates[i];
    double b = a + len;
    while (i < set.candidates.size() && set.candidates[i] <= b) ++i;
    cover.intervals.emplace_back(a, std::min(b, cfg.window_khi));
  }
  cover.count = std::int64_t(cover.intervals.size());
  QuadratureOptions q;
  q.abs_tol = 1e-6;
  q.jobs = cfg.jobs;
  NeumaierSum mass;
  for (const auto& [ka, kb] : cover.intervals) {
    // E = 2 cos(pi k) decreases in k
    const double E_lo = 2.0 * std::cos(kPi * kb);
    const double E_hi = 2.0 * std::cos(kPi * ka);
    mass.add(measure_of_interval(p, set.L_m, E_lo, E_hi, q).mass);
  }
  cover.candidate_mass = mass.value();
  return cover;
}

}  // namespace

ScanReport count_bound_experiment(const Potential& p, const ScanConfig& cfg,
                                  std::span<const int> scales) {
  cfg.validate();
  ScanReport rep;
  std::int64_t L_largest = 0;
  for (int m : scales)
    if (cfg.L_m(m) <= cfg.scale_L_cap) L_largest = std::max(L_largest, cfg.L_m(m));
  ScanConfig eff = cfg;
  if (L_largest >= 2) eff.C1 = effective_C1(cfg, L_largest);
  rep.C1 = eff.C1;

  for (int m : scales) {
    ScaleReport sr;
    sr.m = m;
    const std::int64_t L = cfg.L_m(m);
    if (L > cfg.scale_L_cap) {
      sr.skipped = true;
      sr.note = "horizon " + std::to_string(L) + " exceeds the scale cap";
      rep.scales.push_back(sr);
      continue;
    }
    if (L < 1000) {
      sr.note = "horizon " + std::to_string(L) +
                " below the asymptotic regime (L < 1e3)";
    }
    sr.set = singular_interval_scan(p, eff, m);
    sr.cover = cover_candidates(p, eff, sr.set);
    if (std::int64_t(sr.set.accepted.size()) > cfg.N) rep.count_exceeded = true;
    if (sr.cover.count > 8 * std::int64_t(cfg.N)) rep.cover_exceeded = true;
    rep.scales.push_back(sr);
  }
  return rep;
}

DimensionFit local_dimension_diagnostic(const Potential& p, std::int64_t L,
                                        double E,
                                        std::span<const double> eps_grid,
                                        const DimensionOptions& opts) {
  if (eps_grid.size() < 2)
    throw std::invalid_argument("local_dimension_diagnostic: >= 2 eps values");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] < eps_grid[i - 1]))
      throw std::invalid_argument(
          "local_dimension_diagnostic: eps grid must decrease");
  DimensionFit fit;
  fit.method = opts.method;
  std::vector<double> xs, ys;
  for (double eps : eps_grid) {
    double mass = 0.0;
    if (opts.method == MeasureMethod::quadrature) {
      if (!(eps > 1.0 / double(L)))
        throw std::invalid_argument(
            "local_dimension_diagnostic: eps below the resolution scale 1/L");
      mass = measure_of_interval(p, L, E - eps, E + eps, opts.quad).mass;
    } else {
      const std::int64_t N = opts.oracle_N > 0 ? opts.oracle_N : 10 * L;
      OracleOptions oo;
      oo.jobs = opts.quad.jobs;
      mass =
          oracle_spectral_measure(p.with_cutoff(L), N, E - eps, E + eps, oo)
              .est.mass;
    }
    fit.eps_mass.emplace_back(eps, mass);
    if (mass > 0.0) {
      xs.push_back(std::log(eps));
      ys.push_back(std::log(mass));
    }
  }
  if (xs.size() < 2)
    throw numerical_fault("local_dimension_diagnostic: empty masses", L);
  fit.slope = linear_fit(xs, ys).slope;
  return fit;
}

}  // namespace speclab
