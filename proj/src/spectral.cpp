#include "speclab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "speclab/common.hpp"
#include "speclab/jacobi_eigen.hpp"
#include "speclab/parallel.hpp"

namespace speclab {

ComplexEnergy complex_quasimomentum(std::complex<double> z) {
  if (!(z.imag() > 0.0))
    throw std::invalid_argument("complex_quasimomentum: Im z must be > 0");
  // Principal acos maps the upper half plane to Re in (0, pi), Im < 0,
  // which is exactly the required branch.
  std::complex<double> kappa = std::acos(z / 2.0) / kPi;
  ComplexEnergy ce;
  ce.z = z;
  ce.k = kappa.real();
  ce.gamma = kappa.imag();
  std::complex<double> back = 2.0 * std::cos(kPi * kappa);
  if (std::abs(back - z) > 1e-10 * (1.0 + std::abs(z)))
    throw numerical_fault("complex_quasimomentum: inversion residual", 0);
  return ce;
}

std::complex<double> weyl_m_truncated(const Potential& p, std::int64_t L,
                                      const ComplexEnergy& ce) {
  if (L < 1) throw std::invalid_argument("weyl_m_truncated: L must be >= 1");
  const std::complex<double> kappa(ce.k, ce.gamma);
  const std::complex<double> z = ce.z;
  // Normalized seeds u~(L) = 1, u~(L+1) = e^{-i pi kappa}; the common factor
  // e^{-i pi kappa L} cancels in m(z).
  std::complex<double> u_hi = std::exp(std::complex<double>(0, -kPi) * kappa);
  std::complex<double> u_lo(1.0, 0.0);
  const Potential pc = p.with_cutoff(L);
  for (std::int64_t n = L; n >= 1; --n) {
    std::complex<double> u_prev = (z - pc.eval(n)) * u_lo - u_hi;
    u_hi = u_lo;
    u_lo = u_prev;
    double m = std::max(std::abs(u_lo.real()), std::abs(u_lo.imag()));
    if (m > 1e150) {
      u_lo *= 1e-150;
      u_hi *= 1e-150;
    }
  }
  // u_lo = u~(0), u_hi = u~(1) up to a common scale
  if (u_lo == std::complex<double>(0.0, 0.0))
    throw numerical_fault("weyl_m_truncated: degenerate boundary value", 0);
  return -u_hi / u_lo;
}

namespace {

double density_from_endpoint(const DirichletEndpoint& end,
                             const EnergyPoint& ep) {
  const double b = end.uL, d = end.uL1;
  const double w1 = d - b * ep.cos_pi_k;
  const double w2 = b * ep.sin_pi_k;
  const double denom = w1 * w1 + w2 * w2;
  return ep.sin_pi_k / (kPi * denom) * std::exp(-2.0 * end.log_scale);
}

}  // namespace

SpectralDensitySample spectral_density_truncated(const Potential& p,
                                                 std::int64_t L,
                                                 const EnergyPoint& ep) {
  if (L < 1)
    throw std::invalid_argument("spectral_density_truncated: L must be >= 1");
  if (!(ep.E > -2.0 && ep.E < 2.0))
    throw std::invalid_argument("spectral_density_truncated: |E| >= 2");
  const Potential pc = p.with_cutoff(L);
  DirichletEndpoint end = dirichlet_endpoint(pc, ep, L);
  SpectralDensitySample s;
  s.ep = ep;
  s.L = L;
  s.density = density_from_endpoint(end, ep);
  if (!(s.density > 0.0) || !std::isfinite(s.density))
    throw numerical_fault("spectral_density_truncated: non-positive density",
                          L);
  return s;
}

std::vector<double> spectral_density_batch(const Potential& p, std::int64_t L,
                                           std::span<const double> energies,
                                           int jobs) {
  const Potential pc = p.with_cutoff(L);
  const auto vtab = pc.table(L);
  auto ends = dirichlet_endpoint_batch(
      std::span<const double>(vtab.data(), vtab.size()), energies, L, jobs);
  std::vector<double> out(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) {
    out[i] = density_from_endpoint(ends[i], EnergyPoint::from_energy(energies[i]));
  }
  return out;
}

namespace {

struct Panel {
  double a, h;          // interval [a, a+h]
  double fa, fm, fb;    // endpoint and midpoint values
  double simpson;       // h/6 (fa + 4 fm + fb)
  double tol;
  int depth;
};

struct Leaf {
  double a;
  double value;
  double err;
  bool converged;
};

}  // namespace

MeasureEstimate measure_of_interval(const Potential& p, std::int64_t L,
                                    double E1, double E2,
                                    const QuadratureOptions& opts) {
  if (!(E1 > -2.0 && E2 < 2.0 && E1 < E2))
    throw std::invalid_argument(
        "measure_of_interval: need -2 < E1 < E2 < 2");
  if (L < 1) throw std::invalid_argument("measure_of_interval: L >= 1");

  const Potential pc = p.with_cutoff(L);
  const auto vtab = pc.table(L);
  auto evaluate = [&](const std::vector<double>& xs) {
    auto ends = dirichlet_endpoint_batch(
        std::span<const double>(vtab.data(), vtab.size()), xs, L, opts.jobs);
    std::vector<double> f(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      f[i] = density_from_endpoint(ends[i], EnergyPoint::from_energy(xs[i]));
    return f;
  };

  // Seed panels at the density's oscillation scale: phases vary like
  // (L+1) pi k, so the period in E is about 2 pi sin(pi k) / (L+1).
  const double smin =
      std::min(std::sqrt(1.0 - E1 * E1 / 4.0), std::sqrt(1.0 - E2 * E2 / 4.0));
  const double period = kTwoPi * smin / double(L + 1);
  const double width = E2 - E1;
  std::int64_t npanels = std::int64_t(std::ceil(2.0 * width / period));
  npanels = std::clamp<std::int64_t>(npanels, 8, 400000);

  std::vector<Panel> active;
  active.reserve(std::size_t(npanels));
  {
    std::vector<double> xs(std::size_t(2 * npanels + 1));
    for (std::int64_t i = 0; i <= 2 * npanels; ++i)
      xs[std::size_t(i)] =
          E1 + width * (double(i) / double(2 * npanels));
    auto f = evaluate(xs);
    for (std::int64_t i = 0; i < npanels; ++i) {
      Panel pan;
      pan.a = xs[std::size_t(2 * i)];
      pan.h = width / double(npanels);
      pan.fa = f[std::size_t(2 * i)];
      pan.fm = f[std::size_t(2 * i + 1)];
      pan.fb = f[std::size_t(2 * i + 2)];
      pan.simpson = pan.h / 6.0 * (pan.fa + 4.0 * pan.fm + pan.fb);
      pan.tol = opts.abs_tol * (pan.h / width);
      pan.depth = 0;
      active.push_back(pan);
    }
  }

  std::vector<Leaf> leaves;
  std::vector<Panel> next;
  std::vector<double> xs;
  while (!active.empty()) {
    xs.resize(active.size() * 2);
    for (std::size_t i = 0; i < active.size(); ++i) {
      xs[2 * i] = active[i].a + 0.25 * active[i].h;
      xs[2 * i + 1] = active[i].a + 0.75 * active[i].h;
    }
    auto f = evaluate(xs);
    next.clear();
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Panel& pan = active[i];
      const double fm1 = f[2 * i], fm2 = f[2 * i + 1];
      const double h2 = 0.5 * pan.h;
      const double s_left = h2 / 6.0 * (pan.fa + 4.0 * fm1 + pan.fm);
      const double s_right = h2 / 6.0 * (pan.fm + 4.0 * fm2 + pan.fb);
      const double err = (s_left + s_right - pan.simpson) / 15.0;
      if (std::abs(err) <= pan.tol || pan.depth + 1 >= opts.max_depth) {
        leaves.push_back({pan.a, s_left + s_right + err, std::abs(err),
                          std::abs(err) <= pan.tol});
      } else {
        Panel left{pan.a,          h2,  pan.fa, fm1,
                   pan.fm,         0.0, 0.5 * pan.tol, pan.depth + 1};
        left.simpson = s_left;
        Panel right{pan.a + h2,    h2,  pan.fm, fm2,
                    pan.fb,        0.0, 0.5 * pan.tol, pan.depth + 1};
        right.simpson = s_right;
        next.push_back(left);
        next.push_back(right);
      }
    }
    active.swap(next);
  }

  std::sort(leaves.begin(), leaves.end(),
            [](const Leaf& x, const Leaf& y) { return x.a < y.a; });
  NeumaierSum mass, err;
  bool converged = true;
  for (const Leaf& leaf : leaves) {
    mass.add(leaf.value);
    err.add(leaf.err);
    converged = converged && leaf.converged;
  }
  MeasureEstimate est;
  est.E1 = E1;
  est.E2 = E2;
  est.mass = mass.value();
  est.err_estimate = err.value();
  est.method = MeasureMethod::quadrature;
  est.converged = converged;
  return est;
}

OracleMeasure oracle_spectral_measure(const Potential& p, std::int64_t N,
                                      double E1, double E2,
                                      const OracleOptions& opts) {
  if (N < 10)
    throw std::invalid_argument("oracle_spectral_measure: N must be >= 10");
  if (!(E1 < E2))
    throw std::invalid_argument("oracle_spectral_measure: need E1 < E2");
  auto tab = p.table(N);
  std::vector<double> diag(tab.begin() + 1, tab.end());  // V(1..N)
  JacobiEigenOptions jopts;
  jopts.eig_tol = opts.eig_tol;
  jopts.jobs = opts.jobs;
  auto eig = jacobi_first_component_weights(diag, E1, E2, jopts);
  NeumaierSum mass;
  for (double w : eig.weights) mass.add(w);
  OracleMeasure om;
  om.est.E1 = E1;
  om.est.E2 = E2;
  om.est.mass = mass.value();
  om.est.err_estimate = 0.0;
  om.est.method = MeasureMethod::oracle;
  om.est.converged = !eig.ill_conditioned;
  om.eigenvalue_count = std::int64_t(eig.eigenvalues.size());
  om.min_spacing = eig.min_spacing;
  om.ill_conditioned = eig.ill_conditioned;
  return om;
}

double free_measure(double E1, double E2) {
  auto F = [](double E) {
    E = std::clamp(E, -2.0, 2.0);
    return (0.5 * E * std::sqrt(4.0 - E * E) + 2.0 * std::asin(0.5 * E)) /
           kTwoPi;
  };
  return F(E2) - F(E1);
}

TwoMeasureReport two_measure_comparison(const Potential& p, std::int64_t L,
                                        std::int64_t L_ref, double E,
                                        double eps, double M, double sigma,
                                        double C,
                                        const QuadratureOptions& opts) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("two_measure_comparison: sigma must be > 0");
  const double eps_min = std::pow(double(L), -1.0 / (1.0 + sigma));
  if (!(eps > eps_min))
    throw std::invalid_argument(
        "two_measure_comparison: eps must exceed L^(-1/(1+sigma)) = " +
        to_g17(eps_min));
  if (L_ref < L)
    throw std::invalid_argument("two_measure_comparison: L_ref must be >= L");
  TwoMeasureReport rep;
  rep.eps = eps;
  rep.M = M;
  rep.C = C;
  rep.mass_ref = measure_of_interval(p, L_ref, E - eps, E + eps, opts).mass;
  rep.mass_inner =
      measure_of_interval(p, L, E - eps / 2.0, E + eps / 2.0, opts).mass;
  rep.deficit = rep.mass_ref - rep.mass_inner;
  rep.bound = -C * std::pow(eps, M);
  rep.violation = rep.deficit < rep.bound;
  return rep;
}

}  // namespace speclab
