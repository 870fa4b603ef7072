#include "speclab/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "speclab/common.hpp"
#include "speclab/parallel.hpp"

namespace speclab {

namespace {

// Power-of-two renormalization factor: exact in binary arithmetic.
constexpr double kDownScale = 0x1p-1000;
constexpr double kDownScaleLog = 1000.0 * 0.69314718055994530942;

}  // namespace

TransferMatrix TransferMatrix::one_step(const EnergyPoint& ep, double v) {
  TransferMatrix t;
  t.a = 0.0;
  t.b = 1.0;
  t.c = -1.0;
  t.d = ep.E - v;
  return t;
}

void TransferMatrix::apply_step(const EnergyPoint& ep, double v) {
  const double e = ep.E - v;
  const double na = c, nb = d;
  c = e * c - a;
  d = e * d - b;
  a = na;
  b = nb;
  if (max_abs_entry() > rescale_threshold) {
    a *= kDownScale;
    b *= kDownScale;
    c *= kDownScale;
    d *= kDownScale;
    log_scale += kDownScaleLog;
  }
}

double TransferMatrix::max_abs_entry() const {
  return std::max(std::max(std::abs(a), std::abs(b)),
                  std::max(std::abs(c), std::abs(d)));
}

double TransferMatrix::det_residual() const {
  double m = max_abs_entry();
  if (m == 0.0) return 1.0;
  // det of the represented matrix is (ad - bc) exp(2 log_scale); evaluate in
  // log form so entries near the rescale threshold cannot overflow.
  double det_scaled = (a / m) * (d / m) - (b / m) * (c / m);
  if (det_scaled <= 0.0) return std::abs(det_scaled * m * m) + 1.0;
  double log_det = std::log(det_scaled) + 2.0 * std::log(m) + 2.0 * log_scale;
  return std::abs(std::expm1(log_det));
}

TransferMatrix transfer_product(const Potential& p, const EnergyPoint& ep,
                                std::int64_t L) {
  if (L < 1) throw std::invalid_argument("transfer_product: L must be >= 1");
  TransferMatrix t = TransferMatrix::identity();
  for (std::int64_t n = 1; n <= L; ++n) t.apply_step(ep, p.eval(n));
  return t;
}

DirichletEndpoint dirichlet_endpoint(const Potential& p, const EnergyPoint& ep,
                                     std::int64_t L) {
  if (L < 1) throw std::invalid_argument("dirichlet_endpoint: L must be >= 1");
  DirichletEndpoint r;
  double u0 = 0.0, u1 = 1.0, ls = 0.0;
  for (std::int64_t n = 1; n <= L; ++n) {
    double u2 = (ep.E - p.eval(n)) * u1 - u0;
    u0 = u1;
    u1 = u2;
    if (std::max(std::abs(u0), std::abs(u1)) >
        TransferMatrix::rescale_threshold) {
      u0 *= kDownScale;
      u1 *= kDownScale;
      ls += kDownScaleLog;
    }
  }
  r.uL = u0;
  r.uL1 = u1;
  r.log_scale = ls;
  return r;
}

std::vector<DirichletEndpoint> dirichlet_endpoint_batch(
    std::span<const double> vtab, std::span<const double> energies,
    std::int64_t L, int jobs) {
  if (L < 1) throw std::invalid_argument("dirichlet_endpoint_batch: L >= 1");
  if (std::int64_t(vtab.size()) <= L)
    throw std::invalid_argument("dirichlet_endpoint_batch: table too short");
  constexpr int kLanes = 8;
  const std::int64_t m = std::int64_t(energies.size());
  std::vector<DirichletEndpoint> out(energies.size());
  const std::int64_t blocks = (m + kLanes - 1) / kLanes;
  parallel_for(blocks, jobs, [&](std::int64_t blk) {
    const std::int64_t lo = blk * kLanes;
    const int width = int(std::min<std::int64_t>(kLanes, m - lo));
    double e[kLanes], u0[kLanes], u1[kLanes], ls[kLanes];
    for (int l = 0; l < kLanes; ++l) {
      e[l] = l < width ? energies[std::size_t(lo + l)] : 0.0;
      u0[l] = 0.0;
      u1[l] = 1.0;
      ls[l] = 0.0;
    }
    const double* v = vtab.data();
    std::int64_t n = 1;
    while (n <= L) {
      std::int64_t stop = std::min(L, n + 255);
      for (; n <= stop; ++n) {
        const double vn = v[n];
        for (int l = 0; l < kLanes; ++l) {
          double u2 = (e[l] - vn) * u1[l] - u0[l];
          u0[l] = u1[l];
          u1[l] = u2;
        }
      }
      // Growth per step is at most a factor 5ish; a check every 256 steps
      // keeps entries far from the overflow threshold.
      for (int l = 0; l < kLanes; ++l) {
        if (std::max(std::abs(u0[l]), std::abs(u1[l])) > 1e220) {
          u0[l] *= kDownScale;
          u1[l] *= kDownScale;
          ls[l] += kDownScaleLog;
        }
      }
    }
    for (int l = 0; l < width; ++l) {
      out[std::size_t(lo + l)] = {u0[l], u1[l], ls[l]};
    }
  });
  return out;
}

PolarPair prufer_from_vector(double u_prev, double u_cur,
                             const EnergyPoint& ep) {
  if (u_prev == 0.0 && u_cur == 0.0)
    throw std::invalid_argument("prufer_from_vector: zero vector");
  if (!std::isfinite(u_prev) || !std::isfinite(u_cur))
    throw std::invalid_argument("prufer_from_vector: non-finite input");
  const double y1 = u_prev;
  const double y2 = (u_cur - ep.cos_pi_k * u_prev) / ep.sin_pi_k;
  PolarPair r;
  r.R = std::hypot(y1, y2);
  r.theta_mod1 = frac01(ep.k + std::atan2(y1, y2) / kPi);
  return r;
}

PrueferState prufer_initial_state(const EnergyPoint& ep) {
  PrueferState s;
  s.n = 0;
  s.logR = -std::log(ep.sin_pi_k);
  s.theta_wind = 0.0;
  s.theta_frac = ep.k;
  return s;
}

namespace {

struct StepResult {
  double half_log_ratio;
  double delta;  // theta(n+1) - theta(n) - k, in (-1/2, 1/2]
};

StepResult step_kernel(double theta_frac, double v, const EnergyPoint& ep,
                       const FlowOptions& opts, std::int64_t n) {
  if (v == 0.0) return {0.0, 0.0};
  const double x = v / ep.sin_pi_k;
  double spt = std::sin(kPi * theta_frac);
  double cpt = std::cos(kPi * theta_frac);
  if (std::abs(spt) < opts.delta_cot) {
    // Vector route; the cotangent recursion is singular near theta in Z.
    // Overall sign of the solution vector is immaterial: both the amplitude
    // ratio and the reduced angle are invariant under Y -> -Y.
    double ang = kPi * (theta_frac - ep.k);
    double y1 = std::sin(ang), y2 = std::cos(ang);
    double u_prev = y1;
    double u_cur = y2 * ep.sin_pi_k + ep.cos_pi_k * y1;
    double u_next = (ep.E - v) * u_cur - u_prev;
    double z1 = u_cur;
    double z2 = (u_next - ep.cos_pi_k * u_cur) / ep.sin_pi_k;
    double r_new = std::hypot(z1, z2);
    double r_old = std::hypot(y1, y2);
    if (!(r_new > 0.0) || !std::isfinite(r_new))
      throw numerical_fault("prufer_step: degenerate vector step", n);
    StepResult out;
    out.half_log_ratio = std::log(r_new / r_old);
    out.delta = wrap_pm_half(std::atan2(z1, z2) / kPi - theta_frac);
    return out;
  }
  const double s2 = 2.0 * spt * cpt;
  const double ss = spt * spt;
  const double t = x * (x * ss - s2);
  if (!(t > -1.0))
    throw numerical_fault("prufer_step: non-positive amplitude ratio", n);
  StepResult out;
  out.half_log_ratio = 0.5 * std::log1p(t);
  const double y = cpt / spt - x;
  const double alpha = std::atan2(1.0, y) / kPi;  // arccot(y)/pi in (0,1)
  out.delta = wrap_pm_half(alpha - theta_frac);
  return out;
}

PrueferState advance_state(const PrueferState& s, const StepResult& r,
                           const EnergyPoint& ep) {
  PrueferState out;
  out.n = s.n + 1;
  out.logR = s.logR + r.half_log_ratio;
  double t = s.theta_frac + ep.k + r.delta;
  double fl = std::floor(t);
  out.theta_frac = t - fl;
  out.theta_wind = s.theta_wind + fl;
  if (!std::isfinite(out.logR) || !std::isfinite(out.theta_frac))
    throw numerical_fault("prufer_step: non-finite state", out.n);
  return out;
}

}  // namespace

PrueferState prufer_step(const PrueferState& s, double v,
                         const EnergyPoint& ep, const FlowOptions& opts) {
  return advance_state(s, step_kernel(s.theta_frac, v, ep, opts, s.n), ep);
}

PrueferFlow::PrueferFlow(Potential p, EnergyPoint ep, FlowOptions opts)
    : p_(std::move(p)), ep_(ep), opts_(opts), s_(prufer_initial_state(ep)) {}

PrueferFlow::PrueferFlow(Potential p, EnergyPoint ep,
                         std::shared_ptr<const std::vector<double>> vtab,
                         FlowOptions opts)
    : p_(std::move(p)),
      ep_(ep),
      opts_(opts),
      vtab_(std::move(vtab)),
      s_(prufer_initial_state(ep)) {}

double PrueferFlow::advance() {
  const std::int64_t site = s_.n + 1;
  const double v =
      (vtab_ && site < std::int64_t(vtab_->size()))
          ? (*vtab_)[std::size_t(site)]
          : p_.eval(site);
  last_v_ = v;
  StepResult r = step_kernel(s_.theta_frac, v, ep_, opts_, s_.n);
  const double x = std::abs(v / ep_.sin_pi_k);
  if (x < 0.5 && std::abs(r.delta) > x + 1e-12) ++violations_;
  s_ = advance_state(s_, r, ep_);
  return r.delta;
}

void PrueferFlow::advance_to(std::int64_t n) {
  while (s_.n < n) advance();
}

std::vector<PrueferState> prufer_trace(const Potential& p,
                                       const EnergyPoint& ep, std::int64_t L,
                                       const FlowOptions& opts) {
  if (L < 1) throw std::invalid_argument("prufer_trace: L must be >= 1");
  std::vector<PrueferState> trace;
  trace.reserve(std::size_t(L) + 2);
  PrueferFlow flow(p, ep, opts);
  trace.push_back(flow.state());
  for (std::int64_t n = 0; n <= L; ++n) {
    flow.advance();
    trace.push_back(flow.state());
  }
  return trace;
}

AmplitudeIdentity log_amplitude_identity(const Potential& p,
                                         const EnergyPoint& ep, std::int64_t L,
                                         const FlowOptions& opts) {
  if (L < 2)
    throw std::invalid_argument("log_amplitude_identity: L must be >= 2");
  PrueferFlow flow(p, ep, opts);
  const double logR0 = flow.state().logR;
  NeumaierSum sum;
  NeumaierSum bound;
  for (std::int64_t n = 1; n <= L - 1; ++n) {
    const double x = p.eval(n) / ep.sin_pi_k;
    sum.add(x * std::sin(kTwoPi * flow.state().theta_frac));
    bound.add(2.0 * x * x);
    flow.advance();
  }
  AmplitudeIdentity out;
  out.lhs = 2.0 * (flow.state().logR - logR0);
  out.rhs_sum = -sum.value();
  out.residual = out.lhs - out.rhs_sum;
  out.second_order_bound = bound.value();
  out.log_R_final = flow.state().logR;
  return out;
}

std::vector<double> log_amplitude_sq_batch(const Potential& p,
                                           std::span<const double> ks,
                                           std::int64_t H, int jobs) {
  if (H < 1) throw std::invalid_argument("log_amplitude_sq_batch: H >= 1");
  std::vector<double> energies(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i)
    energies[i] = 2.0 * std::cos(kPi * ks[i]);
  auto vtab = p.table(H + 1);
  auto ends = dirichlet_endpoint_batch(vtab, energies, H, jobs);
  std::vector<double> out(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    EnergyPoint ep = EnergyPoint::from_k(ks[i]);
    PolarPair pp = prufer_from_vector(ends[i].uL, ends[i].uL1, ep);
    out[i] = 2.0 * (std::log(pp.R) + ends[i].log_scale);
  }
  return out;
}

}  // namespace speclab
