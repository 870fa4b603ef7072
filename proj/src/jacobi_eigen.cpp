#include "speclab/jacobi_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "speclab/common.hpp"
#include "speclab/parallel.hpp"

namespace speclab {

namespace {

constexpr int kLanes = 8;

#if defined(__AVX512F__)

// Sign-change count of the principal-minor sequence
//   D_0 = 1, D_i = (d_i - x) D_{i-1} - D_{i-2},
// which equals the number of eigenvalues below x.  Multiplication-only
// recurrence with periodic power-of-two renormalization; one vector op per
// step for eight shifts.
typedef double v8d __attribute__((vector_size(64)));

inline void sturm_block(const double* d, std::int64_t n, const double* x,
                        int width, std::int64_t* cnt) {
  const v8d kOne = {1, 1, 1, 1, 1, 1, 1, 1};
  const v8d kZero = {0, 0, 0, 0, 0, 0, 0, 0};
  const v8d kMinusUlp = kOne * -0x1p-54;
  v8d X;
  for (int l = 0; l < kLanes; ++l) X[l] = x[l];
  v8d D0 = kOne;
  v8d D1 = d[0] - X;
  D1 = (D1 == kZero) ? kMinusUlp : D1;
  v8d PS = (D1 < kZero) ? -kOne : kOne;
  v8d C = (D1 < kZero) ? kOne : kZero;
  std::int64_t i = 1;
  while (i < n) {
    const std::int64_t stop = std::min(n, i + 32);
    for (; i < stop; ++i) {
      v8d A = d[i] - X;
      v8d D2 = A * D1 - D0;
      // a vanished minor counts as a sign change (pivot clamped negative)
      D2 = (D2 == kZero) ? kMinusUlp * D1 : D2;
      v8d CS = (D2 < kZero) ? -kOne : kOne;
      C += (CS != PS) ? kOne : kZero;
      PS = CS;
      D0 = D1;
      D1 = D2;
    }
    v8d A0 = (D0 < kZero) ? -D0 : D0;
    v8d A1 = (D1 < kZero) ? -D1 : D1;
    v8d M = (A0 > A1) ? A0 : A1;
    v8d SC = kOne;
    SC = (M > 1e140) ? kOne * 0x1p-512 : SC;
    SC = (M < 1e-140) ? kOne * 0x1p+512 : SC;
    D0 *= SC;
    D1 *= SC;
  }
  for (int l = 0; l < width; ++l) cnt[l] = std::int64_t(C[l]);
}

#else

// LDL^T pivot recurrence, IEEE style: a zero pivot turns into +-inf on the
// next row and the recurrence self-heals, so the loop carries no branches.
inline void sturm_block(const double* d, std::int64_t n, const double* x,
                        int width, std::int64_t* cnt) {
  double q[kLanes];
  std::int64_t c[kLanes] = {0};
  for (int l = 0; l < kLanes; ++l) q[l] = d[0] - x[l];
  for (int l = 0; l < kLanes; ++l) c[l] = std::signbit(q[l]) ? 1 : 0;
  for (std::int64_t i = 1; i < n; ++i) {
    const double di = d[i];
    for (int l = 0; l < kLanes; ++l) {
      q[l] = di - x[l] - 1.0 / q[l];
    }
    for (int l = 0; l < kLanes; ++l) c[l] += std::signbit(q[l]) ? 1 : 0;
  }
  for (int l = 0; l < width; ++l) cnt[l] = c[l];
}

#endif

}  // namespace

std::int64_t sturm_count_below(std::span<const double> diag, double x) {
  if (diag.empty()) throw std::invalid_argument("sturm_count_below: empty");
  double xs[kLanes];
  std::int64_t cnt[kLanes];
  for (int l = 0; l < kLanes; ++l) xs[l] = x;
  sturm_block(diag.data(), std::int64_t(diag.size()), xs, 1, cnt);
  return cnt[0];
}

void sturm_counts_below(std::span<const double> diag,
                        std::span<const double> shifts,
                        std::span<std::int64_t> out, int jobs) {
  if (shifts.size() != out.size())
    throw std::invalid_argument("sturm_counts_below: size mismatch");
  const std::int64_t m = std::int64_t(shifts.size());
  const std::int64_t blocks = (m + kLanes - 1) / kLanes;
  parallel_for(blocks, jobs, [&](std::int64_t blk) {
    const std::int64_t lo = blk * kLanes;
    const int width = int(std::min<std::int64_t>(kLanes, m - lo));
    double x[kLanes];
    for (int l = 0; l < kLanes; ++l)
      x[l] = shifts[std::size_t(lo + (l < width ? l : 0))];
    std::int64_t cnt[kLanes];
    sturm_block(diag.data(), std::int64_t(diag.size()), x, width, cnt);
    for (int l = 0; l < width; ++l) out[std::size_t(lo + l)] = cnt[l];
  });
}

namespace {

struct Bracket {
  double lo, hi;
  std::int64_t clo, chi;  // Sturm counts at lo and hi
};

// Pivoted LU of tridiag(1, d - lambda, 1) fused with its own
// initialization, LAPACK dgttrf layout.  dl holds multipliers, swapped the
// pivot choices.
struct TridiagWork {
  std::vector<double> idd, dl, du, du2, rhs, start;
  std::vector<unsigned char> swapped;
  void resize(std::size_t n) {
    if (idd.size() == n) return;
    idd.resize(n);
    dl.resize(n);
    du.resize(n);
    du2.resize(n);
    rhs.resize(n);
    swapped.resize(n);
    start.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      start[i] = signed_uniform_at(0x5eedf00dULL, i);
  }
};

void factor_shifted(std::span<const double> diag, double lambda,
                    TridiagWork& w) {
  const std::size_t n = diag.size();
  constexpr double tiny = std::numeric_limits<double>::min();
  double dd_i = diag[0] - lambda;  // current pivot candidate
  double du_i = 1.0;                // finalized upper entry for row i
  double du_next = 1.0;             // upper entry for row i+1 (may be set here)
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double dd_next = diag[i + 1] - lambda;
    if (std::abs(dd_i) >= 1.0) {  // |subdiagonal| = 1
      const double m = 1.0 / dd_i;
      w.idd[i] = m;
      w.dl[i + 1] = m;
      w.du[i] = du_i;
      w.du2[i] = 0.0;
      w.swapped[i] = 0;
      dd_i = dd_next - m * du_i;
      du_i = du_next;
      du_next = 1.0;
    } else {
      const double m = dd_i;  // dd_i / 1.0
      w.idd[i] = 1.0;
      w.dl[i + 1] = m;
      w.du[i] = dd_next;
      w.swapped[i] = 1;
      if (i + 2 < n) {
        w.du2[i] = du_next;
        dd_i = du_i - m * dd_next;
        du_i = -m * du_next;
        du_next = 1.0;
      } else {
        w.du2[i] = 0.0;
        dd_i = du_i - m * dd_next;
        du_i = 0.0;
      }
    }
  }
  if (std::abs(dd_i) < tiny) dd_i = tiny;
  w.idd[n - 1] = 1.0 / dd_i;
  w.du[n - 1] = 0.0;
  w.du2[n - 1] = 0.0;
  if (n >= 2) w.du2[n - 2] = 0.0;
}

void solve_factored(TridiagWork& w) {
  const std::size_t n = w.idd.size();
  double* rhs = w.rhs.data();
  const double* dl = w.dl.data();
  const unsigned char* sw = w.swapped.data();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (sw[i]) std::swap(rhs[i], rhs[i + 1]);
    rhs[i + 1] -= dl[i + 1] * rhs[i];
  }
  // pivots stored inverted: the back substitution is a pure fma/mul chain
  const double* idd = w.idd.data();
  const double* du = w.du.data();
  const double* du2 = w.du2.data();
  rhs[n - 1] *= idd[n - 1];
  if (n >= 2) rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) * idd[n - 2];
  for (std::size_t ir = n; ir >= 3; --ir) {
    std::size_t i = ir - 3;
    rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) * idd[i];
  }
}

double first_component_weight(std::span<const double> diag, double lambda,
                              TridiagWork& w) {
  const std::size_t n = diag.size();
  factor_shifted(diag, lambda, w);
  // Two inverse-iteration sweeps from a fixed start vector: the first aligns
  // to the target eigenvector up to O(eig_tol/gap) neighbor contamination,
  // the second squares it away.  No renormalization in between; the weight
  // is scale-invariant and the entries stay far from overflow.
  std::copy(w.start.begin(), w.start.end(), w.rhs.begin());
  solve_factored(w);
  solve_factored(w);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm2 += w.rhs[i] * w.rhs[i];
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) return 0.0;
  return w.rhs[0] * w.rhs[0] / norm2;
}

}  // namespace

JacobiSpectralResult jacobi_first_component_weights(
    std::span<const double> diag, double E1, double E2,
    const JacobiEigenOptions& opts) {
  if (diag.size() < 2)
    throw std::invalid_argument("jacobi_first_component_weights: N >= 2");
  if (!(E1 < E2))
    throw std::invalid_argument("jacobi_first_component_weights: E1 < E2");
  JacobiSpectralResult res;

  std::vector<Bracket> active;
  {
    std::int64_t c1 = sturm_count_below(diag, E1);
    std::int64_t c2 = sturm_count_below(diag, E2);
    if (c2 > c1) active.push_back({E1, E2, c1, c2});
  }
  std::vector<double> lambdas;
  std::vector<Bracket> next;
  std::vector<double> mids;
  std::vector<std::int64_t> cmid;
  while (!active.empty()) {
    mids.resize(active.size());
    cmid.resize(active.size());
    for (std::size_t i = 0; i < active.size(); ++i)
      mids[i] = 0.5 * (active[i].lo + active[i].hi);
    sturm_counts_below(diag, mids, cmid, opts.jobs);
    next.clear();
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Bracket& b = active[i];
      const double mid = mids[i];
      Bracket halves[2] = {{b.lo, mid, b.clo, cmid[i]},
                           {mid, b.hi, cmid[i], b.chi}};
      for (const Bracket& h : halves) {
        std::int64_t m = h.chi - h.clo;
        if (m == 0) continue;
        if (h.hi - h.lo <= 2.0 * opts.eig_tol) {
          double lam = 0.5 * (h.lo + h.hi);
          if (m > 1 && h.hi - h.lo <= opts.spacing_warn)
            res.ill_conditioned = true;
          for (std::int64_t r = 0; r < m; ++r) lambdas.push_back(lam);
        } else {
          next.push_back(h);
        }
      }
    }
    active.swap(next);
  }
  std::sort(lambdas.begin(), lambdas.end());

  res.eigenvalues = lambdas;
  res.weights.assign(lambdas.size(), 0.0);
  res.min_spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    res.min_spacing = std::min(res.min_spacing, lambdas[i] - lambdas[i - 1]);
  if (res.min_spacing < opts.spacing_warn) res.ill_conditioned = true;

  parallel_for(std::int64_t(lambdas.size()), opts.jobs, [&](std::int64_t i) {
    thread_local TridiagWork work;
    work.resize(diag.size());
    res.weights[std::size_t(i)] =
        first_component_weight(diag, lambdas[std::size_t(i)], work);
  });
  return res;
}

}  // namespace speclab
