#pragma once

// Adaptive quadrature with explicit divergence detection.  Improper integrals
// are accumulated over doubling intervals; the integral is declared +inf when
// the last three panel increments all exceed 10x the scaled tolerance and are
// non-decreasing, and converged when the recent increments fall below it.

#include <cmath>
#include <string>

#include "math.hpp"

namespace phirisk {

struct quad_result {
  double value = 0.0;
  bool converged = true;
  bool divergent = false;
  std::string note;
};

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double m, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm)) {
    // NaN beats inf so that invalid-integrand detection survives the sum
    if (std::isnan(flm) || std::isnan(frm)) return kNaN;
    return kInf;
  }
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// thrown (and caught inside integrate_improper) when a single improper
// integral has consumed its integrand-evaluation budget
struct budget_exhausted {};

}  // namespace detail

// Adaptive Simpson on a finite panel; +inf / NaN integrand values bubble up.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10,
                        int max_depth = 28) {
  if (!(a < b)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  if (std::isnan(fa) || std::isnan(fm) || std::isnan(fb)) return kNaN;
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb)) return kInf;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral of f over (lo, hi) where either endpoint may be infinite.
template <class F>
quad_result integrate_improper(F&& f, double lo, double hi, double abs_tol = 1e-10,
                               double rel_tol = 1e-9) {
  quad_result out;
  // hard cap on integrand evaluations: explosively growing integrands can
  // otherwise sink unbounded CPU into the adaptive recursion before the
  // divergence rule gets a chance to fire on the tail panels
  long budget = 400000;
  auto g = [&](double x) -> double {
    if (--budget < 0) throw detail::budget_exhausted{};
    return f(x);
  };
  const auto panel_tol = [&](double running) {
    return std::max(abs_tol, rel_tol * std::fabs(running)) / 16.0;
  };

  try {
    // finite core
    double a = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi - 1.0 : -1.0);
    double b = std::isfinite(hi) ? hi : (std::isfinite(lo) ? lo + 1.0 : 1.0);
    if (a > b) std::swap(a, b);
    // nudge an endpoint inward when the integrand is singular exactly there:
    // integrable endpoint singularities (e.g. densities ~ |x - a|^{-c}, c < 1)
    // would otherwise poison the Simpson sums with an isolated infinity
    const auto nudge_in = [&](double x0, double other) {
      if (std::isfinite(g(x0))) return x0;
      const double cap = 0.25 * (b - a);
      double e = 1e-15 * std::max(1.0, std::fabs(x0));
      for (int k = 0; k < 25 && e < cap; ++k, e *= 8.0) {
        const double x = x0 + (other > x0 ? e : -e);
        if (std::isfinite(g(x))) return x;
      }
      return x0;
    };
    if (b > a) {
      a = nudge_in(a, b);
      b = nudge_in(b, a);
    }
    double total = adaptive_simpson(g, a, b, std::max(abs_tol, 1e-12) / 4.0);
    if (std::isnan(total)) {
      out.value = kNaN;
      out.converged = false;
      out.note = "integrand invalid on core panel";
      return out;
    }
    if (!std::isfinite(total)) {
      out.value = kInf;
      out.divergent = true;
      out.converged = false;
      out.note = "integrand non-integrable on core panel";
      return out;
    }

    // one doubling tail per infinite endpoint
    for (int side = 0; side < 2; ++side) {
      const bool right = side == 1;
      if (right && std::isfinite(hi)) continue;
      if (!right && std::isfinite(lo)) continue;
      double anchor = right ? b : a;
      double width = 1.0;
      double prev_inc = kInf;  // previous |increment|
      int grow_run = 0;        // consecutive non-decreasing increments > noise
      int calm_run = 0;        // consecutive increments within tolerance
      bool settled = false;
      // integrands whose support starts far from the core produce exactly-zero
      // leading panels; those carry no convergence evidence, so the Cauchy
      // rule is suspended until a nonzero increment appears (or the scanned
      // width exceeds 2^40, at which point the tail is accepted as zero)
      bool seen_nonzero = false;
      for (int m = 0; m < 64; ++m) {
        const double p0 = right ? anchor : anchor - width;
        const double p1 = right ? anchor + width : anchor;
        double inc = adaptive_simpson(g, p0, p1, panel_tol(total));
        if (std::isnan(inc)) {
          out.value = kNaN;
          out.converged = false;
          out.note = "integrand invalid on tail panel";
          return out;
        }
        total += std::isfinite(inc) ? inc : 0.0;
        if (inc != 0.0) seen_nonzero = true;
        anchor = right ? p1 : p0;
        width *= 2.0;
        const double tol_eff = std::max(abs_tol, rel_tol * std::max(1.0, std::fabs(total)));
        const double inc_abs = std::fabs(inc);
        // an interior hump makes a few increments rise before decaying again,
        // so growth counts as divergence only when sustained over six panels
        // (truly divergent integrands keep growing, then overflow)
        if (inc_abs > 10.0 * tol_eff && prev_inc > 10.0 * tol_eff &&
            inc_abs >= prev_inc) {
          ++grow_run;
        } else {
          grow_run = 0;
        }
        calm_run = inc_abs <= tol_eff ? calm_run + 1 : 0;
        prev_inc = inc_abs;
        if (!std::isfinite(inc) || grow_run >= 5) {
          out.value = kInf;
          out.divergent = true;
          out.converged = false;
          out.note = right ? "partial integrals grow toward +endpoint"
                           : "partial integrals grow toward -endpoint";
          return out;
        }
        if (calm_run >= 3 && (seen_nonzero || m >= 40)) {
          settled = true;
          break;
        }
      }
      if (!settled) {
        out.value = kInf;
        out.divergent = true;
        out.converged = false;
        out.note = "partial integrals fail the Cauchy criterion";
        return out;
      }
    }
    out.value = total;
    return out;
  } catch (const detail::budget_exhausted&) {
    // neither converged nor provably divergent; value stays finite-free but
    // non-NaN so callers treat the result as indeterminate, not invalid
    out.value = kInf;
    out.converged = false;
    out.divergent = false;
    out.note = "evaluation budget exhausted";
    return out;
  }
}

}  // namespace phirisk
