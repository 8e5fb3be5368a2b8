#pragma once

// phi-divergence catalog.  A divergence carries phi (extended real on t >= 0,
// with phi(0) = lim_{t->0} phi(t)), its convex conjugate, and the conjugate's
// right-derivative, plus the metadata the solvers need: domain suprema,
// finite-phi anchor points around t=1, one-sided conjugate slopes at 0, and
// overflow caps (conjugate values above 1e300 are treated as +inf).

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "math.hpp"
#include "quadrature.hpp"

namespace phirisk {

inline constexpr double kOverflowCap = 1e300;

struct divergence {
  std::string id;
  std::function<double(double)> phi;         // t >= 0; +inf outside dom
  std::function<double(double)> conj;        // phi*(s)
  std::function<double(double)> conj_deriv;  // right derivative of phi*
  double dom_upper = kInf;       // sup dom(phi)
  double conj_dom_upper = kInf;  // sup{s : phi*(s) < +inf} = lim phi(t)/t
  double x0 = 0.5, y0 = 2.0;     // finite-phi anchors with x0 < 1 < y0
  double conj_slope_neg0 = 1.0, conj_slope_pos0 = 1.0;  // one-sided (phi*)'(0)
  double s_overflow = kInf;   // sup{s : phi*(s) <= 1e300}
  double s_deriv_cap = kInf;  // sup{s : (phi*)'(s) <= 1e45}
  bool closed_phi = true;
  // ln(phi(t)/t) at t = exp(lt), for log-ratios beyond double range; only
  // meaningful (and only consulted) when lim phi(t)/t = +inf, where a closed
  // form keeps far-tail integrands honest instead of frozen at an overflow cap
  std::function<double(double)> log_support_slope;
};

namespace detail {

// sup{s : h(s) <= cap} for non-decreasing h; `lim` bounds the search.
inline double monotone_cap_point(const std::function<double(double)>& h,
                                 double dom_up, double cap) {
  const double lim = std::min(dom_up, 1e300);
  const double s0 = std::min(1.0, lim);
  if (!(h(s0) <= cap)) return s0;
  double lo = s0, hi = s0;
  bool exceeded = false;
  while (hi < lim) {
    hi = std::min(hi * 2.0, lim);
    if (h(hi) <= cap) {
      lo = hi;
    } else {
      exceeded = true;
      break;
    }
  }
  if (!exceeded) return lim;
  for (int i = 0; i < 160; ++i) {
    const double m = 0.5 * (lo + hi);
    if (h(m) <= cap) lo = m;
    else hi = m;
  }
  return lo;
}

// The derivative cap (1e45) is far above any value a conjugate derivative can
// take at a dual optimum (stationarity forces w_i (phi*)'(.) <= 1), yet small
// enough that products of stacked conjugate derivatives in composite
// subgradients cannot overflow.
inline void finalize(divergence& d) {
  d.s_overflow = monotone_cap_point(d.conj, d.conj_dom_upper, kOverflowCap);
  d.s_deriv_cap = monotone_cap_point(d.conj_deriv, d.conj_dom_upper, 1e45);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// numeric Legendre transforms
// ---------------------------------------------------------------------------

// phi(t) = sup_s { s t - phi*(s) }: golden-section on a derivative-informed
// bracket.  For t beyond the representable slope range the support-line value
// at the last representable slope is returned (a tight lower estimate used
// only deep in integrand tails).
inline double biconjugate_phi_raw(const std::function<double(double)>& conj,
                                  const std::function<double(double)>& conj_deriv,
                                  double conj_dom_upper, double s_deriv_cap,
                                  double t) {
  if (std::isnan(t)) return kNaN;
  if (t < 0.0) return kInf;
  const auto h = [&](double s) { return s * t - conj(s); };

  if (t == 0.0) {  // sup -phi*(s): monotone limit as s -> -inf
    double prev = -conj(-1.0);
    for (double s = -2.0; s > -1e60; s *= 2.0) {
      const double cur = -conj(s);
      if (!(cur > prev + 1e-14 * (1.0 + std::fabs(cur)))) return cur;
      prev = cur;
    }
    return kInf;
  }

  const double hi_lim = std::min(conj_dom_upper, s_deriv_cap);
  // upper bracket end: first s with slope >= t
  double shi = 1.0;
  bool reached = false;
  while (shi < hi_lim) {
    const double g = conj_deriv(shi);
    if (g >= t || !std::isfinite(g)) {
      reached = true;
      break;
    }
    shi = std::min(shi * 2.0, hi_lim);
  }
  if (!reached) {
    const double g_end = conj_deriv(shi * (1.0 - 1e-12));
    if (std::isfinite(g_end) && g_end < t) {
      if (std::isfinite(conj_dom_upper)) {
        const double v = h(conj_dom_upper);
        if (std::isfinite(v)) return v;  // boundary supremum (closed domain)
      } else {
        return h(s_deriv_cap);  // support-line estimate beyond overflow
      }
    }
  }
  // lower bracket end: slope below t
  double slo = -1.0;
  for (int k = 0; k < 80 && conj_deriv(slo) > t; ++k) slo *= 2.0;
  const auto neg_h = [&](double s) { return -h(s); };
  const min1d m = golden_min(neg_h, slo, shi, 1e-13, 260);
  return -m.fx;
}

inline double biconjugate_phi(const divergence& d, double t) {
  return biconjugate_phi_raw(d.conj, d.conj_deriv, d.conj_dom_upper, d.s_deriv_cap, t);
}

// phi*(s) = sup_{t in dom} { s t - phi(t) } for user-supplied phi.
inline double numeric_conjugate(const std::function<double(double)>& phi,
                                double dom_upper, double s) {
  const auto h = [&](double t) { return s * t - phi(t); };
  double thi = std::min(1.0, dom_upper);
  const double lim = std::min(dom_upper, 1e300);
  double best = std::max(h(0.0), h(thi));
  for (int k = 0; k < 1100 && thi < lim; ++k) {
    const double next = std::min(thi * 2.0, lim);
    if (h(next) >= best - 1e-12 * (1.0 + std::fabs(best))) {
      best = std::max(best, h(next));
      thi = next;
    } else {
      thi = next;
      break;
    }
  }
  const min1d m = golden_min([&](double t) { return -h(t); }, 0.0, thi, 1e-13, 260);
  return std::max(best, -m.fx);
}

// ---------------------------------------------------------------------------
// evaluation wrappers (documented conventions + error taxonomy)
// ---------------------------------------------------------------------------

inline double eval_phi(const divergence& d, double t) {
  if (std::isnan(t)) throw domain_error(d.id + ": phi argument is NaN");
  if (t < 0.0) return kInf;
  return d.phi(t);
}

inline double eval_conjugate(const divergence& d, double s) {
  if (std::isnan(s)) throw domain_error(d.id + ": conjugate argument is NaN");
  const double v = d.conj(s);
  return v > kOverflowCap ? kInf : v;
}

inline double eval_conjugate_deriv(const divergence& d, double s) {
  if (std::isnan(s)) throw domain_error(d.id + ": conjugate argument is NaN");
  if (s >= d.conj_dom_upper)
    throw domain_error(d.id + ": conjugate derivative undefined at s >= " +
                       std::to_string(d.conj_dom_upper));
  return d.conj_deriv(s);
}

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

inline divergence make_kl() {
  divergence d;
  d.id = "kl";
  d.phi = [](double t) {
    if (t < 0.0) return kInf;
    if (t == 0.0) return 1.0;
    return t * std::log(t) - t + 1.0;
  };
  d.conj = [](double s) { return std::expm1(s); };
  d.conj_deriv = [](double s) { return std::exp(s); };
  // phi(t)/t = ln t - 1 + 1/t
  d.log_support_slope = [](double lt) { return std::log(lt - 1.0); };
  detail::finalize(d);
  return d;
}

// KL scaled by 1/gamma; the phi1 of the entropic risk measure.
inline divergence make_scaled_kl(double gamma) {
  if (!(gamma > 0.0)) throw param_error("scaled-kl: gamma > 0 required");
  divergence d;
  d.id = "scaled-kl(gamma=" + std::to_string(gamma) + ")";
  d.phi = [gamma](double t) {
    if (t < 0.0) return kInf;
    if (t == 0.0) return 1.0 / gamma;
    return (t * std::log(t) - t + 1.0) / gamma;
  };
  d.conj = [gamma](double s) { return std::expm1(gamma * s) / gamma; };
  d.conj_deriv = [gamma](double s) { return std::exp(gamma * s); };
  // phi(t)/t = (ln t - 1 + 1/t) / gamma
  d.log_support_slope = [gamma](double lt) {
    return std::log((lt - 1.0) / gamma);
  };
  detail::finalize(d);
  return d;
}

inline divergence make_chi2() {
  divergence d;
  d.id = "chi2";
  d.phi = [](double t) {
    if (t <= 0.0) return kInf;
    const double u = t - 1.0;
    return u * u / t;
  };
  d.conj = [](double s) {
    if (s > 1.0) return kInf;
    return 2.0 - 2.0 * std::sqrt(1.0 - s);
  };
  d.conj_deriv = [](double s) {
    if (s >= 1.0) return kInf;
    return 1.0 / std::sqrt(1.0 - s);
  };
  d.conj_dom_upper = 1.0;
  detail::finalize(d);
  return d;
}

inline divergence make_modified_chi2() {
  divergence d;
  d.id = "modified-chi2";
  d.phi = [](double t) {
    if (t < 0.0) return kInf;
    const double u = t - 1.0;
    return u * u;
  };
  d.conj = [](double s) { return s < -2.0 ? -1.0 : s + 0.25 * s * s; };
  d.conj_deriv = [](double s) { return s < -2.0 ? 0.0 : 1.0 + 0.5 * s; };
  // phi(t)/t = (t-1)^2 / t -> t for large t
  d.log_support_slope = [](double lt) { return lt; };
  detail::finalize(d);
  return d;
}

inline divergence make_burg() {
  divergence d;
  d.id = "burg";
  d.phi = [](double t) {
    if (t <= 0.0) return kInf;
    return -std::log(t) + t - 1.0;
  };
  d.conj = [](double s) { return s < 1.0 ? -std::log1p(-s) : kInf; };
  d.conj_deriv = [](double s) { return s < 1.0 ? 1.0 / (1.0 - s) : kInf; };
  d.conj_dom_upper = 1.0;
  detail::finalize(d);
  return d;
}

inline divergence make_tv() {
  divergence d;
  d.id = "tv";
  d.phi = [](double t) { return t < 0.0 ? kInf : std::fabs(t - 1.0); };
  d.conj = [](double s) {
    if (s > 1.0) return kInf;
    return s < -1.0 ? -1.0 : s;
  };
  d.conj_deriv = [](double s) {
    if (s > 1.0) return kInf;
    return s < -1.0 ? 0.0 : 1.0;
  };
  d.conj_dom_upper = 1.0;
  detail::finalize(d);
  return d;
}

// Indicator of [0, 1/(1-alpha)]; the phi1 whose OCE is CVaR at level alpha.
inline divergence make_cvar_indicator(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw param_error("cvar-indicator: alpha in (0,1) required");
  const double c = 1.0 / (1.0 - alpha);
  divergence d;
  d.id = "cvar-indicator(alpha=" + std::to_string(alpha) + ")";
  d.phi = [c](double t) { return (t >= 0.0 && t <= c) ? 0.0 : kInf; };
  d.conj = [c](double s) { return s > 0.0 ? c * s : 0.0; };
  d.conj_deriv = [c](double s) { return s >= 0.0 ? c : 0.0; };
  d.dom_upper = c;
  d.y0 = 0.5 * (1.0 + c);
  d.conj_slope_neg0 = 0.0;
  d.conj_slope_pos0 = c;
  detail::finalize(d);
  return d;
}

// (t^p - p(t-1) - 1) / (p(p-1)) for p > 0, p != 1.
inline divergence make_polynomial(double p) {
  if (!(p > 0.0) || p == 1.0)
    throw param_error("polynomial: p > 0, p != 1 required");
  divergence d;
  d.id = "polynomial(p=" + std::to_string(p) + ")";
  d.phi = [p](double t) {
    if (t < 0.0) return kInf;
    if (t == 0.0) return 1.0 / p;
    return (std::pow(t, p) - p * (t - 1.0) - 1.0) / (p * (p - 1.0));
  };
  const double q = p / (p - 1.0);
  d.conj = [p, q](double s) {
    const double z = 1.0 + s * (p - 1.0);
    if (z <= 0.0) return p > 1.0 ? -1.0 / p : kInf;
    const double v = (std::pow(z, q) - 1.0) / p;
    return v;
  };
  d.conj_deriv = [p](double s) {
    const double z = 1.0 + s * (p - 1.0);
    if (z <= 0.0) return p > 1.0 ? 0.0 : kInf;
    return std::pow(z, 1.0 / (p - 1.0));
  };
  d.conj_dom_upper = p > 1.0 ? kInf : 1.0 / (1.0 - p);
  if (p > 1.0) {
    // phi(t)/t -> t^{p-1} / (p(p-1)) for large t
    d.log_support_slope = [p](double lt) {
      return (p - 1.0) * lt - std::log(p * (p - 1.0));
    };
  }
  detail::finalize(d);
  return d;
}

// Indicator of {1}: phi* = identity.  Collapses the outer layer of the
// composite dual; useful for consistency checks.
inline divergence make_degenerate() {
  divergence d;
  d.id = "degenerate";
  d.phi = [](double t) { return std::fabs(t - 1.0) <= 1e-12 ? 0.0 : kInf; };
  d.conj = [](double s) { return s; };
  d.conj_deriv = [](double) { return 1.0; };
  d.dom_upper = 1.0;
  d.x0 = 1.0;
  d.y0 = 1.0;
  detail::finalize(d);
  return d;
}

// User-supplied phi with numeric conjugate (golden-section in t) and a
// right-sided Richardson finite difference for the conjugate derivative.
inline divergence make_custom(std::string id, std::function<double(double)> phi,
                              double dom_upper = kInf) {
  divergence d;
  d.id = std::move(id);
  d.phi = phi;
  d.dom_upper = dom_upper;
  d.conj = [phi, dom_upper](double s) {
    return numeric_conjugate(phi, dom_upper, s);
  };
  auto conj = d.conj;
  d.conj_deriv = [conj](double s) {
    const double h = 1e-6 * (1.0 + std::fabs(s));
    const double d1 = (conj(s + h) - conj(s)) / h;
    const double d2 = (conj(s + 0.5 * h) - conj(s)) / (0.5 * h);
    return 2.0 * d2 - d1;
  };
  if (dom_upper == kInf) {
    // conj domain supremum = lim phi(t)/t, estimated from doubling slopes
    double slope_prev = phi(1024.0) / 1024.0, slope = phi(2048.0) / 2048.0;
    for (double t = 4096.0; t < 1e100; t *= 2.0) {
      slope_prev = slope;
      slope = phi(t) / t;
      if (!std::isfinite(slope)) break;
      if (slope - slope_prev < 1e-10 * (1.0 + std::fabs(slope))) {
        d.conj_dom_upper = slope;
        break;
      }
    }
  }
  detail::finalize(d);
  return d;
}

// ---------------------------------------------------------------------------
// divergence value I_phi(g f_ref, f f_ref) = \int phi(g/f) f dx on (lo, hi)
// ---------------------------------------------------------------------------
//
// Ratio conventions: 0 phi(0/0) = 0 and 0 phi(a/0) = a lim phi(t)/t.  Log
// densities, when given, extend the evaluation to regions where the plain
// densities underflow.  NaN / negative densities raise quadrature_error.

inline quad_result divergence_value(
    const divergence& d, const std::function<double(double)>& g,
    const std::function<double(double)>& f, double lo, double hi,
    const std::function<double(double)>& log_g = nullptr,
    const std::function<double(double)>& log_f = nullptr,
    double abs_tol = 1e-10, double rel_tol = 1e-9) {
  const bool have_logs = static_cast<bool>(log_g) && static_cast<bool>(log_f);
  const auto phi_of = [&](double t) {
    return d.closed_phi ? d.phi(t) : biconjugate_phi(d, t);
  };
  const auto integrand = [&](double x) -> double {
    const double fv = f(x), gv = g(x);
    if (std::isnan(fv) || std::isnan(gv) || fv < 0.0 || gv < 0.0) return kNaN;
    if (!have_logs) {
      if (fv == 0.0) {
        if (gv == 0.0) return 0.0;
        return d.conj_dom_upper < kInf ? gv * d.conj_dom_upper : kInf;
      }
      const double t = gv / fv;
      if (!std::isfinite(t)) return kInf;
      const double v = phi_of(t);
      return std::isfinite(v) ? v * fv : kInf;
    }
    const double lg = log_g(x), lf = log_f(x);
    if (lf == -kInf) {
      if (lg == -kInf) return 0.0;
      return d.conj_dom_upper < kInf ? std::exp(lg) * d.conj_dom_upper : kInf;
    }
    const double lt = lg - lf;
    if (lt > 690.0) {
      // ratio beyond double range: support-line integrand phi(t)/t * g
      if (d.dom_upper < kInf) return kInf;  // the ratio left dom(phi)
      if (d.log_support_slope) return std::exp(d.log_support_slope(lt) + lg);
      const double slope = std::isfinite(d.conj_dom_upper) ? d.conj_dom_upper
                                                           : d.s_deriv_cap;
      return slope * std::exp(lg);
    }
    const double t = std::exp(lt);
    const double v = phi_of(t);
    if (!std::isfinite(v)) return kInf;
    if (v <= 0.0) return fv > 0.0 ? v * fv : 0.0;
    return std::exp(std::log(v) + lf);
  };
  quad_result r = integrate_improper(integrand, lo, hi, abs_tol, rel_tol);
  if (std::isnan(r.value))
    throw quadrature_error(d.id + ": divergence integrand invalid (" + r.note + ")");
  return r;
}

}  // namespace phirisk
