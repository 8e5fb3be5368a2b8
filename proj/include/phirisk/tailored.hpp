#pragma once

// Construction of outer divergences from a prescribed convex tail function.
// Given a convex, increasing, twice-differentiable psi on [0, inf) with
// psi''(0) > 0, the normalized conjugate
//
//   conj(s) = c1*psi(s) + c2*s + c3        for s >= 0,   with
//   c1 = 1/psi''(0),  c2 = 1 - psi'(0)*c1,  c3 = -psi(0)*c1,
//
// spliced with exp(s)-1 for s <= 0, satisfies conj(0) = 0, conj'(0) = 1 and
// is convex and C^1 at the splice, so it is a valid divergence conjugate whose
// growth for large s matches psi.  The divergence itself is recovered by
// numeric biconjugation.

#include <cmath>
#include <string>
#include <vector>

#include "divergence.hpp"
#include "math.hpp"

namespace phirisk {

struct tail_spec {
  std::function<double(double)> psi;   // required, defined on s >= 0
  std::function<double(double)> dpsi;  // optional analytic derivative
  // optional analytic values at s = 0 (NaN -> finite differences)
  double psi0 = kNaN;
  double dpsi0 = kNaN;
  double ddpsi0 = kNaN;
  // optional: ln psi(e^{ls}) as a function of ls = ln s, computable for any
  // ls >= 0 even where psi itself overflows; enables the divergence's support
  // slope phi(t)/t to be evaluated at ratios t beyond double range
  std::function<double(double)> log_psi_at_log;
};

inline divergence construct_from_tail(const std::string& id, tail_spec tail) {
  if (!tail.psi) throw construction_error(id + ": tail function is required");

  std::function<double(double)> psi = tail.psi;
  std::function<double(double)> dpsi = tail.dpsi;
  if (!dpsi) {
    dpsi = [psi](double s) {
      const double h = 1e-6 * (1.0 + std::abs(s));
      // one-sided Richardson so s = 0 never leaves the domain
      const double d1 = (psi(s + h) - psi(s)) / h;
      const double d2 = (psi(s + h / 2) - psi(s)) / (h / 2);
      return 2.0 * d2 - d1;
    };
  }

  const double psi0 = std::isnan(tail.psi0) ? psi(0.0) : tail.psi0;
  const double dpsi0 = std::isnan(tail.dpsi0) ? dpsi(0.0) : tail.dpsi0;
  double ddpsi0 = tail.ddpsi0;
  if (std::isnan(ddpsi0)) {
    const double h = 1e-5;
    const double d1 = (dpsi(h) - dpsi0) / h;
    const double d2 = (dpsi(h / 2) - dpsi0) / (h / 2);
    ddpsi0 = 2.0 * d2 - d1;
  }
  if (!std::isfinite(psi0) || !std::isfinite(dpsi0) || !std::isfinite(ddpsi0))
    throw construction_error(id + ": tail moments at 0 are not finite");
  if (ddpsi0 <= 1e-14)
    throw construction_error(id + ": psi''(0) must be strictly positive");

  // convexity / monotonicity probe of the tail on a coarse grid
  {
    const double grid[] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    double prev_d = -kInf;
    for (double s : grid) {
      const double ds = dpsi(s);
      if (!std::isfinite(ds)) break;  // tail may overflow far out; that is fine
      if (ds <= 0.0)
        throw construction_error(id + ": tail is not increasing at s=" + std::to_string(s));
      if (ds < prev_d * (1.0 - 1e-9))
        throw construction_error(id + ": tail derivative decreases at s=" + std::to_string(s));
      prev_d = ds;
    }
  }

  const double c1 = 1.0 / ddpsi0;
  const double c2 = 1.0 - dpsi0 * c1;
  const double c3 = -psi0 * c1;

  divergence d;
  d.id = id;
  d.dom_upper = kInf;
  d.conj_dom_upper = kInf;
  d.x0 = 0.5;
  d.y0 = 2.0;
  d.conj_slope_neg0 = 1.0;
  d.conj_slope_pos0 = 1.0;
  d.closed_phi = false;  // phi is itself a numeric biconjugate
  d.conj = [psi, c1, c2, c3](double s) {
    if (s <= 0.0) return std::expm1(s);
    const double v = c1 * psi(s) + c2 * s + c3;
    return std::isnan(v) ? kInf : v;  // treat overflow artifacts as +inf
  };
  d.conj_deriv = [dpsi, c1, c2](double s) {
    if (s <= 0.0) return std::exp(s);
    const double v = c1 * dpsi(s) + c2;
    return std::isnan(v) ? kInf : v;
  };
  detail::finalize(d);
  d.phi = [conj = d.conj, cd = d.conj_deriv, up = d.conj_dom_upper,
           cap = d.s_deriv_cap](double t) {
    return biconjugate_phi_raw(conj, cd, up, cap, t);
  };
  return d;
}

// --- catalog tail families -------------------------------------------------

// Tail matching the generalized-lognormal / CVaR pairing:
//   psi(s) = (s + e) * exp(a * log(s + e)^p),   a = 1 / (p * (sigma * d)^p).
inline divergence make_gl_cvar(double sigma, double p, double d_ord) {
  if (!(sigma > 0.0)) throw param_error("gl-cvar: sigma must be positive");
  if (!(p > 1.0)) throw param_error("gl-cvar: p must exceed 1");
  if (!(d_ord >= 1.0)) throw param_error("gl-cvar: d must be at least 1");
  const double a = 1.0 / (p * std::pow(sigma * d_ord, p));
  tail_spec tail;
  tail.psi = [a, p](double s) {
    const double l = std::log(s + std::exp(1.0));
    return (s + std::exp(1.0)) * std::exp(a * std::pow(l, p));
  };
  tail.dpsi = [a, p](double s) {
    const double l = std::log(s + std::exp(1.0));
    return std::exp(a * std::pow(l, p)) * (1.0 + a * p * std::pow(l, p - 1.0));
  };
  tail.psi0 = std::exp(a + 1.0);
  tail.dpsi0 = std::exp(a) * (1.0 + a * p);
  tail.ddpsi0 = p * p * (a * a + a) * std::exp(a - 1.0);
  return construct_from_tail("gl-cvar(sigma=" + std::to_string(sigma) +
                                 ",p=" + std::to_string(p) +
                                 ",d=" + std::to_string(d_ord) + ")",
                             std::move(tail));
}

// Tail matching the Weibull / power-utility pairing:
//   psi(s) = (s + 1) * exp((s + 1)^p),   p = k / d.
inline divergence make_weibull_power(double k, double d_ord) {
  if (!(k > 0.0)) throw param_error("weibull-power: k must be positive");
  if (!(d_ord >= 1.0)) throw param_error("weibull-power: d must be at least 1");
  const double p = k / d_ord;
  tail_spec tail;
  tail.psi = [p](double s) { return (s + 1.0) * std::exp(std::pow(s + 1.0, p)); };
  tail.dpsi = [p](double s) {
    return std::exp(std::pow(s + 1.0, p)) * (1.0 + p * std::pow(s + 1.0, p));
  };
  tail.psi0 = std::exp(1.0);
  tail.dpsi0 = std::exp(1.0) * (1.0 + p);
  tail.ddpsi0 = p * std::exp(1.0) * (2.0 * p + 1.0);
  return construct_from_tail("weibull-power(k=" + std::to_string(k) +
                                 ",d=" + std::to_string(d_ord) + ")",
                             std::move(tail));
}

// Tail matching the Weibull / entropic pairing:
//   psi(s) = (s + e) * exp(a * log(s + e)^k),   a = 1 / (2 * gamma * lambda)^k.
inline divergence make_entropic_weibull(double gamma, double lambda, double k) {
  if (!(gamma > 0.0)) throw param_error("entropic-weibull: gamma must be positive");
  if (!(lambda > 0.0)) throw param_error("entropic-weibull: lambda must be positive");
  if (!(k > 1.0)) throw param_error("entropic-weibull: k must exceed 1");
  const double a = std::pow(2.0 * gamma * lambda, -k);
  tail_spec tail;
  tail.psi = [a, k](double s) {
    const double l = std::log(s + std::exp(1.0));
    return (s + std::exp(1.0)) * std::exp(a * std::pow(l, k));
  };
  tail.dpsi = [a, k](double s) {
    const double l = std::log(s + std::exp(1.0));
    return std::exp(a * std::pow(l, k)) * (1.0 + a * k * std::pow(l, k - 1.0));
  };
  tail.psi0 = std::exp(a + 1.0);
  tail.dpsi0 = std::exp(a) * (1.0 + a * k);
  tail.ddpsi0 = k * k * (a * a + a) * std::exp(a - 1.0);
  return construct_from_tail("entropic-weibull(gamma=" + std::to_string(gamma) +
                                 ",lambda=" + std::to_string(lambda) +
                                 ",k=" + std::to_string(k) + ")",
                             std::move(tail));
}

// --- registry --------------------------------------------------------------

inline std::vector<std::string> divergence_catalog() {
  return {"kl",
          "scaled-kl(gamma)",
          "chi2",
          "modified-chi2",
          "burg",
          "tv",
          "cvar-indicator(alpha)",
          "polynomial(p)",
          "degenerate",
          "gl-cvar(sigma,p,d)",
          "weibull-power(k,d)",
          "entropic-weibull(gamma,lambda,k)"};
}

inline divergence divergence_from_spec(const std::string& spec) {
  call_spec c = parse_call(spec);
  for (char& ch : c.name)
    if (ch == '_') ch = '-';  // accept underscore spellings from config files
  if (c.name == "kl") return make_kl();
  if (c.name == "scaled-kl") return make_scaled_kl(c.get("gamma", 0));
  if (c.name == "chi2") return make_chi2();
  if (c.name == "modified-chi2") return make_modified_chi2();
  if (c.name == "burg") return make_burg();
  if (c.name == "tv") return make_tv();
  if (c.name == "cvar-indicator") return make_cvar_indicator(c.get("alpha", 0));
  if (c.name == "polynomial") return make_polynomial(c.get("p", 0));
  if (c.name == "degenerate") return make_degenerate();
  if (c.name == "gl-cvar")
    return make_gl_cvar(c.get("sigma", 0), c.get("p", 1), c.get("d", 2));
  if (c.name == "weibull-power") return make_weibull_power(c.get("k", 0), c.get("d", 1));
  if (c.name == "entropic-weibull")
    return make_entropic_weibull(c.get("gamma", 0), c.get("lambda", 1), c.get("k", 2));
  throw param_error("unknown divergence '" + c.name + "'");
}

}  // namespace phirisk
