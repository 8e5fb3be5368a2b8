#pragma once

// Finite-dimensional duals of the composite robust risk measures and their
// solvers.  Forms:
//
//   penalty     inf_{t1,t2}          -t1-t2      + E[phi2*(phi1*(t2-X)+t1)]
//   ball        inf_{t1,t2,l>=0}     -t1-t2+l r  + E[l phi2*((phi1*(t2-X)+t1)/l)]
//   globalized  inf_{t1,t2,t3,l>=0}  -t1-t2-t3+l r
//                                    + E[l phi3*((phi2*(phi1*(t3-X)+t2)+t1)/l)]
//   shortfall-penalty  inf{ t2 : exists t1,  E[phi2*(phi1*(-t2-X)+t1)] <= t1 }
//   shortfall-ball     inf{ t2 : exists t1, eta>=0,
//                             E[eta phi2*((phi1*(-t2-X)+t1)/eta)] <= t1 - eta r }
//
// The lambda >= 0 boundary uses the perspective convention 0 phi*(s/0) = 0 for
// s <= 0 and +inf otherwise; its closed-form branch value is max_i(-X_i).  At
// r = 0 the optimal lambda escapes to +infinity, so a recession branch replaces
// l phi2*(u/l) by its limit  slope+(phi2*) max(u,0) + slope-(phi2*) min(u,0).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "divergence.hpp"
#include "ellipsoid.hpp"
#include "math.hpp"
#include "nominal.hpp"
#include "risk.hpp"

namespace phirisk {

enum class dual_form { penalty, ball, globalized, shortfall_penalty, shortfall_ball };

inline dual_form form_from_string(const std::string& s) {
  if (s == "penalty") return dual_form::penalty;
  if (s == "ball") return dual_form::ball;
  if (s == "globalized") return dual_form::globalized;
  if (s == "shortfall-penalty") return dual_form::shortfall_penalty;
  if (s == "shortfall-ball") return dual_form::shortfall_ball;
  throw param_error("unknown dual form '" + s + "'");
}

inline std::string form_to_string(dual_form f) {
  switch (f) {
    case dual_form::penalty: return "penalty";
    case dual_form::ball: return "ball";
    case dual_form::globalized: return "globalized";
    case dual_form::shortfall_penalty: return "shortfall-penalty";
    case dual_form::shortfall_ball: return "shortfall-ball";
  }
  return "?";
}

struct robust_problem {
  dual_form form = dual_form::penalty;
  divergence phi1;
  divergence phi2;
  divergence phi3;     // globalized only
  double radius = kNaN;  // ball / globalized / shortfall-ball
};

inline bool form_has_radius(dual_form f) {
  return f == dual_form::ball || f == dual_form::globalized ||
         f == dual_form::shortfall_ball;
}

inline bool form_has_lambda(dual_form f) {
  return f == dual_form::ball || f == dual_form::globalized;
}

inline void validate(const robust_problem& p) {
  if (!p.phi1.conj || !p.phi2.conj) throw param_error("problem needs phi1 and phi2");
  if (form_has_radius(p.form)) {
    if (!(p.radius >= 0.0))
      throw param_error(form_to_string(p.form) + " form needs radius >= 0");
  } else if (!std::isnan(p.radius)) {
    throw param_error(form_to_string(p.form) + " form takes no radius");
  }
  if ((p.form == dual_form::globalized) != static_cast<bool>(p.phi3.conj))
    throw param_error("phi3 must be present exactly for the globalized form");
}

struct solver_options {
  double tol = 1e-7;
  long max_iter = 200000;
  double lambda_floor = 1e-10;
  double box_pad = 2.0;
};

struct search_box {
  std::vector<double> lo, hi;  // [t1, t2(, t3)(, lambda)] — lambda last
  bool fallback = false;       // true when the default box replaced the bounds
};

struct dual_solution {
  double value = kNaN;
  std::vector<double> theta;  // t1, t2 (, t3)
  double lambda = kNaN;       // ball/globalized lambda, shortfall-ball eta
  long iterations = 0;
  double certified_gap = kInf;
  bool converged = false;
  std::string branch;  // "interior" | "lambda0" | "recession" | "bisection"
  search_box box;
  std::vector<double> wc_outer;  // g*  (middle layer for globalized)
  std::vector<double> wc_inner;  // gbar*
  std::vector<double> wc_base;   // globalized base layer
};

namespace detail {

// Largest conjugate argument the solvers feed to a divergence: below the value
// overflow cap, below the derivative cap, and (for bounded conjugate domains)
// strictly inside the domain so one-sided derivatives stay finite.
inline double cut_point(const divergence& d) {
  double s = std::min(d.s_overflow, d.s_deriv_cap);
  if (std::isfinite(d.conj_dom_upper)) {
    const double shell = 1e-9 * std::max(1.0, std::fabs(d.conj_dom_upper));
    s = std::min(s, d.conj_dom_upper - shell);
  }
  return s;
}

struct oracle_scratch {
  std::vector<double> terms;
};

// mode for the OCE-form oracles
enum class oracle_mode { interior, recession };

// Shared objective/subgradient oracle for penalty, ball, globalized.
// Variable layout: penalty (t1,t2); ball (t1,t2,l); globalized (t1,t2,t3,l).
// In recession mode the lambda coordinate is absent.
inline cut_info oce_dual_eval(const robust_problem& p, const sample_set& data,
                              const double* y, oracle_mode mode,
                              oracle_scratch& scratch) {
  const bool glob = p.form == dual_form::globalized;
  const divergence& outer = glob ? p.phi3 : p.phi2;
  const double c1 = cut_point(p.phi1);
  const double c2 = cut_point(p.phi2);
  const double c3 = glob ? cut_point(p.phi3) : kNaN;
  const double couter = glob ? c3 : c2;
  const int nth = glob ? 3 : 2;
  const bool recession = mode == oracle_mode::recession;
  // penalty has no lambda coordinate: its outer conjugate is evaluated at
  // scale 1, and y[nth] would read past the caller's 2-vector
  const double lam =
      recession ? kNaN : (form_has_lambda(p.form) ? y[nth] : 1.0);
  const double r = form_has_radius(p.form) ? p.radius : 0.0;

  const std::size_t n = data.values.size();
  scratch.terms.resize(n);
  cut_info out;
  double g1 = 0.0, g2 = 0.0, g3 = 0.0, gl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = data.weights[i];
    const double s1 = y[nth - 1] - data.values[i];  // innermost theta minus X
    if (s1 > c1) {
      out.is_cut = true;
      out.g.fill(0.0);
      out.g[static_cast<std::size_t>(nth - 1)] = 1.0;
      out.margin = s1 - c1;
      return out;
    }
    const double a1 = p.phi1.conj(s1);
    const double d1 = p.phi1.conj_deriv(s1);
    double v, dv_dt1, dv_dt2, dv_dt3 = 0.0;  // per-sample value and derivatives
    double u;                                // argument entering the outer layer
    double d2 = 1.0;
    if (glob) {
      const double s2 = a1 + y[1];
      if (s2 > c2) {
        out.is_cut = true;
        out.g.fill(0.0);
        out.g[1] = 1.0;
        out.g[2] = d1;
        out.margin = s2 - c2;
        return out;
      }
      d2 = p.phi2.conj_deriv(s2);
      u = p.phi2.conj(s2) + y[0];
    } else {
      u = a1 + y[0];
    }
    if (recession) {
      const double sp = outer.conj_slope_pos0, sn = outer.conj_slope_neg0;
      const double slope = u >= 0.0 ? sp : sn;  // right-subgradient at 0
      v = slope * u;
      dv_dt1 = slope;
      dv_dt2 = glob ? slope * d2 : slope * d1;
      if (glob) dv_dt3 = slope * d2 * d1;
    } else {
      const double m = u / lam;
      if (m > couter) {
        out.is_cut = true;
        out.g.fill(0.0);
        out.g[0] = 1.0;
        if (glob) {
          out.g[1] = d2;
          out.g[2] = d2 * d1;
        } else {
          out.g[1] = d1;
        }
        out.g[static_cast<std::size_t>(nth)] = -couter;
        out.margin = u - couter * lam;
        return out;
      }
      const double t = outer.conj(m);
      const double dt = outer.conj_deriv(m);
      v = lam * t;
      dv_dt1 = dt;
      dv_dt2 = glob ? dt * d2 : dt * d1;
      if (glob) dv_dt3 = dt * d2 * d1;
      gl += w * (t - m * dt);
    }
    scratch.terms[i] = w * v;
    g1 += w * dv_dt1;
    g2 += w * dv_dt2;
    g3 += w * dv_dt3;
  }
  double value = pairwise_sum(scratch.terms.data(), n);
  for (int k = 0; k < nth; ++k) value -= y[k];
  out.g[0] = -1.0 + g1;
  out.g[1] = -1.0 + g2;
  if (glob) out.g[2] = -1.0 + g3;
  if (!recession) {
    value += lam * r;
    out.g[static_cast<std::size_t>(nth)] = r + gl;
  }
  out.value = value;
  if (std::isnan(value)) {
    out.value = kInf;
    out.is_cut = true;  // defensive: should not happen inside the cut region
    out.g.fill(0.0);
    out.g[0] = 1.0;
    out.margin = 0.0;
  }
  return out;
}

}  // namespace detail

// Public objective/subgradient evaluator (penalty: point = (t1,t2); ball:
// (t1,t2,lambda); globalized: (t1,t2,t3,lambda)).  +inf points report a
// separating cut instead of a subgradient.
struct dual_eval {
  double value = kInf;
  std::vector<double> subgradient;
  bool is_cut = false;
  double margin = 0.0;
};

inline dual_eval dual_objective(const robust_problem& p, const sample_set& data,
                                const std::vector<double>& point) {
  validate(p);
  if (p.form == dual_form::shortfall_penalty || p.form == dual_form::shortfall_ball)
    throw param_error("dual_objective: shortfall forms are constraint-based; "
                      "use solve()");
  const std::size_t want =
      (p.form == dual_form::globalized ? 4u : p.form == dual_form::ball ? 3u : 2u);
  if (point.size() != want)
    throw param_error("dual_objective: expected " + std::to_string(want) +
                      " coordinates");
  if (form_has_lambda(p.form) && !(point.back() > 0.0))
    throw param_error("dual_objective: lambda must be positive (the lambda=0 "
                      "branch is handled in closed form by solve())");
  detail::oracle_scratch scratch;
  const cut_info c = detail::oce_dual_eval(p, data, point.data(),
                                           detail::oracle_mode::interior, scratch);
  dual_eval out;
  out.is_cut = c.is_cut;
  out.margin = c.margin;
  out.value = c.is_cut ? kInf : c.value;
  out.subgradient.assign(c.g.begin(), c.g.begin() + static_cast<long>(want));
  return out;
}

// ---------------------------------------------------------------------------
// compactness bounds (search box)
// ---------------------------------------------------------------------------

namespace detail {

struct interval {
  double lo, hi;
  bool ok;
};

// pad an interval about its center and make sure it is a genuine box edge
inline void pad_interval(double& lo, double& hi, double pad, double fb_scale) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    lo = -1e4 * fb_scale;
    hi = 1e4 * fb_scale;
    return;
  }
  lo = std::min(lo, -1.0);  // containing 0 costs little and helps degenerate data
  hi = std::max(hi, 1.0);
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  lo = c - pad * h;
  hi = c + pad * h;
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
}

// theta interval of the form [ (phi(x0) + x0 E + K) / (x0 - 1),
//                              (phi(y0) + y0 E + K) / (y0 - 1) ]
// used for the innermost theta; `philo`/`phihi` are phi(x0)/phi(y0).
inline interval anchor_interval(double x0, double y0, double philo, double phihi,
                                double ebar, double kref) {
  if (!(x0 < 1.0 && 1.0 < y0) || !std::isfinite(philo) || !std::isfinite(phihi))
    return {0.0, 0.0, false};
  const double lo = (philo + x0 * ebar + kref) / (x0 - 1.0);
  const double hi = (phihi + y0 * ebar + kref) / (y0 - 1.0);
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) return {0.0, 0.0, false};
  return {lo, hi, true};
}

// theta interval for an outer layer given the accumulated bound L on the inner
// thetas: [ ((x0+1)L + x0 E + phi(x0) + K)/(x0-1), ... ]
inline interval layered_interval(double x0, double y0, double philo, double phihi,
                                 double lsum, double ebar, double kref) {
  if (!(x0 < 1.0 && 1.0 < y0) || !std::isfinite(philo) || !std::isfinite(phihi))
    return {0.0, 0.0, false};
  const double lo = ((x0 + 1.0) * lsum + x0 * ebar + philo + kref) / (x0 - 1.0);
  const double hi = ((y0 + 1.0) * lsum + y0 * ebar + phihi + kref) / (y0 - 1.0);
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) return {0.0, 0.0, false};
  return {lo, hi, true};
}

inline double phi_at(const divergence& d, double t) { return d.phi(t); }

}  // namespace detail

inline search_box compactness_bounds(const robust_problem& p, const sample_set& data,
                                     const solver_options& opts = {}) {
  validate(p);
  const bool glob = p.form == dual_form::globalized;
  const bool has_lam = form_has_lambda(p.form);
  const int nth = glob ? 3 : 2;
  const std::size_t n = data.values.size();
  if (n == 0) throw param_error("compactness_bounds: empty sample set");

  std::vector<double> wx(n);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    wx[i] = data.weights[i] * data.values[i];
    scale = std::max(scale, std::fabs(data.values[i]));
  }
  const double ebar = pairwise_sum(wx.data(), n);  // E[X] (payoff mean)

  // reference value K*: best finite dual value over a coarse probe grid
  // (lambda fixed at 1 for the lambda forms)
  detail::oracle_scratch scratch;
  double kref = kInf;
  const double probes[] = {0.0, 1.0, -1.0, 5.0, -5.0, 25.0, -25.0};
  std::array<double, 4> y{};
  for (double a : probes) {
    for (double b : probes) {
      const int cmax = glob ? 7 : 1;
      for (int ci = 0; ci < cmax; ++ci) {
        y[0] = a;
        y[1] = b;
        if (glob) {
          y[2] = probes[ci];
          y[3] = 1.0;
        } else {
          y[2] = 1.0;
        }
        const cut_info e = detail::oce_dual_eval(
            p, data, y.data(), detail::oracle_mode::interior, scratch);
        if (!e.is_cut && std::isfinite(e.value)) kref = std::min(kref, e.value);
      }
    }
  }

  search_box box;
  box.lo.assign(static_cast<std::size_t>(nth) + (has_lam ? 1 : 0), 0.0);
  box.hi = box.lo;

  bool ok = std::isfinite(kref);
  // innermost theta (theta2 for 2-var forms, theta3 for globalized): phi1 anchors
  detail::interval inner{0, 0, false};
  if (ok) {
    inner = detail::anchor_interval(p.phi1.x0, p.phi1.y0,
                                    detail::phi_at(p.phi1, p.phi1.x0),
                                    detail::phi_at(p.phi1, p.phi1.y0), ebar, kref);
    ok = inner.ok;
  }
  double lam_max = kNaN;
  if (has_lam && ok) {
    if (p.radius > 0.0) {
      lam_max = (kref + ebar) / p.radius;
      if (!(lam_max > 0.0) || !std::isfinite(lam_max))
        lam_max = 10.0 * opts.lambda_floor;
      lam_max *= opts.box_pad;
    } else {
      lam_max = 10.0 * opts.lambda_floor;  // recession branch handles r = 0
    }
  }

  detail::interval mid{0, 0, false};
  detail::interval first{0, 0, false};
  if (ok) {
    double lo_in = inner.lo, hi_in = inner.hi;
    detail::pad_interval(lo_in, hi_in, opts.box_pad, scale);
    const double l_in = std::max(std::fabs(lo_in), std::fabs(hi_in));
    double lsum = l_in;
    if (glob) {
      mid = detail::layered_interval(p.phi2.x0, p.phi2.y0,
                                     detail::phi_at(p.phi2, p.phi2.x0),
                                     detail::phi_at(p.phi2, p.phi2.y0), l_in, ebar,
                                     kref);
      if (mid.ok) {
        double lo_m = mid.lo, hi_m = mid.hi;
        detail::pad_interval(lo_m, hi_m, opts.box_pad, scale);
        lsum = l_in + std::max(std::fabs(lo_m), std::fabs(hi_m));
        mid.lo = lo_m;
        mid.hi = hi_m;
      } else {
        ok = false;
      }
    }
    if (ok) {
      const divergence& outer = glob ? p.phi3 : p.phi2;
      // with lambda restricted to [0, L], the outer phi is scaled by L
      const double lam_scale = has_lam && std::isfinite(lam_max)
                                   ? std::max(lam_max, opts.lambda_floor)
                                   : 1.0;
      first = detail::layered_interval(
          outer.x0, outer.y0, lam_scale * detail::phi_at(outer, outer.x0),
          lam_scale * detail::phi_at(outer, outer.y0), lsum, ebar, kref);
      ok = first.ok;
      if (ok) detail::pad_interval(first.lo, first.hi, opts.box_pad, scale);
    }
    if (ok) {
      box.lo[0] = first.lo;
      box.hi[0] = first.hi;
      if (glob) {
        box.lo[1] = mid.lo;
        box.hi[1] = mid.hi;
        box.lo[2] = lo_in;
        box.hi[2] = hi_in;
      } else {
        box.lo[1] = lo_in;
        box.hi[1] = hi_in;
      }
    }
  }
  if (!ok) {
    box.fallback = true;
    for (int k = 0; k < nth; ++k) {
      box.lo[static_cast<std::size_t>(k)] = -1e4 * scale;
      box.hi[static_cast<std::size_t>(k)] = 1e4 * scale;
    }
    if (has_lam) lam_max = 1e4 * scale;
  }
  if (has_lam) {
    box.lo.back() = opts.lambda_floor;
    box.hi.back() = std::max(std::isfinite(lam_max) ? lam_max : 1e4 * scale,
                             2.0 * opts.lambda_floor);
  }
  return box;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

namespace detail {

inline double max_neg_payoff(const sample_set& data) {
  double m = -kInf;
  for (double x : data.values) m = std::max(m, -x);
  return m;
}

// shortfall feasibility margin h(theta2) (<= 0 means theta2 feasible) and the
// certifying (theta1, eta) point
struct shortfall_inner {
  double margin = kInf;
  double theta1 = 0.0;
  double eta = kNaN;
  long iterations = 0;
};

inline shortfall_inner shortfall_margin(const robust_problem& p,
                                        const sample_set& data, double theta2,
                                        const solver_options& opts) {
  const std::size_t n = data.values.size();
  std::vector<double> a(n), terms(n);
  double amax = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = eval_conjugate(p.phi1, -theta2 - data.values[i]);
    amax = std::max(amax, a[i]);
  }
  shortfall_inner out;
  if (p.form == dual_form::shortfall_ball) {
    // eta = 0 convention branch: feasible iff max_i phi1*(-t2 - X_i) <= 0
    out.margin = amax;
    out.theta1 = 0.0;
    out.eta = 0.0;
  }
  if (amax == kInf) return out;  // interior branch infeasible at any (t1, eta)
  const double c2 = cut_point(p.phi2);

  if (p.form == dual_form::shortfall_penalty) {
    const auto g = [&](double t1) {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = a[i] + t1;
        if (s > c2) return kInf;
        terms[i] = data.weights[i] * p.phi2.conj(s);
      }
      return pairwise_sum(terms.data(), n) - t1;
    };
    const min1d m = minimize_convex_1d(g, -std::fabs(amax) - 1.0,
                                       std::fabs(amax) + 1.0);
    out.margin = m.fx;
    out.theta1 = m.x;
    out.eta = kNaN;
    return out;
  }

  // shortfall-ball interior branch: min over (t1, eta > 0) of
  //   sum_i w_i eta phi2*((a_i + t1)/eta) - t1 + eta r
  const double r = p.radius;
  const auto g2 = [&](double t1, double eta) {
    // the perspective term is only defined for eta > 0; returning +inf keeps
    // g2 extended-real convex on the whole line so the bracket-growing 1-D
    // minimizer cannot wander into eta <= 0 chasing meaningless values
    if (!(eta > 0.0)) return kInf;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = (a[i] + t1) / eta;
      if (m > c2) return kInf;
      terms[i] = data.weights[i] * eta * p.phi2.conj(m);
    }
    return pairwise_sum(terms.data(), n) - t1 + eta * r;
  };
  // nested golden pass to locate the region
  const double s0 = 1.0 + std::fabs(amax);
  const auto outer = [&](double eta) {
    return minimize_convex_1d([&](double t1) { return g2(t1, eta); }, -s0, s0,
                              1e-10, 200)
        .fx;
  };
  const min1d eta_opt =
      minimize_convex_1d(outer, opts.lambda_floor, 8.0 * s0 + 10.0, 1e-10, 200);
  const min1d t1_opt = minimize_convex_1d(
      [&](double t1) { return g2(t1, std::max(eta_opt.x, opts.lambda_floor)); },
      -s0, s0, 1e-10, 200);
  // ellipsoid refinement inside a box around the located minimizer
  const double w1 = 8.0 * (1.0 + std::fabs(t1_opt.x) + std::fabs(amax));
  const double lo[2] = {t1_opt.x - w1, opts.lambda_floor};
  const double hi[2] = {t1_opt.x + w1,
                        std::max(8.0 * eta_opt.x + 10.0, 1.0)};
  const auto oracle = [&](const double* y) {
    cut_info c;
    const double t1 = y[0], eta = y[1];
    double gv1 = 0.0, gv2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = (a[i] + t1) / eta;
      if (m > c2) {
        c.is_cut = true;
        c.g.fill(0.0);
        c.g[0] = 1.0;
        c.g[1] = -c2;
        c.margin = (a[i] + t1) - c2 * eta;
        return c;
      }
      const double t = p.phi2.conj(m), dt = p.phi2.conj_deriv(m);
      terms[i] = data.weights[i] * eta * t;
      gv1 += data.weights[i] * dt;
      gv2 += data.weights[i] * (t - m * dt);
    }
    c.value = pairwise_sum(terms.data(), n) - t1 + eta * r;
    c.g[0] = -1.0 + gv1;
    c.g[1] = r + gv2;
    return c;
  };
  const ellipsoid_result er =
      ellipsoid_minimize(2, lo, hi, oracle, 1e-9, opts.max_iter / 10);
  out.iterations = er.iterations;
  double best = std::min(std::min(eta_opt.fx, t1_opt.fx), er.value);
  if (best < out.margin) {
    out.margin = best;
    if (er.value <= best) {
      out.theta1 = er.x[0];
      out.eta = er.x[1];
    } else {
      out.theta1 = t1_opt.x;
      out.eta = std::max(eta_opt.x, opts.lambda_floor);
    }
  }
  return out;
}

inline dual_solution solve_shortfall(const robust_problem& p, const sample_set& data,
                                     const solver_options& opts) {
  dual_solution sol;
  sol.branch = "bisection";
  long iters = 0;
  const auto h = [&](double t2) {
    const shortfall_inner in = shortfall_margin(p, data, t2, opts);
    iters += in.iterations + 1;
    return in.margin;
  };
  const auto [xmin, xmax] =
      std::minmax_element(data.values.begin(), data.values.end());
  const double root = bisect_nonincreasing_root(h, -*xmax - 1.0, -*xmin + 1.0);
  const shortfall_inner fin = shortfall_margin(p, data, root, opts);
  if (!(fin.margin <= 1e-7 * (1.0 + std::fabs(root))))
    throw infeasible_error("shortfall dual: no theta2 in the expanded bracket "
                           "satisfies the expectation constraint");
  sol.value = root;
  sol.theta = {fin.theta1, root};
  sol.lambda = fin.eta;
  sol.iterations = iters;
  sol.certified_gap = 0.0;  // bisection width is below reporting precision
  sol.converged = true;
  return sol;
}

}  // namespace detail

inline dual_solution solve(const robust_problem& p, const sample_set& data,
                           const solver_options& opts = {}) {
  validate(p);
  if (data.values.empty()) throw param_error("solve: empty sample set");
  if (p.form == dual_form::shortfall_penalty || p.form == dual_form::shortfall_ball)
    return detail::solve_shortfall(p, data, opts);

  const bool glob = p.form == dual_form::globalized;
  const bool has_lam = form_has_lambda(p.form);
  const int nth = glob ? 3 : 2;

  dual_solution sol;
  sol.box = compactness_bounds(p, data, opts);
  detail::oracle_scratch scratch;

  const bool recession = has_lam && p.radius == 0.0;
  const detail::oracle_mode mode =
      recession ? detail::oracle_mode::recession : detail::oracle_mode::interior;
  const int nv = nth + ((has_lam && !recession) ? 1 : 0);
  const auto oracle = [&](const double* y) {
    return detail::oce_dual_eval(p, data, y, mode, scratch);
  };
  const ellipsoid_result er = ellipsoid_minimize(
      nv, sol.box.lo.data(), sol.box.hi.data(), oracle, opts.tol, opts.max_iter);
  sol.iterations = er.iterations;

  double value = er.value;
  double lower = er.lower_bound;
  sol.branch = recession ? "recession" : "interior";
  sol.theta.assign(er.x.begin(), er.x.begin() + nth);
  sol.lambda = recession ? kInf : (has_lam ? er.x[static_cast<std::size_t>(nth)] : kNaN);
  sol.converged = er.converged;

  if (has_lam) {
    // lambda = 0 convention branch, in closed form
    const double v0 = detail::max_neg_payoff(data);
    lower = std::min(lower, v0);
    if (v0 < value) {
      value = v0;
      sol.branch = "lambda0";
      sol.theta.assign(static_cast<std::size_t>(nth), 0.0);
      sol.theta[static_cast<std::size_t>(nth) - 1] = v0;  // innermost theta -> ess sup
      sol.lambda = 0.0;
      sol.converged = true;
    }
  }
  if (!std::isfinite(value))
    throw nonfinite_error(
        "solve: dual objective is +infinity on the entire search box; the "
        "integrability condition for this divergence pair fails");
  sol.value = value;
  sol.certified_gap = std::max(0.0, value - lower);
  return sol;
}

// ---------------------------------------------------------------------------
// worst-case densities and the strong-duality certificate
// ---------------------------------------------------------------------------

inline std::pair<std::vector<double>, std::vector<double>> worst_case_density(
    const robust_problem& p, const sample_set& data, dual_solution& sol) {
  validate(p);
  if (p.form == dual_form::shortfall_penalty || p.form == dual_form::shortfall_ball)
    throw param_error("worst_case_density: defined for the OCE forms only");
  const bool glob = p.form == dual_form::globalized;
  const std::size_t n = data.values.size();
  const bool recession = sol.branch == "recession";
  if (form_has_lambda(p.form) && !recession && !(sol.lambda > 1.01e-10))
    throw degenerate_error(
        "worst_case_density: dual solution sits on the lambda = 0 boundary");

  const divergence& outer = glob ? p.phi3 : p.phi2;
  std::vector<double> base(n), mid(n), innerw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s1 = sol.theta[static_cast<std::size_t>(glob ? 2 : 1)] - data.values[i];
    const double d1 = p.phi1.conj_deriv(s1);
    double u, d2 = 1.0;
    if (glob) {
      const double s2 = p.phi1.conj(s1) + sol.theta[1];
      d2 = p.phi2.conj_deriv(s2);
      u = p.phi2.conj(s2) + sol.theta[0];
    } else {
      u = p.phi1.conj(s1) + sol.theta[0];
    }
    double douter;
    if (p.form == dual_form::penalty) {
      douter = p.phi2.conj_deriv(u);
    } else if (recession) {
      douter = u >= 0.0 ? outer.conj_slope_pos0 : outer.conj_slope_neg0;
    } else {
      douter = outer.conj_deriv(u / sol.lambda);
    }
    base[i] = data.weights[i] * douter;           // globalized: base layer
    mid[i] = base[i] * (glob ? d2 : d1);          // g* (middle for globalized)
    innerw[i] = glob ? mid[i] * d1 : mid[i];      // gbar*
  }
  const std::vector<double>& gstar = glob ? mid : base;
  const std::vector<double>& gbar = glob ? innerw : mid;
  double s_outer = 0.0, s_inner = 0.0, s_base = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s_outer += gstar[i];
    s_inner += gbar[i];
    s_base += base[i];
  }
  if (!(s_outer > 1e-12) || !(s_inner > 1e-12))
    throw degenerate_error("worst_case_density: unnormalized mass below 1e-12");
  sol.wc_outer.resize(n);
  sol.wc_inner.resize(n);
  if (glob) sol.wc_base.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.wc_outer[i] = gstar[i] / s_outer;
    sol.wc_inner[i] = gbar[i] / s_inner;
    if (glob) sol.wc_base[i] = base[i] / s_base;
  }
  return {sol.wc_outer, sol.wc_inner};
}

// I_phi(a || b) = sum_i b_i phi(a_i / b_i) with the ratio conventions
// 0 phi(0/0) = 0 and 0 phi(c/0) = c lim_t phi(t)/t.
inline double discrete_divergence(const divergence& d, const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size()) throw param_error("discrete_divergence: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] <= 0.0) {
      if (a[i] <= 0.0) continue;
      if (!std::isfinite(d.conj_dom_upper)) return kInf;
      total += a[i] * d.conj_dom_upper;
      continue;
    }
    const double v = d.phi(a[i] / b[i]);
    if (!std::isfinite(v)) return kInf;
    total += b[i] * v;
  }
  return total;
}

// Discrete primal value at the extracted densities: equals the dual value at
// an exact dual optimum (strong duality).
inline double primal_certificate(const robust_problem& p, const sample_set& data,
                                 const dual_solution& sol) {
  if (sol.wc_outer.empty() || sol.wc_inner.empty())
    throw param_error("primal_certificate: run worst_case_density first");
  const std::size_t n = data.values.size();
  double val = 0.0;
  for (std::size_t i = 0; i < n; ++i) val += sol.wc_inner[i] * (-data.values[i]);
  val -= discrete_divergence(p.phi1, sol.wc_inner, sol.wc_outer);
  if (p.form == dual_form::penalty) {
    val -= discrete_divergence(p.phi2, sol.wc_outer, data.weights);
  } else if (p.form == dual_form::globalized) {
    val -= discrete_divergence(p.phi2, sol.wc_outer, sol.wc_base);
  }
  return val;
}

// ---------------------------------------------------------------------------
// brute-force primal oracle (n <= 6 atoms)
// ---------------------------------------------------------------------------

namespace detail {

// OCE of the atoms under weights q (returns value and the optimal eta)
inline min1d atom_oce(const divergence& phi1, const std::vector<double>& x,
                      const std::vector<double>& q) {
  const std::size_t n = x.size();
  std::vector<double> terms(n);
  const auto obj = [&](double eta) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = eval_conjugate(phi1, -x[i] - eta);
      if (v == kInf) return kInf;
      terms[i] = q[i] * v;
    }
    return eta + pairwise_sum(terms.data(), n);
  };
  double lo = x[0], hi = x[0];
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return minimize_convex_1d(obj, lo - 1.0, hi + 1.0);
}

inline double phi_fd_deriv(const divergence& d, double t) {
  double h = 1e-7 * (1.0 + std::fabs(t));
  double tl = std::max(t - h, 1e-14);
  double tr = t + h;
  if (std::isfinite(d.dom_upper) && tr > d.dom_upper) {
    tr = t;  // one-sided backward difference at the domain edge
    tl = std::max(t - h, 1e-14);
  }
  const double fl = d.phi(tl);
  const double fr = d.phi(tr);
  if (!std::isfinite(fl) || !std::isfinite(fr) || !(tr > tl)) return 0.0;
  return (fr - fl) / (tr - tl);
}

}  // namespace detail

inline double brute_force_primal(const robust_problem& p, const sample_set& data,
                                 std::uint64_t seed = 12345) {
  validate(p);
  const std::size_t n = data.values.size();
  if (n < 1 || n > 6)
    throw param_error("brute_force_primal: supported for 1..6 atoms");
  if (p.form == dual_form::shortfall_penalty || p.form == dual_form::shortfall_ball)
    throw param_error("brute_force_primal: OCE forms only");
  const std::vector<double>& x = data.values;
  const std::vector<double>& w = data.weights;
  const bool glob = p.form == dual_form::globalized;
  const double eps = 1e-12;

  // objective over full weight vectors; -inf when infeasible/invalid
  const auto F_pen_ball = [&](const std::vector<double>& q) -> double {
    for (double v : q)
      if (!(v >= 0.0)) return -kInf;
    const double pen = discrete_divergence(p.phi2, q, w);
    if (p.form == dual_form::ball) {
      if (!(pen <= p.radius + 1e-12)) return -kInf;
      return detail::atom_oce(p.phi1, x, q).fx;
    }
    if (!std::isfinite(pen)) return -kInf;
    return detail::atom_oce(p.phi1, x, q).fx - pen;
  };
  const auto F_glob = [&](const std::vector<double>& g,
                          const std::vector<double>& gt) -> double {
    const double c3 = discrete_divergence(p.phi3, g, w);
    if (!(c3 <= p.radius + 1e-12)) return -kInf;
    const double c2 = discrete_divergence(p.phi2, gt, g);
    if (!std::isfinite(c2)) return -kInf;
    return detail::atom_oce(p.phi1, x, gt).fx - c2;
  };

  double best = F_pen_ball(w);  // nominal weights are always feasible
  if (glob) best = F_glob(w, w);

  const std::size_t nz = n - 1;           // free simplex coordinates per block
  const std::size_t nv = glob ? 2 * nz : nz;
  if (nv >= 1) {
    std::vector<double> lo(nv, eps), hi(nv, 1.0);
    const auto unpack = [&](const double* z, std::size_t off) {
      std::vector<double> q(n);
      double s = 0.0;
      for (std::size_t i = 0; i < nz; ++i) {
        q[i] = z[off + i];
        s += q[i];
      }
      q[nz] = 1.0 - s;
      return q;
    };
    const auto oracle = [&](const double* z) -> cut_info {
      cut_info c;
      const std::vector<double> q = unpack(z, 0);
      const std::vector<double> gt = glob ? unpack(z, nz) : std::vector<double>();
      // simplex feasibility of the dependent coordinate(s)
      for (int blk = 0; blk < (glob ? 2 : 1); ++blk) {
        const std::vector<double>& qq = blk == 0 ? q : gt;
        if (qq[nz] < eps) {
          c.is_cut = true;
          c.g.fill(0.0);
          for (std::size_t i = 0; i < nz; ++i)
            c.g[blk * nz + i] = 1.0;
          c.margin = eps - qq[nz];
          return c;
        }
      }
      // outer-divergence constraint (ball / globalized) or penalty finiteness
      const divergence& dc = glob ? p.phi3 : p.phi2;
      const std::vector<double>& qc = q;  // constrained layer
      for (std::size_t i = 0; i < n; ++i) {  // per-atom domain cuts
        const double ratio = qc[i] / w[i];
        if (std::isfinite(dc.dom_upper) && ratio > dc.dom_upper) {
          c.is_cut = true;
          c.g.fill(0.0);
          if (i < nz) {
            c.g[i] = 1.0;
          } else {
            for (std::size_t j = 0; j < nz; ++j) c.g[j] = -1.0;
          }
          c.margin = (ratio - dc.dom_upper) * w[i];
          return c;
        }
      }
      const double cval = discrete_divergence(dc, qc, w);
      const bool constrained = p.form != dual_form::penalty;
      if (constrained && !(cval <= p.radius)) {
        c.is_cut = true;
        c.g.fill(0.0);
        const double dn = detail::phi_fd_deriv(dc, qc[nz] / w[nz]);
        for (std::size_t i = 0; i < nz; ++i)
          c.g[i] = detail::phi_fd_deriv(dc, qc[i] / w[i]) - dn;
        c.margin = std::isfinite(cval) ? cval - p.radius : 1.0;
        // guard against a vanishing cut normal at flat spots
        double nrm = 0.0;
        for (std::size_t i = 0; i < nz; ++i) nrm += c.g[i] * c.g[i];
        if (!(nrm > 0.0)) {
          for (std::size_t i = 0; i < nz; ++i) c.g[i] = qc[i] > w[i] ? 1.0 : -1.0;
        }
        return c;
      }
      if (glob) {
        const double c2v = discrete_divergence(p.phi2, gt, q);
        if (!std::isfinite(c2v)) {  // push gt back into the phi2 domain over q
          c.is_cut = true;
          c.g.fill(0.0);
          for (std::size_t i = 0; i < n; ++i) {
            if (std::isfinite(p.phi2.dom_upper) && gt[i] > p.phi2.dom_upper * q[i]) {
              if (i < nz) {
                c.g[nz + i] = 1.0;
                c.g[i] = -p.phi2.dom_upper;
              } else {
                for (std::size_t j = 0; j < nz; ++j) {
                  c.g[nz + j] = -1.0;
                  c.g[j] = p.phi2.dom_upper;
                }
              }
              c.margin = gt[i] - p.phi2.dom_upper * q[i];
              return c;
            }
          }
          // no specific atom: fall back to a centering cut
          for (std::size_t i = 0; i < nz; ++i) c.g[nz + i] = gt[i] > q[i] ? 1.0 : -1.0;
          c.margin = 0.0;
          return c;
        }
        const min1d oce = detail::atom_oce(p.phi1, x, gt);
        c.value = -(oce.fx - c2v);
        // supergradient of F via the envelope theorem at eta*
        const double eta = oce.x;
        const auto s_of = [&](std::size_t i) {
          return eval_conjugate(p.phi1, -x[i] - eta);
        };
        for (std::size_t i = 0; i < nz; ++i) {
          const double dgt = s_of(i) - s_of(nz) -
                             (detail::phi_fd_deriv(p.phi2, gt[i] / q[i]) -
                              detail::phi_fd_deriv(p.phi2, gt[nz] / q[nz]));
          const auto rec = [&](std::size_t k) {
            const double t = gt[k] / q[k];
            return detail::phi_at(p.phi2, t) - t * detail::phi_fd_deriv(p.phi2, t);
          };
          const double dg = -(rec(i) - rec(nz));
          c.g[nz + i] = -dgt;
          c.g[i] = -dg;
        }
        return c;
      }
      const min1d oce = detail::atom_oce(p.phi1, x, q);
      double fval = oce.fx;
      if (p.form == dual_form::penalty) fval -= cval;
      c.value = -fval;
      const double eta = oce.x;
      for (std::size_t i = 0; i < nz; ++i) {
        double gi = eval_conjugate(p.phi1, -x[i] - eta) -
                    eval_conjugate(p.phi1, -x[nz] - eta);
        if (p.form == dual_form::penalty)
          gi -= detail::phi_fd_deriv(p.phi2, q[i] / w[i]) -
                detail::phi_fd_deriv(p.phi2, q[nz] / w[nz]);
        c.g[i] = -gi;
      }
      return c;
    };
    const ellipsoid_result er = ellipsoid_minimize(
        static_cast<int>(nv), lo.data(), hi.data(), oracle, 1e-9, 60000);
    if (std::isfinite(er.value)) best = std::max(best, -er.value);
  }

  // pairwise-exchange polish from a few starts (penalty/ball only)
  if (!glob && n >= 2) {
    rng_stream rng(seed, 7);
    std::vector<std::vector<double>> starts;
    starts.push_back(w);
    starts.emplace_back(n, 1.0 / static_cast<double>(n));
    for (int s = 0; s < 4; ++s) {
      std::vector<double> q(n);
      double tot = 0.0;
      for (auto& v : q) {
        v = -std::log(rng.uniform01());
        tot += v;
      }
      for (auto& v : q) v /= tot;
      starts.push_back(q);
    }
    for (auto q : starts) {
      double fq = F_pen_ball(q);
      if (!std::isfinite(fq)) {
        q = w;
        fq = F_pen_ball(q);
      }
      for (int pass = 0; pass < 4; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i + 1; j < n; ++j) {
            const auto along = [&](double d) {
              std::vector<double> qq = q;
              qq[i] += d;
              qq[j] -= d;
              if (qq[i] < 0.0 || qq[j] < 0.0) return kInf;
              const double v = F_pen_ball(qq);
              return std::isfinite(v) ? -v : kInf;
            };
            const min1d m = golden_min(along, -q[i], q[j], 1e-11, 120);
            if (-m.fx > fq + 1e-14) {
              q[i] += m.x;
              q[j] -= m.x;
              fq = -m.fx;
            }
          }
        }
      }
      best = std::max(best, fq);
    }
  }
  return best;
}

}  // namespace phirisk
