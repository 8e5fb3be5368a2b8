#pragma once

// Elicitation of the composite conjugate phi2* o phi1* (and of the utility
// u(x) = -phi1*(-x)) from robust / nominal risk evaluations of two-point
// lotteries X_p = { x w.p. p; 0 w.p. 1-p }:
//
//     lim_{p->0} rho_robust(X_p) / p = phi2*(phi1*(-x))
//     lim_{p->0} CE(X_p) / p        = u(x)            (CE = -nominal OCE)
//
// Expectations over X_p are exact two-atom sums — no Monte Carlo — so the
// limits can be driven to p = 2^-16 and sharpened by Richardson extrapolation.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "divergence.hpp"
#include "dual.hpp"
#include "math.hpp"
#include "nominal.hpp"
#include "risk.hpp"

namespace phirisk {

struct elicitation_result {
  double x = kNaN;
  std::vector<std::pair<double, double>> estimates;  // (p, value/p)
  double extrapolated = kNaN;
  std::string target_kind;  // "composite" | "utility"
  // elicitation pins phi2* only on the image of phi1*; recorded for callers
  double image_lo = kNaN;
  double image_hi = kNaN;
};

inline std::vector<double> default_p_seq() {
  std::vector<double> p;
  for (int k = 4; k <= 16; ++k) p.push_back(std::ldexp(1.0, -k));
  return p;
}

namespace detail {

// phi*(s) >= s everywhere (Fenchel-Young at t = 1, phi(1) = 0); the limit
// argument needs dominance at nonzero s.  Equality is tolerated so that the
// degenerate divergence (identity conjugate) — for which the limit holds
// trivially — stays admissible.
inline void check_dominance(const divergence& d, const char* role) {
  if (std::isfinite(d.conj_dom_upper))
    throw precondition_error(std::string(role) + " '" + d.id +
                             "': conjugate domain must be all of R");
  for (double s : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
    const double v = eval_conjugate(d, s);
    if (!(v >= s - 1e-12 * (1.0 + std::fabs(s))))
      throw precondition_error(std::string(role) + " '" + d.id +
                               "': conjugate dominance phi*(s) >= s fails at s=" +
                               std::to_string(s));
  }
}

inline void check_p_seq(const std::vector<double>& p_seq) {
  if (p_seq.empty()) throw param_error("elicitation: empty p sequence");
  double prev = 0.51;
  for (double p : p_seq) {
    if (!(p > 0.0 && p <= 0.5))
      throw param_error("elicitation: p values must lie in (0, 1/2]");
    if (!(p < prev)) throw param_error("elicitation: p sequence must decrease");
    prev = p;
  }
}

inline sample_set two_point_lottery(double x, double p) {
  sample_set s;
  s.values = {x, 0.0};
  s.weights = {p, 1.0 - p};
  return s;
}

// Richardson step from the last two (p, v) pairs assuming a v(p) = L + c p
// error expansion: L = (v_k - rho v_{k-1}) / (1 - rho), rho = p_k / p_{k-1}.
inline double richardson_tail(const std::vector<std::pair<double, double>>& est) {
  if (est.size() < 2) return est.back().second;
  const auto& a = est[est.size() - 2];
  const auto& b = est.back();
  const double rho = b.first / a.first;
  if (!(rho > 0.0 && rho < 1.0)) return b.second;
  return (b.second - rho * a.second) / (1.0 - rho);
}

inline void record_image(const divergence& phi1, elicitation_result& out) {
  // phi1* is nondecreasing with infimum -phi1(0) (value at s -> -inf) and
  // supremum +inf on an unbounded conjugate domain.
  const double phi10 = phi1.phi(0.0);
  out.image_lo = std::isfinite(phi10) ? -phi10 : -kInf;
  out.image_hi = kInf;
}

}  // namespace detail

inline elicitation_result elicit_composite(const robust_problem& problem, double x,
                                           std::vector<double> p_seq = {}) {
  validate(problem);
  if (problem.form != dual_form::penalty &&
      problem.form != dual_form::shortfall_penalty)
    throw param_error("elicit_composite: penalty or shortfall-penalty form only");
  if (p_seq.empty()) p_seq = default_p_seq();
  detail::check_p_seq(p_seq);
  detail::check_dominance(problem.phi1, "phi1");
  detail::check_dominance(problem.phi2, "phi2");
  if (problem.form == dual_form::shortfall_penalty) {
    // the shortfall limit additionally needs (phi2* o phi1*)'(0) = 1
    const double d0 = eval_conjugate_deriv(problem.phi2,
                                           eval_conjugate(problem.phi1, 0.0)) *
                      eval_conjugate_deriv(problem.phi1, 0.0);
    if (!(std::fabs(d0 - 1.0) <= 1e-8))
      throw precondition_error(
          "elicit_composite: shortfall variant needs (phi2* o phi1*)'(0) = 1; "
          "got " + std::to_string(d0));
  }

  elicitation_result out;
  out.x = x;
  out.target_kind = "composite";
  detail::record_image(problem.phi1, out);
  solver_options opts;
  opts.tol = 1e-10;
  for (double p : p_seq) {
    const sample_set lot = detail::two_point_lottery(x, p);
    const dual_solution sol = solve(problem, lot, opts);
    out.estimates.emplace_back(p, sol.value / p);
  }
  out.extrapolated = detail::richardson_tail(out.estimates);
  return out;
}

inline elicitation_result ce_recover(const risk_spec& spec, double x,
                                     std::vector<double> p_seq = {}) {
  if (p_seq.empty()) p_seq = default_p_seq();
  detail::check_p_seq(p_seq);
  const divergence& phi1 = spec.phi1;
  if (!phi1.conj) throw param_error("ce_recover: risk spec carries no divergence");
  // u(0) = 0 and u(x) <= x, i.e. phi1*(0) = 0 and phi1*(-x) >= -x
  if (!(std::fabs(eval_conjugate(phi1, 0.0)) <= 1e-12))
    throw precondition_error("ce_recover: u(0) = -phi1*(0) must vanish");
  detail::check_dominance(phi1, "phi1");

  elicitation_result out;
  out.x = x;
  out.target_kind = "utility";
  detail::record_image(phi1, out);
  for (double p : p_seq) {
    const sample_set lot = detail::two_point_lottery(x, p);
    const double ce = -nominal_oce(spec, lot);  // certainty equivalent
    out.estimates.emplace_back(p, ce / p);
  }
  out.extrapolated = detail::richardson_tail(out.estimates);
  return out;
}

}  // namespace phirisk
