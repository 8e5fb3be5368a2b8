#pragma once

// Nominal (non-robust) risk measures: optimized certainty equivalents (OCE),
// utility-based shortfall, robust expected utility with a single outer
// divergence, and the independent closed-form/quadrature oracles used to
// cross-check them.  Payoff convention: X is a payoff; losses enter as -X.

#include <cmath>
#include <string>
#include <vector>

#include "divergence.hpp"
#include "math.hpp"
#include "nominal.hpp"
#include "quadrature.hpp"
#include "tailored.hpp"

namespace phirisk {

struct risk_spec {
  std::string kind;  // "cvar" | "entropic" | "oce"
  double alpha = kNaN;
  double gamma = kNaN;
  divergence phi1;
  std::function<double(double)> utility;  // u(x) = -phi1*(-x)
};

namespace detail {
inline void attach_utility(risk_spec& r) {
  r.utility = [d = r.phi1](double x) { return -eval_conjugate(d, -x); };
}
}  // namespace detail

inline risk_spec make_risk_cvar(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw param_error("cvar: alpha must lie in (0,1)");
  risk_spec r;
  r.kind = "cvar";
  r.alpha = alpha;
  r.phi1 = make_cvar_indicator(alpha);
  detail::attach_utility(r);
  return r;
}

inline risk_spec make_risk_entropic(double gamma) {
  if (!(gamma > 0.0)) throw param_error("entropic: gamma must be positive");
  risk_spec r;
  r.kind = "entropic";
  r.gamma = gamma;
  r.phi1 = make_scaled_kl(gamma);
  detail::attach_utility(r);
  return r;
}

inline risk_spec make_risk_oce(divergence phi1) {
  risk_spec r;
  r.kind = "oce";
  r.phi1 = std::move(phi1);
  detail::attach_utility(r);
  return r;
}

// "cvar(0.975)" | "entropic(1.0)" | "oce(phi1=<divergence-spec>)"
inline risk_spec risk_from_spec(const std::string& spec) {
  const auto lp = spec.find('(');
  const std::string name = spec.substr(0, lp == std::string::npos ? spec.size() : lp);
  if (name == "cvar") return make_risk_cvar(parse_call(spec).get("alpha", 0));
  if (name == "entropic") return make_risk_entropic(parse_call(spec).get("gamma", 0));
  if (name == "oce") {
    if (lp == std::string::npos || spec.back() != ')')
      throw param_error("oce spec needs the form oce(phi1=<divergence>)");
    std::string body = spec.substr(lp + 1, spec.size() - lp - 2);
    const auto b = body.find_first_not_of(" \t");
    if (b != std::string::npos) body = body.substr(b);
    if (body.rfind("phi1=", 0) == 0) body = body.substr(5);
    return make_risk_oce(divergence_from_spec(body));
  }
  throw param_error("unknown risk spec '" + spec + "'");
}

// --- empirical OCE -----------------------------------------------------------

// inf_eta { eta + sum_i w_i phi1*(-X_i - eta) }
inline double nominal_oce(const risk_spec& spec, const sample_set& data) {
  if (data.values.empty()) throw param_error("nominal_oce: empty sample set");
  const std::size_t n = data.values.size();
  std::vector<double> terms(n);
  const auto obj = [&](double eta) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = eval_conjugate(spec.phi1, -data.values[i] - eta);
      if (v == kInf) return kInf;
      terms[i] = data.weights[i] * v;
    }
    return eta + pairwise_sum(terms.data(), n);
  };
  const auto [xmin, xmax] =
      std::minmax_element(data.values.begin(), data.values.end());
  const min1d res = minimize_convex_1d(obj, *xmin - 1.0, *xmax + 1.0);
  if (!std::isfinite(res.fx))
    throw nonfinite_error("nominal_oce: objective is +infinity on the whole bracket");
  return res.fx;
}

// Direct fractional-atom empirical CVaR of the loss -X at level alpha.
inline double empirical_cvar(double alpha, const sample_set& data) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw param_error("empirical_cvar: alpha in (0,1)");
  std::vector<std::size_t> idx(data.values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return -data.values[a] > -data.values[b];
  });
  const double target = 1.0 - alpha;
  double acc = 0.0, v = 0.0;
  for (std::size_t k = 0; k < idx.size() && acc < target - 1e-18; ++k) {
    const double take = std::min(data.weights[idx[k]], target - acc);
    v += take * (-data.values[idx[k]]);
    acc += take;
  }
  return v / target;
}

// --- exact (quadrature) OCE ----------------------------------------------------

// inf_eta { eta + int phi1*(-x - eta) f(x) dx }; quadrature replaces E_P.
inline double exact_oce(const risk_spec& spec, const nominal_model& model) {
  if (model.discrete || !model.pdf)
    throw param_error("exact_oce: model must have a density");
  const double qlo = model.quantile(1e-9);
  const double qhi = model.quantile(1.0 - 1e-9);
  bool any_finite = false;
  const auto obj = [&](double eta) {
    const quad_result q = integrate_improper(
        [&](double x) { return eval_conjugate(spec.phi1, -x - eta) * model.pdf(x); },
        model.lo, model.hi, 1e-11, 1e-10);
    if (std::isnan(q.value))
      throw quadrature_error("exact_oce: quadrature failed: " + q.note);
    // divergent or indeterminate (evaluation budget exhausted on an exploding
    // integrand): this eta contributes +infinity to the infimum either way
    if (q.divergent || !q.converged) return kInf;
    any_finite = true;
    return eta + q.value;
  };
  // Hard search limits: an optimal eta lies within the (generously padded)
  // quantile range of the loss, while far outside it the tail quadrature can
  // underflow to zero before ever seeing the region where the integrand
  // explodes, producing a spuriously finite objective.
  const double pad = 0.5 * ((qhi - qlo) + 2.0) + 16.0;
  const min1d res = minimize_convex_1d(obj, -qhi - 1.0, -qlo + 1.0, 1e-12, 300,
                                       -qhi - 1.0 - pad, -qlo + 1.0 + pad);
  if (!std::isfinite(res.fx) || !any_finite)
    throw nonfinite_error(
        "exact_oce: the defining integral diverges for every eta in the search "
        "bracket; the risk measure is +infinity under this model");
  return res.fx;
}

// Independent CVaR oracle: tail mean of the loss via the quantile function,
//   CVaR_alpha(-X) = -(1/(1-alpha)) * int_0^{1-alpha} F_X^{-1}(u) du,
// integrated over dyadic panels shrinking into the (possibly singular) corner.
inline double exact_cvar_tailmean(double alpha, const nominal_model& model) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw param_error("exact_cvar_tailmean: alpha in (0,1)");
  const double a = 1.0 - alpha;
  double total = 0.0;
  double prev = kInf;
  int growing = 0;
  bool settled = false;
  for (int k = 0; k < 1000 && !settled; ++k) {
    const double u_hi = a * std::pow(0.5, k);
    const double u_lo = 0.5 * u_hi;
    const double panel =
        adaptive_simpson([&](double u) { return model.quantile(u); }, u_lo, u_hi,
                         1e-13 * (1.0 + std::abs(total)), 24);
    if (!std::isfinite(panel))
      throw nonfinite_error("exact_cvar_tailmean: tail integral diverges");
    total += panel;
    const double mag = std::abs(panel);
    const double tol = 1e-14 * (1.0 + std::abs(total));
    settled = mag <= tol;
    growing = (mag >= prev && mag > tol) ? growing + 1 : 0;
    if (growing >= 30)
      throw nonfinite_error("exact_cvar_tailmean: tail integral diverges");
    prev = mag;
  }
  if (!settled)
    throw nonfinite_error("exact_cvar_tailmean: tail integral fails to converge");
  return -total / a;
}

// --- shortfall -----------------------------------------------------------------

// smallest eta with E[-u(X + eta)] <= 0, i.e. sum_i w_i phi1*(-X_i - eta) <= 0.
inline double nominal_shortfall(const risk_spec& spec, const sample_set& data) {
  if (data.values.empty()) throw param_error("nominal_shortfall: empty sample set");
  const std::size_t n = data.values.size();
  std::vector<double> terms(n);
  const auto h = [&](double eta) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = eval_conjugate(spec.phi1, -data.values[i] - eta);
      if (v == kInf) return kInf;
      terms[i] = data.weights[i] * v;
    }
    return pairwise_sum(terms.data(), n);
  };
  const auto [xmin, xmax] =
      std::minmax_element(data.values.begin(), data.values.end());
  const double root = bisect_nonincreasing_root(h, -*xmax - 1.0, -*xmin + 1.0);
  if (!(h(root) <= 1e-12))
    throw infeasible_error("nominal_shortfall: no eta achieves E[-u(X+eta)] <= 0");
  return root;
}

// --- robust expected utility (single outer divergence, penalty form) ------------

// inf_theta { -theta + sum_i w_i phi2*(phi1*(-X_i) + theta) }
inline double robust_eu_penalty(const divergence& phi1, const divergence& phi2,
                                const sample_set& data) {
  if (data.values.empty()) throw param_error("robust_eu_penalty: empty sample set");
  const std::size_t n = data.values.size();
  std::vector<double> s(n), terms(n);
  double smax = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = eval_conjugate(phi1, -data.values[i]);
    if (s[i] == kInf)
      throw nonfinite_error("robust_eu_penalty: phi1* is +infinity at a sample");
    smax = std::max(smax, std::abs(s[i]));
  }
  const auto obj = [&](double theta) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = eval_conjugate(phi2, s[i] + theta);
      if (v == kInf) return kInf;
      terms[i] = data.weights[i] * v;
    }
    return -theta + pairwise_sum(terms.data(), n);
  };
  const min1d res = minimize_convex_1d(obj, -1.0 - smax, 1.0 + smax);
  if (!std::isfinite(res.fx))
    throw nonfinite_error("robust_eu_penalty: objective is +infinity everywhere");
  return res.fx;
}

}  // namespace phirisk
