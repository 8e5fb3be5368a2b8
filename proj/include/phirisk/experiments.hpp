#pragma once

// Three reproducible numerical studies:
//   * toy: robust CVaR of a negative-Pareto payoff across ambiguity radii,
//     one sample draw reused across the whole radius column;
//   * compare: KL vs polynomial robust values over growing sample sizes,
//     optionally under an importance-sampling draw with proposal 1/x^2;
//   * hedging: discrete delta hedging of a European call under GBM with
//     transaction costs — nominal and robust CVaR of |hedging error| as a
//     function of the rebalancing frequency;
//   * newsvendor: robust CVaR-optimal order quantity across radii.
//
// Everything is keyed by (config, seed): samplers use per-purpose substreams
// so results are independent of evaluation order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "divergence.hpp"
#include "dual.hpp"
#include "math.hpp"
#include "nominal.hpp"
#include "risk.hpp"
#include "tailored.hpp"

namespace phirisk {

// ---------------------------------------------------------------------------
// toy study: negative-Pareto CVaR across radii
// ---------------------------------------------------------------------------

struct toy_row {
  double r;
  double robust_value;
};

inline std::vector<double> default_toy_radii() {
  return {0.0, 0.001, 0.003, 0.005, 0.007, 0.01, 0.03, 0.1, 0.537, 1.0};
}

inline std::vector<toy_row> toy_pareto_cvar(const std::vector<double>& radii,
                                            std::size_t n, std::uint64_t seed,
                                            const divergence& phi2,
                                            double alpha = 0.975,
                                            const solver_options& opts = {}) {
  for (double r : radii)
    if (!(r >= 0.0)) throw param_error("toy_pareto_cvar: radii must be >= 0");
  const nominal_model model = make_pareto_neg(2.0, 1.0);  // density 2/|x|^3
  const sample_set draw = sample(model, n, seed, /*stream=*/1);
  robust_problem prob;
  prob.form = dual_form::ball;
  prob.phi1 = make_cvar_indicator(alpha);
  prob.phi2 = phi2;
  std::vector<toy_row> out;
  for (double r : radii) {
    prob.radius = r;
    out.push_back({r, solve(prob, draw, opts).value});
  }
  return out;
}

// ---------------------------------------------------------------------------
// KL vs polynomial comparison over sample sizes
// ---------------------------------------------------------------------------

struct compare_row {
  std::size_t n;
  double polynomial_value;
  double kl_value;
};

inline std::vector<compare_row> divergence_comparison(
    const std::vector<std::size_t>& sizes, double r, std::uint64_t seed,
    bool use_importance, double alpha = 0.975, const solver_options& opts = {}) {
  if (!(r > 0.0)) throw param_error("divergence_comparison: r must be positive");
  const nominal_model model = make_pareto_neg(2.0, 1.0);
  const nominal_model proposal = make_pareto_neg(1.0, 1.0);  // density 1/x^2
  robust_problem prob;
  prob.form = dual_form::ball;
  prob.phi1 = make_cvar_indicator(alpha);
  prob.radius = r;
  const divergence poly3 = make_polynomial(3.0);
  const divergence kl = make_kl();
  std::vector<compare_row> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::uint64_t stream = 100 + i;
    const sample_set draw = use_importance
                                ? importance_sample(model, proposal, sizes[i], seed, stream)
                                : sample(model, sizes[i], seed, stream);
    compare_row row;
    row.n = sizes[i];
    prob.phi2 = poly3;
    row.polynomial_value = solve(prob, draw, opts).value;
    prob.phi2 = kl;
    row.kl_value = solve(prob, draw, opts).value;
    out.push_back(row);
  }
  return out;
}

inline std::vector<std::size_t> default_compare_sizes() {
  std::vector<std::size_t> s;
  for (std::size_t n = 500; n <= 6000; n += 500) s.push_back(n);
  return s;
}

// ---------------------------------------------------------------------------
// delta hedging under transaction costs
// ---------------------------------------------------------------------------

struct hedging_config {
  double mu_s = 0.05;
  double sigma_s = 0.3;
  double r_f = 0.01;
  double t_mat = 1.0;
  double s0 = 1.0;
  double strike = 1.0;
  double k0 = 0.0002;   // fixed cost per trade
  double k_prop = 0.005;  // proportional cost per unit of stock traded
  std::vector<long> n_grid{10, 25, 50, 100, 200, 400, 800};
  std::size_t paths = 8000;
  double alpha = 0.95;
  double radius = 0.1;
  std::uint64_t seed = 1;
};

inline void validate(const hedging_config& c) {
  if (!(c.sigma_s > 0.0)) throw param_error("hedging: sigma_s must be positive");
  if (!(c.t_mat > 0.0)) throw param_error("hedging: T must be positive");
  if (!(c.s0 > 0.0 && c.strike > 0.0)) throw param_error("hedging: S0, K positive");
  if (c.paths < 1) throw param_error("hedging: at least one path");
}

inline double bs_d1(double s, double k, double sigma, double r_f, double tau) {
  return (std::log(s / k) + (r_f + 0.5 * sigma * sigma) * tau) /
         (sigma * std::sqrt(tau));
}

inline double bs_delta(double s, double k, double sigma, double r_f, double tau) {
  if (!(s > 0.0 && k > 0.0 && sigma > 0.0 && tau > 0.0))
    throw domain_error("bs_delta: s, k, sigma, tau must all be positive");
  return norm_cdf(bs_d1(s, k, sigma, r_f, tau));
}

inline double bs_call_price(double s, double k, double sigma, double r_f,
                            double tau) {
  if (!(s > 0.0 && k > 0.0 && sigma > 0.0 && tau > 0.0))
    throw domain_error("bs_call_price: s, k, sigma, tau must all be positive");
  const double d1 = bs_d1(s, k, sigma, r_f, tau);
  const double d2 = d1 - sigma * std::sqrt(tau);
  return s * norm_cdf(d1) - k * std::exp(-r_f * tau) * norm_cdf(d2);
}

// Simulate `paths` GBM paths on the n-point grid and delta-hedge a European
// call; returns the payoff sample X = -|hedging error at maturity|.  The delta
// held over [t_{i-1}, t_i) is computed at t_{i-1} with remaining maturity
// T - t_{i-1}; cash accrues at r_f and pays k0 + k_prop |d delta| S per trade.
inline sample_set hedge_paths(const hedging_config& cfg, long n) {
  validate(cfg);
  if (n < 1) throw param_error("hedge_paths: n must be >= 1");
  const double dt = cfg.t_mat / static_cast<double>(n);
  const double growth = std::exp(cfg.r_f * dt);
  const double drift = (cfg.mu_s - 0.5 * cfg.sigma_s * cfg.sigma_s) * dt;
  const double vol = cfg.sigma_s * std::sqrt(dt);
  sample_set out;
  out.seed = cfg.seed;
  out.values.resize(cfg.paths);
  out.weights.assign(cfg.paths, 1.0 / static_cast<double>(cfg.paths));
  const double price0 =
      bs_call_price(cfg.s0, cfg.strike, cfg.sigma_s, cfg.r_f, cfg.t_mat);
  for (std::size_t j = 0; j < cfg.paths; ++j) {
    rng_stream rng(cfg.seed, 1000 + j);  // per-path substream
    double s = cfg.s0;
    double delta = bs_delta(cfg.s0, cfg.strike, cfg.sigma_s, cfg.r_f, cfg.t_mat);
    double cash = price0 - delta * cfg.s0 -
                  (cfg.k0 + cfg.k_prop * std::fabs(delta) * cfg.s0);
    for (long i = 1; i <= n; ++i) {
      s *= std::exp(drift + vol * norm_quantile(rng.uniform01()));
      cash *= growth;
      if (i < n) {
        const double tau = cfg.t_mat - static_cast<double>(i) * dt;
        const double nd = bs_delta(s, cfg.strike, cfg.sigma_s, cfg.r_f, tau);
        const double dd = nd - delta;
        cash -= s * dd + (cfg.k0 + cfg.k_prop * std::fabs(dd) * s);
        delta = nd;
      }
    }
    const double payoff = std::max(s - cfg.strike, 0.0);
    const double error = payoff - (delta * s + cash);
    out.values[j] = -std::fabs(error);
  }
  return out;
}

struct hedging_row {
  long n;
  double nominal_cvar;
  double robust_cvar;
};

inline std::vector<hedging_row> hedging_study(const hedging_config& cfg,
                                              const solver_options& opts = {}) {
  validate(cfg);
  robust_problem prob;
  prob.form = dual_form::ball;
  prob.phi1 = make_cvar_indicator(cfg.alpha);
  prob.phi2 = make_gl_cvar(cfg.sigma_s, 2.0, 2.0);
  prob.radius = cfg.radius;
  std::vector<hedging_row> out;
  for (long n : cfg.n_grid) {
    const sample_set draw = hedge_paths(cfg, n);
    hedging_row row;
    row.n = n;
    row.nominal_cvar = empirical_cvar(cfg.alpha, draw);
    row.robust_cvar = solve(prob, draw, opts).value;
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// newsvendor
// ---------------------------------------------------------------------------

struct newsvendor_config {
  double v = 8.0;  // sale price
  double c = 4.0;  // order cost
  double s = 2.0;  // salvage value
  double l = 4.0;  // lost-sale penalty
  nominal_model demand = make_lognormal(0.0, 1.0);
  double alpha = 0.95;
  std::vector<double> radius_grid{0.0, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6};
  std::size_t n_samples = 10000;
  std::uint64_t seed = 1;
};

inline void validate(const newsvendor_config& cfg) {
  if (!(cfg.v > cfg.c && cfg.c > cfg.s))
    throw param_error("newsvendor: needs v > c > s");
  if (!(cfg.l >= 0.0)) throw param_error("newsvendor: l must be >= 0");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw param_error("newsvendor: alpha in (0,1)");
  if (cfg.n_samples < 1) throw param_error("newsvendor: need samples");
}

inline double newsvendor_profit(const newsvendor_config& cfg, double y, double d) {
  return cfg.v * std::min(d, y) + cfg.s * std::max(y - d, 0.0) -
         cfg.l * std::max(d - y, 0.0) - cfg.c * y;
}

inline double newsvendor_closed_form(const newsvendor_config& cfg) {
  validate(cfg);
  const double e = cfg.c - cfg.s;
  const double u = cfg.v + cfg.l - cfg.c;
  const double vv = cfg.v - cfg.c;
  if (!(e + u > 0.0)) throw param_error("newsvendor: E + U must be positive");
  const double a1 = u * (1.0 - cfg.alpha) / (e + u);
  const double a2 = (e * cfg.alpha + u) / (e + u);
  if (!(a1 > 0.0 && a1 < 1.0 && a2 > 0.0 && a2 < 1.0))
    throw domain_error("newsvendor_closed_form: quantile argument outside (0,1)");
  return ((e + vv) / (e + u)) * cfg.demand.quantile(a1) +
         ((u - vv) / (e + u)) * cfg.demand.quantile(a2);
}

struct newsvendor_row {
  double r;
  double y_robust;
  double value;
};

inline std::vector<newsvendor_row> newsvendor_robust_curve(
    const newsvendor_config& cfg, const solver_options& opts = {}) {
  validate(cfg);
  for (double r : cfg.radius_grid)
    if (!(r >= 0.0)) throw param_error("newsvendor: radii must be >= 0");
  const sample_set demand = sample(cfg.demand, cfg.n_samples, cfg.seed, 3);
  robust_problem prob;
  prob.form = dual_form::ball;
  prob.phi1 = make_cvar_indicator(cfg.alpha);
  prob.phi2 = make_gl_cvar(1.0, 2.0, 2.0);  // sigma matches log-normal(0,1) demand
  const double y_hi = cfg.demand.quantile(0.9999);
  sample_set profits = demand;  // holder reused across y evaluations
  const auto robust_at = [&](double y, double r) {
    for (std::size_t j = 0; j < demand.values.size(); ++j)
      profits.values[j] = newsvendor_profit(cfg, y, demand.values[j]);
    prob.radius = r;
    return solve(prob, profits, opts).value;
  };
  std::vector<newsvendor_row> out;
  for (double r : cfg.radius_grid) {
    const min1d m = golden_min([&](double y) { return robust_at(y, r); }, 0.0,
                               y_hi, 1e-4, 120);
    out.push_back({r, m.x, m.fx});
  }
  return out;
}

}  // namespace phirisk
