#pragma once

// One-dimensional nominal distributions: densities, quantiles, seeded
// samplers, and importance-sampling likelihood ratios.  All samplers draw by
// inverse transform so that a (seed, stream) pair fully determines the output.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "math.hpp"
#include "quadrature.hpp"

namespace phirisk {

struct nominal_model {
  std::string id;
  double lo = -kInf;  // support endpoints
  double hi = kInf;
  std::function<double(double)> pdf;      // zero outside support
  std::function<double(double)> logpdf;   // optional (-inf outside support)
  std::function<double(double)> cdf;
  std::function<double(double)> quantile; // inverse CDF on (0,1)
  bool discrete = false;
  std::vector<double> atom_x;  // populated for discrete models
  std::vector<double> atom_p;
};

struct sample_set {
  std::vector<double> values;
  std::vector<double> weights;  // nonnegative, sum to 1
  std::uint64_t seed = 0;
  std::string proposal_id;  // empty when sampled directly from the model
};

// --- generic quantile by monotone bisection ---------------------------------

inline double quantile_by_bisection(const std::function<double(double)>& cdf,
                                    double lo, double hi, double u) {
  double a = std::isfinite(lo) ? lo : -1.0;
  double b = std::isfinite(hi) ? hi : 1.0;
  if (!std::isfinite(lo)) {
    if (std::isfinite(hi)) a = hi - 1.0;
    for (int k = 0; k < 200 && cdf(a) > u; ++k) a = std::isfinite(hi) ? hi - 2.0 * (hi - a) : 2.0 * a - std::abs(a) - 1.0;
  }
  if (!std::isfinite(hi)) {
    if (std::isfinite(lo)) b = lo + 1.0;
    for (int k = 0; k < 200 && cdf(b) < u; ++k) b = std::isfinite(lo) ? lo + 2.0 * (b - lo) : 2.0 * b + std::abs(b) + 1.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (cdf(m) < u)
      a = m;
    else
      b = m;
    if (b - a < 1e-10 * (1.0 + std::abs(a) + std::abs(b))) break;
  }
  return 0.5 * (a + b);
}

// --- families ----------------------------------------------------------------

inline nominal_model make_gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw param_error("gaussian: sigma must be positive");
  nominal_model m;
  m.id = "gaussian(mu=" + std::to_string(mu) + ",sigma=" + std::to_string(sigma) + ")";
  m.pdf = [mu, sigma](double x) { return norm_pdf((x - mu) / sigma) / sigma; };
  m.logpdf = [mu, sigma](double x) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * kPi);
  };
  m.cdf = [mu, sigma](double x) { return norm_cdf((x - mu) / sigma); };
  m.quantile = [mu, sigma](double u) { return mu + sigma * norm_quantile(u); };
  return m;
}

inline nominal_model make_lognormal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw param_error("lognormal: sigma must be positive");
  nominal_model m;
  m.id = "lognormal(mu=" + std::to_string(mu) + ",sigma=" + std::to_string(sigma) + ")";
  m.lo = 0.0;
  m.pdf = [mu, sigma](double x) {
    if (x <= 0.0) return 0.0;
    const double z = (std::log(x) - mu) / sigma;
    return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * kPi));
  };
  m.logpdf = [mu, sigma](double x) {
    if (x <= 0.0) return -kInf;
    const double z = (std::log(x) - mu) / sigma;
    return -0.5 * z * z - std::log(x * sigma) - 0.5 * std::log(2.0 * kPi);
  };
  m.cdf = [mu, sigma](double x) { return x <= 0.0 ? 0.0 : norm_cdf((std::log(x) - mu) / sigma); };
  m.quantile = [mu, sigma](double u) { return std::exp(mu + sigma * norm_quantile(u)); };
  return m;
}

inline nominal_model make_exponential(double lambda) {
  if (!(lambda > 0.0)) throw param_error("exponential: lambda must be positive");
  nominal_model m;
  m.id = "exponential(lambda=" + std::to_string(lambda) + ")";
  m.lo = 0.0;
  m.pdf = [lambda](double x) { return x < 0.0 ? 0.0 : lambda * std::exp(-lambda * x); };
  m.logpdf = [lambda](double x) { return x < 0.0 ? -kInf : std::log(lambda) - lambda * x; };
  m.cdf = [lambda](double x) { return x < 0.0 ? 0.0 : -std::expm1(-lambda * x); };
  m.quantile = [lambda](double u) { return -std::log1p(-u) / lambda; };
  return m;
}

// Weibull on the negative axis: X = -W with W ~ Weibull(shape k, scale lambda),
// so f(x) = k/lambda (|x|/lambda)^{k-1} exp(-(|x|/lambda)^k) for x <= 0.
inline nominal_model make_weibull_neg(double k, double lambda) {
  if (!(k > 0.0)) throw param_error("weibull_neg: k must be positive");
  if (!(lambda > 0.0)) throw param_error("weibull_neg: lambda must be positive");
  nominal_model m;
  m.id = "weibull_neg(k=" + std::to_string(k) + ",lambda=" + std::to_string(lambda) + ")";
  m.hi = 0.0;
  m.pdf = [k, lambda](double x) {
    if (x > 0.0) return 0.0;
    const double t = -x / lambda;
    if (t == 0.0) return k > 1.0 ? 0.0 : (k == 1.0 ? 1.0 / lambda : kInf);
    return (k / lambda) * std::pow(t, k - 1.0) * std::exp(-std::pow(t, k));
  };
  m.logpdf = [k, lambda](double x) {
    if (x > 0.0) return -kInf;
    const double t = -x / lambda;
    if (t == 0.0) return k > 1.0 ? -kInf : (k == 1.0 ? -std::log(lambda) : kInf);
    return std::log(k / lambda) + (k - 1.0) * std::log(t) - std::pow(t, k);
  };
  m.cdf = [k, lambda](double x) {
    if (x >= 0.0) return 1.0;
    return std::exp(-std::pow(-x / lambda, k));
  };
  m.quantile = [k, lambda](double u) { return -lambda * std::pow(-std::log(u), 1.0 / k); };
  return m;
}

// Pareto on the negative axis: f(x) = alpha xm^alpha / |x|^{alpha+1}, x <= -xm.
inline nominal_model make_pareto_neg(double alpha, double xm) {
  if (!(alpha > 0.0)) throw param_error("pareto_neg: alpha must be positive");
  if (!(xm > 0.0)) throw param_error("pareto_neg: xm must be positive");
  nominal_model m;
  m.id = "pareto_neg(alpha=" + std::to_string(alpha) + ",xm=" + std::to_string(xm) + ")";
  m.hi = -xm;
  m.pdf = [alpha, xm](double x) {
    if (x > -xm) return 0.0;
    return alpha * std::pow(xm, alpha) / std::pow(-x, alpha + 1.0);
  };
  m.logpdf = [alpha, xm](double x) {
    if (x > -xm) return -kInf;
    return std::log(alpha) + alpha * std::log(xm) - (alpha + 1.0) * std::log(-x);
  };
  m.cdf = [alpha, xm](double x) {
    if (x >= -xm) return 1.0;
    return std::pow(xm / -x, alpha);
  };
  m.quantile = [alpha, xm](double u) { return -xm * std::pow(u, -1.0 / alpha); };
  return m;
}

// Generalized log-normal on the negative axis:
//   f(x) = 1/(C sigma |x|) exp(-|log|x| - mu|^p / (p sigma^p)),  x < 0,
// with C the normalization over the whole real line in y = (log|x|-mu)/sigma.
inline nominal_model make_gln_neg(double mu, double sigma, double p) {
  if (!(sigma > 0.0)) throw param_error("gln_neg: sigma must be positive");
  if (!(p > 0.0)) throw param_error("gln_neg: p must be positive");
  // normalization by quadrature: C = integral of exp(-|y|^p / p) over R
  const quad_result qc = integrate_improper(
      [p](double y) { return std::exp(-std::pow(std::abs(y), p) / p); }, -kInf, kInf,
      1e-12, 1e-12);
  if (!qc.converged || !(qc.value > 0.0))
    throw construction_error("gln_neg: normalization quadrature failed");
  const double C = qc.value;
  const double ip = 1.0 / p;
  // standardized CDF G(y) of density exp(-|y|^p/p)/C via the regularized
  // incomplete gamma: int_0^y exp(-t^p/p) dt = (C/2) * P(1/p, y^p/p).
  auto G = [ip, p](double y) {
    const double tail = 0.5 * gamma_p(ip, std::pow(std::abs(y), p) / p);
    return y >= 0.0 ? 0.5 + tail : 0.5 - tail;
  };
  auto Ginv = [ip, p](double q) {
    const double r = std::pow(p * gamma_p_inv(ip, std::abs(2.0 * q - 1.0)), 1.0 / p);
    return q >= 0.5 ? r : -r;
  };
  nominal_model m;
  m.id = "gln_neg(mu=" + std::to_string(mu) + ",sigma=" + std::to_string(sigma) +
         ",p=" + std::to_string(p) + ")";
  m.hi = 0.0;
  m.pdf = [mu, sigma, p, C](double x) {
    if (x >= 0.0) return 0.0;
    const double y = (std::log(-x) - mu) / sigma;
    return std::exp(-std::pow(std::abs(y), p) / p) / (C * sigma * -x);
  };
  m.logpdf = [mu, sigma, p, C](double x) {
    if (x >= 0.0) return -kInf;
    const double y = (std::log(-x) - mu) / sigma;
    return -std::pow(std::abs(y), p) / p - std::log(C * sigma * -x);
  };
  m.cdf = [mu, sigma, G](double x) {
    if (x >= 0.0) return 1.0;
    return 1.0 - G((std::log(-x) - mu) / sigma);
  };
  m.quantile = [mu, sigma, Ginv](double u) {
    return -std::exp(mu + sigma * Ginv(1.0 - u));
  };
  return m;
}

inline nominal_model make_student_t(double nu) {
  if (!(nu > 0.0)) throw param_error("student_t: nu must be positive");
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * kPi);
  nominal_model m;
  m.id = "student_t(nu=" + std::to_string(nu) + ")";
  m.pdf = [nu, log_norm](double x) {
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
  };
  m.logpdf = [nu, log_norm](double x) {
    return log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  };
  m.cdf = [nu](double x) {
    const double t = inc_beta(0.5 * nu, 0.5, nu / (nu + x * x));
    return x >= 0.0 ? 1.0 - 0.5 * t : 0.5 * t;
  };
  m.quantile = [m_cdf = m.cdf](double u) {
    if (u == 0.5) return 0.0;
    return quantile_by_bisection(m_cdf, -kInf, kInf, u);
  };
  return m;
}

// Two-point lottery: value x with probability p, value 0 otherwise.
inline nominal_model make_lottery(double x, double p) {
  if (!(p > 0.0 && p < 1.0)) throw param_error("lottery: p must lie in (0,1)");
  if (x == 0.0) throw param_error("lottery: x must be nonzero");
  nominal_model m;
  m.id = "lottery(x=" + std::to_string(x) + ",p=" + std::to_string(p) + ")";
  m.discrete = true;
  const double a = std::min(x, 0.0), b = std::max(x, 0.0);
  const double pa = (x < 0.0) ? p : 1.0 - p;
  m.atom_x = {a, b};
  m.atom_p = {pa, 1.0 - pa};
  m.lo = a;
  m.hi = b;
  m.cdf = [a, b, pa](double t) { return t < a ? 0.0 : (t < b ? pa : 1.0); };
  m.quantile = [a, b, pa](double u) { return u <= pa ? a : b; };
  return m;
}

inline nominal_model make_empirical(std::vector<double> values) {
  if (values.empty()) throw param_error("empirical: values must be non-empty");
  std::sort(values.begin(), values.end());
  nominal_model m;
  m.id = "empirical(n=" + std::to_string(values.size()) + ")";
  m.discrete = true;
  m.lo = values.front();
  m.hi = values.back();
  m.atom_x = values;
  m.atom_p.assign(values.size(), 1.0 / static_cast<double>(values.size()));
  m.cdf = [v = m.atom_x](double t) {
    const auto it = std::upper_bound(v.begin(), v.end(), t);
    return static_cast<double>(it - v.begin()) / static_cast<double>(v.size());
  };
  m.quantile = [v = m.atom_x](double u) {
    const double pos = u * static_cast<double>(v.size());
    std::size_t k = static_cast<std::size_t>(std::ceil(pos));
    if (k < 1) k = 1;
    if (k > v.size()) k = v.size();
    return v[k - 1];
  };
  return m;
}

// Positive-axis variant of a negative-axis model (or vice versa): X' = -X.
inline nominal_model reflect_model(nominal_model base) {
  nominal_model m;
  m.id = base.id + "|reflected";
  m.lo = -base.hi;
  m.hi = -base.lo;
  m.discrete = base.discrete;
  if (base.pdf) m.pdf = [f = base.pdf](double x) { return f(-x); };
  if (base.logpdf) m.logpdf = [f = base.logpdf](double x) { return f(-x); };
  // continuous case: P(-X <= x) = 1 - F(-x)
  m.cdf = [f = base.cdf](double x) { return 1.0 - f(-x); };
  m.quantile = [q = base.quantile](double u) { return -q(1.0 - u); };
  if (base.discrete) {
    m.atom_x = base.atom_x;
    m.atom_p = base.atom_p;
    for (auto& a : m.atom_x) a = -a;
    std::reverse(m.atom_x.begin(), m.atom_x.end());
    std::reverse(m.atom_p.begin(), m.atom_p.end());
  }
  return m;
}

// --- registry ----------------------------------------------------------------

inline nominal_model model_from_spec(const std::string& spec) {
  const call_spec c = parse_call(spec);
  auto maybe_reflect = [&c](nominal_model m) {
    return c.get("reflect", 99, 0.0) != 0.0 ? reflect_model(std::move(m)) : m;
  };
  if (c.name == "gaussian" || c.name == "normal")
    return make_gaussian(c.get("mu", 0, 0.0), c.get("sigma", 1, 1.0));
  if (c.name == "lognormal")
    return make_lognormal(c.get("mu", 0, 0.0), c.get("sigma", 1, 1.0));
  if (c.name == "exponential") return make_exponential(c.get("lambda", 0, 1.0));
  if (c.name == "weibull_neg")
    return maybe_reflect(make_weibull_neg(c.get("k", 0), c.get("lambda", 1, 1.0)));
  if (c.name == "pareto_neg")
    return maybe_reflect(make_pareto_neg(c.get("alpha", 0), c.get("xm", 1, 1.0)));
  if (c.name == "gln_neg")
    return maybe_reflect(
        make_gln_neg(c.get("mu", 0, 0.0), c.get("sigma", 1), c.get("p", 2, 2.0)));
  if (c.name == "student_t") return make_student_t(c.get("nu", 0));
  if (c.name == "lottery") return make_lottery(c.get("x", 0), c.get("p", 1));
  throw param_error("unknown nominal model '" + c.name + "'");
}

inline std::vector<std::string> model_catalog() {
  return {"gaussian(mu,sigma)",    "lognormal(mu,sigma)",
          "exponential(lambda)",   "weibull_neg(k,lambda[,reflect])",
          "pareto_neg(alpha,xm[,reflect])", "gln_neg(mu,sigma,p[,reflect])",
          "student_t(nu)",         "lottery(x,p)"};
}

inline double quantile(const nominal_model& model, double u) {
  if (!(u > 0.0 && u < 1.0)) throw domain_error("quantile: u must lie in (0,1)");
  return model.quantile(u);
}

// --- sampling ----------------------------------------------------------------

inline sample_set sample(const nominal_model& model, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream = 0) {
  if (n < 1) throw param_error("sample: n must be at least 1");
  rng_stream rng(seed, stream);
  sample_set s;
  s.seed = seed;
  s.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(model.quantile(rng.uniform01()));
  s.weights.assign(n, 1.0 / static_cast<double>(n));
  return s;
}

inline sample_set importance_sample(const nominal_model& model,
                                    const nominal_model& proposal, std::size_t n,
                                    std::uint64_t seed, std::uint64_t stream = 0) {
  if (n < 1) throw param_error("importance_sample: n must be at least 1");
  if (!model.pdf || !proposal.pdf)
    throw param_error("importance_sample: both models need densities");
  rng_stream rng(seed, stream);
  sample_set s;
  s.seed = seed;
  s.proposal_id = proposal.id;
  s.values.reserve(n);
  s.weights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = proposal.quantile(rng.uniform01());
    const double g = proposal.pdf(y);
    if (!(g > 0.0))
      throw support_error("importance_sample: proposal density vanishes at " +
                          std::to_string(y));
    s.values.push_back(y);
    s.weights.push_back(model.pdf(y) / g);
  }
  const double total = pairwise_sum(s.weights.data(), s.weights.size());
  if (!(total > 0.0))
    throw support_error("importance_sample: all likelihood ratios vanish");
  for (auto& w : s.weights) w /= total;
  return s;
}

}  // namespace phirisk
