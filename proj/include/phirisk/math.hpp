#pragma once

// Basic numerics shared by every module: error taxonomy, deterministic
// reductions, 1-D minimization/root finding, special functions, and the
// seeded RNG streams used by all samplers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace phirisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// error taxonomy
// ---------------------------------------------------------------------------

struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& m) : std::runtime_error(m) {}
};
struct param_error : std::runtime_error {
  explicit param_error(const std::string& m) : std::runtime_error(m) {}
};
struct construction_error : std::runtime_error {
  explicit construction_error(const std::string& m) : std::runtime_error(m) {}
};
struct quadrature_error : std::runtime_error {
  explicit quadrature_error(const std::string& m) : std::runtime_error(m) {}
};
struct nonfinite_error : std::runtime_error {
  explicit nonfinite_error(const std::string& m) : std::runtime_error(m) {}
};
struct infeasible_error : std::runtime_error {
  explicit infeasible_error(const std::string& m) : std::runtime_error(m) {}
};
struct support_error : std::runtime_error {
  explicit support_error(const std::string& m) : std::runtime_error(m) {}
};
struct degenerate_error : std::runtime_error {
  explicit degenerate_error(const std::string& m) : std::runtime_error(m) {}
};
struct precondition_error : std::runtime_error {
  explicit precondition_error(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// deterministic reduction: fixed pairwise tree, independent of threading
// ---------------------------------------------------------------------------

inline double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

// ---------------------------------------------------------------------------
// 1-D minimization (golden section on convex / unimodal extended-real f)
// ---------------------------------------------------------------------------

struct min1d {
  double x = 0.0;
  double fx = kInf;
};

template <class F>
min1d golden_min(F&& f, double a, double b, double xtol = 1e-12, int max_iter = 300) {
  const double gr = 0.6180339887498949;
  min1d best;
  auto probe = [&](double x) {
    const double fx = f(x);
    if (fx < best.fx) best = {x, fx};
    return fx;
  };
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = probe(c), fd = probe(d);
  for (int i = 0; i < max_iter; ++i) {
    if (b - a <= xtol * (1.0 + std::fabs(a) + std::fabs(b))) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = probe(d);
    }
  }
  probe(0.5 * (a + b));
  return best;
}

// Convex minimization on the line: grow the bracket geometrically (spec'd cap
// of 60 doublings) until the 4-point scan has an interior minimizer, then
// golden-section.  Growth never moves the bracket outside [lo_lim, hi_lim];
// callers whose objective is only trustworthy on a bounded window (e.g. a
// quadrature that cannot distinguish a far-away divergence from zero) pass
// hard limits so the search cannot wander into the untrustworthy region.
template <class F>
min1d minimize_convex_1d(F&& f, double a, double b, double xtol = 1e-12,
                         int max_iter = 300, double lo_lim = -kInf,
                         double hi_lim = kInf) {
  if (!(a < b)) b = a + 1.0;
  a = std::max(a, lo_lim);
  b = std::min(b, hi_lim);
  double fa = f(a), fb = f(b);
  for (int k = 0; k < 60; ++k) {
    const double w = b - a;
    const double m1 = a + w / 3.0, m2 = b - w / 3.0;
    const double f1 = f(m1), f2 = f(m2);
    const double fint = std::min(f1, f2);
    if (std::isfinite(fint) && fint <= fa && fint <= fb) break;
    if (!std::isfinite(fint)) {
      // the thirds scan saw only +inf: sweep a denser grid for any finite
      // value and reseed a small bracket around the best one (the growth
      // steps below then recover the rest of the finite valley); otherwise
      // explore both directions
      double xf = kNaN, ff = kInf;
      const double h = w / 25.0;
      for (int j = 1; j < 25; ++j) {
        const double fx = f(a + h * j);
        if (fx < ff) {
          ff = fx;
          xf = a + h * j;
        }
      }
      if (std::isfinite(ff)) {
        a = xf - h;
        b = xf + h;
      } else if (a == lo_lim && b == hi_lim) {
        break;  // the whole admissible window is +inf
      } else {
        a = std::max(a - w, lo_lim);
        b = std::min(b + w, hi_lim);
      }
      fa = f(a);
      fb = f(b);
      continue;
    }
    if (fa < fint) {
      a = std::max(a - w, lo_lim);
      fa = f(a);
    }
    if (fb < fint) {
      b = std::min(b + w, hi_lim);
      fb = f(b);
    }
  }
  return golden_min(f, a, b, xtol, max_iter);
}

// Smallest eta with h(eta) <= 0 for non-increasing h; geometric bracket growth.
template <class F>
double bisect_nonincreasing_root(F&& h, double lo, double hi, int iters = 200) {
  double w = std::max(1.0, hi - lo);
  for (int k = 0; k < 60 && h(hi) > 0.0; ++k) {
    hi += w;
    w *= 2.0;
  }
  w = std::max(1.0, hi - lo);
  for (int k = 0; k < 60 && h(lo) <= 0.0; ++k) {
    lo -= w;
    w *= 2.0;
  }
  for (int i = 0; i < iters; ++i) {
    if (hi - lo < 1e-13 * (1.0 + std::fabs(hi))) break;
    const double m = 0.5 * (lo + hi);
    if (h(m) <= 0.0)
      hi = m;
    else
      lo = m;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// special functions
// ---------------------------------------------------------------------------

inline double norm_pdf(double x) {
  return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865476); }

// Acklam's rational approximation with one Halley refinement (~1e-15).
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw domain_error("norm_quantile: p outside [0,1]");
  }
  static const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double pl = 0.02425;
  double x;
  if (p < pl) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  } else if (p <= 1.0 - pl) {
    const double q = p - 0.5, r = q * q;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  }
  if (std::fabs(x) < 37.0) {
    const double e = norm_cdf(x) - p;
    const double u = e * 2.5066282746310002 * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// Regularized lower incomplete gamma P(a,x).
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw param_error("gamma_p: need a>0, x>=0");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, del = 1.0 / a, sum = del;
    for (int i = 0; i < 600; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i <= 600; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-290) d = 1e-290;
    c = b + an / c;
    if (std::fabs(c) < 1e-290) c = 1e-290;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// Inverse of gamma_p in x: Wilson-Hilferty start + safeguarded Newton.
inline double gamma_p_inv(double a, double p) {
  if (!(p >= 0.0 && p < 1.0)) throw param_error("gamma_p_inv: p in [0,1)");
  if (p == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  double x;
  {
    const double z = norm_quantile(p);
    const double t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    x = a * t * t * t;
    if (!(x > 0.0)) x = std::exp((std::log(p) + gln + std::log(a)) / a);
  }
  double lo = 0.0, hi = kInf;
  for (int i = 0; i < 100; ++i) {
    const double fx = gamma_p(a, x) - p;
    if (fx > 0.0)
      hi = std::min(hi, x);
    else
      lo = std::max(lo, x);
    const double dens = std::exp(-x + (a - 1.0) * std::log(x) - gln);
    double step = (dens > 0.0) ? fx / dens : 0.0;
    double xn = x - step;
    if (!(xn > lo && (xn < hi))) xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x;
    if (std::fabs(xn - x) < 1e-14 * (1.0 + x)) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

namespace detail {
inline double betacf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < 1e-290) d = 1e-290;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 600; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < 1e-290) d = 1e-290;
    c = 1.0 + aa / c;
    if (std::fabs(c) < 1e-290) c = 1e-290;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < 1e-290) d = 1e-290;
    c = 1.0 + aa / c;
    if (std::fabs(c) < 1e-290) c = 1e-290;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}
}  // namespace detail

// Regularized incomplete beta I_x(a,b).
inline double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
  return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// ---------------------------------------------------------------------------
// seeded RNG streams: documented-state generator, period >= 2^64, with
// independent per-(seed, stream) initialization; uniforms in the open (0,1).
// ---------------------------------------------------------------------------

// ---------------------------------------------------------------------------
// tiny spec-string parser: "name" or "name(a=1,b=2)" or "name(1,2)"
// ---------------------------------------------------------------------------

struct call_spec {
  std::string name;
  std::vector<std::pair<std::string, double>> args;  // name may be empty (positional)

  // positional-or-named lookup; `pos` is the index in the documented order
  double get(const std::string& key, std::size_t pos, double dflt = kNaN) const {
    for (const auto& [k, v] : args)
      if (k == key) return v;
    std::size_t unnamed = 0;
    for (const auto& [k, v] : args) {
      if (!k.empty()) continue;
      if (unnamed == pos) return v;
      ++unnamed;
    }
    if (std::isnan(dflt)) throw param_error(name + ": missing parameter '" + key + "'");
    return dflt;
  }
  bool has(const std::string& key, std::size_t pos) const {
    for (const auto& [k, v] : args)
      if (k == key) return true;
    std::size_t unnamed = 0;
    for (const auto& [k, v] : args)
      if (k.empty() && unnamed++ == pos) return true;
    return false;
  }
};

inline call_spec parse_call(const std::string& raw) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  call_spec out;
  const std::string s = trim(raw);
  const auto lp = s.find('(');
  if (lp == std::string::npos) {
    out.name = s;
    return out;
  }
  if (s.back() != ')') throw param_error("malformed spec string: " + raw);
  out.name = trim(s.substr(0, lp));
  const std::string body = s.substr(lp + 1, s.size() - lp - 2);
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && body[i] == '(') ++depth;
    if (i < body.size() && body[i] == ')') --depth;
    if (i == body.size() || (body[i] == ',' && depth == 0)) {
      const std::string tok = trim(body.substr(start, i - start));
      start = i + 1;
      if (tok.empty()) continue;
      const auto eq = tok.find('=');
      std::string key;
      std::string val = tok;
      if (eq != std::string::npos) {
        key = trim(tok.substr(0, eq));
        val = trim(tok.substr(eq + 1));
      }
      char* end = nullptr;
      const double num = std::strtod(val.c_str(), &end);
      if (end == val.c_str() || *end != '\0')
        throw param_error(out.name + ": cannot parse numeric parameter '" + tok + "'");
      out.args.emplace_back(key, num);
    }
  }
  return out;
}

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class rng_stream {
 public:
  explicit rng_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (stream + 1);
    const std::uint64_t w[4] = {splitmix64(s), splitmix64(s), splitmix64(s),
                                splitmix64(s)};
    std::seed_seq seq{static_cast<std::uint32_t>(w[0]), static_cast<std::uint32_t>(w[0] >> 32),
                      static_cast<std::uint32_t>(w[1]), static_cast<std::uint32_t>(w[1] >> 32),
                      static_cast<std::uint32_t>(w[2]), static_cast<std::uint32_t>(w[2] >> 32),
                      static_cast<std::uint32_t>(w[3]), static_cast<std::uint32_t>(w[3] >> 32)};
    gen_ = std::mt19937_64(seq);
  }

  double uniform01() { return (double(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace phirisk
