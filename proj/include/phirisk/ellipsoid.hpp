#pragma once

// Ellipsoid method with deep cuts for low-dimensional (n <= 12) convex
// minimization over a box.  The oracle returns either a finite value plus a
// subgradient, or a separating cut (for +infinity regions of the objective).
// A certified lower bound is maintained from the subgradient inequality
//   f(y) >= f(c) - sqrt(g' P g)   for all y in the current ellipsoid,
// which is valid because every update retains all candidate minimizers.

#include <array>
#include <cmath>
#include <functional>

#include "math.hpp"

namespace phirisk {

struct cut_info {
  double value = kInf;            // objective value (ignored when is_cut)
  bool is_cut = false;            // true: infeasible / +inf point with a cut
  std::array<double, 12> g{};     // subgradient or cut normal
  double margin = 0.0;            // positive violation h(c) for deep cuts
};

struct ellipsoid_result {
  std::array<double, 12> x{};     // best point seen
  double value = kInf;
  double lower_bound = -kInf;
  long iterations = 0;
  bool converged = false;
};

inline ellipsoid_result ellipsoid_minimize(
    int n, const double* lo, const double* hi,
    const std::function<cut_info(const double*)>& oracle, double tol = 1e-7,
    long max_iter = 200000) {
  std::array<double, 12> c{}, b{}, g{};
  std::array<double, 144> P{};  // row-major n x n
  auto at = [n](std::array<double, 144>& M, int i, int j) -> double& {
    return M[static_cast<std::size_t>(i * n + j)];
  };
  // ellipsoid circumscribing the box: P = n * diag(r_i^2)
  for (int i = 0; i < n; ++i) {
    c[static_cast<std::size_t>(i)] = 0.5 * (lo[i] + hi[i]);
    const double r = std::max(0.5 * (hi[i] - lo[i]), 1e-12);
    at(P, i, i) = static_cast<double>(n) * r * r;
  }

  ellipsoid_result res;
  const double nn = static_cast<double>(n);
  for (long it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    double h = 0.0;   // deep-cut height
    double fc = kInf; // objective at the current center (when evaluated)
    bool have_value = false;
    // box feasibility first so the oracle only sees in-box points
    int viol = -1;
    for (int i = 0; i < n; ++i) {
      const double ci = c[static_cast<std::size_t>(i)];
      if (ci < lo[i] || ci > hi[i]) {
        viol = i;
        break;
      }
    }
    if (viol >= 0) {
      g.fill(0.0);
      const double ci = c[static_cast<std::size_t>(viol)];
      g[static_cast<std::size_t>(viol)] = ci > hi[viol] ? 1.0 : -1.0;
      h = ci > hi[viol] ? ci - hi[viol] : lo[viol] - ci;
    } else {
      const cut_info info = oracle(c.data());
      if (info.is_cut) {
        g = info.g;
        h = std::max(info.margin, 0.0);
      } else {
        g = info.g;
        fc = info.value;
        have_value = true;
        if (fc < res.value) {
          res.value = fc;
          res.x = c;
        }
        h = std::max(fc - res.value, 0.0);  // keep {f <= best}
      }
    }

    // b = P g, gPg = g' P g
    double gPg = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        s += at(P, i, j) * g[static_cast<std::size_t>(j)];
      b[static_cast<std::size_t>(i)] = s;
      gPg += s * g[static_cast<std::size_t>(i)];
    }
    if (!(gPg > 0.0) || !std::isfinite(gPg)) break;  // ellipsoid degenerated
    const double norm = std::sqrt(gPg);

    if (have_value && std::isfinite(fc)) {
      res.lower_bound = std::max(res.lower_bound, fc - norm);
      if (std::isfinite(res.value) && res.value - res.lower_bound <= tol) {
        res.converged = true;
        break;
      }
    }

    double alpha = h / norm;
    if (alpha >= 1.0) {
      // the half-space strictly excludes the whole ellipsoid: nothing better
      // than the incumbent remains
      if (std::isfinite(res.value)) {
        res.lower_bound = std::max(res.lower_bound, res.value);
        res.converged = true;
      }
      break;
    }
    if (alpha < 0.0) alpha = 0.0;

    const double tau = (1.0 + nn * alpha) / (nn + 1.0);
    const double delta = (nn * nn / (nn * nn - 1.0)) * (1.0 - alpha * alpha);
    const double sig = 2.0 * (1.0 + nn * alpha) / ((nn + 1.0) * (1.0 + alpha));
    for (int i = 0; i < n; ++i)
      c[static_cast<std::size_t>(i)] -= tau * b[static_cast<std::size_t>(i)] / norm;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        at(P, i, j) = delta * (at(P, i, j) - sig * b[static_cast<std::size_t>(i)] *
                                                 b[static_cast<std::size_t>(j)] / gPg);
    // re-symmetrize to fight round-off drift
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double m = 0.5 * (at(P, i, j) + at(P, j, i));
        at(P, i, j) = m;
        at(P, j, i) = m;
      }
  }
  return res;
}

}  // namespace phirisk
