// Composite-conjugate elicitation from two-point lotteries: the scaled
// robust values rho(X_p)/p converge to phi2*(phi1*(-x)), the certainty
// equivalents recover the utility u(x) = -phi1*(-x), and the admissibility
// preconditions reject divergences for which the limit argument fails.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include <phirisk/divergence.hpp>
#include <phirisk/elicitation.hpp>
#include <phirisk/risk.hpp>

using namespace phirisk;

TEST_CASE("default probability sequence is dyadic and decreasing") {
  const std::vector<double> p = default_p_seq();
  REQUIRE(p.size() == 13);
  CHECK(p.front() == std::ldexp(1.0, -4));
  CHECK(p.back() == std::ldexp(1.0, -16));
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] == 0.5 * p[i - 1]);
}

TEST_CASE("penalty elicitation recovers the composite conjugate") {
  robust_problem prob;
  prob.form = dual_form::penalty;
  prob.phi1 = make_kl();
  prob.phi2 = make_kl();

  const double x = -1.0;
  // phi1*(-x) = e - 1, phi2*(e - 1) = exp(e - 1) - 1
  const double target = std::exp(std::exp(1.0) - 1.0) - 1.0;
  const elicitation_result r = elicit_composite(prob, x);

  CHECK(r.x == x);
  CHECK(r.target_kind == "composite");
  REQUIRE(r.estimates.size() == 13);
  CHECK_THAT(r.extrapolated, Catch::Matchers::WithinAbs(target, 1e-2));
  // image of phi1* on which phi2* is pinned: [-phi1(0), +inf) = [-1, +inf)
  CHECK_THAT(r.image_lo, Catch::Matchers::WithinAbs(-1.0, 1e-12));
  CHECK(r.image_hi == kInf);

  // the raw estimate at p = 2^-14 is already within 2 percent
  double at14 = kNaN, at6 = kNaN;
  for (const auto& [p, v] : r.estimates) {
    if (std::fabs(p - std::ldexp(1.0, -14)) < 1e-18) at14 = v;
    if (std::fabs(p - std::ldexp(1.0, -6)) < 1e-18) at6 = v;
  }
  REQUIRE(std::isfinite(at14));
  REQUIRE(std::isfinite(at6));
  CHECK(std::fabs(at14 - target) <= 0.02 * std::fabs(target));
  // the error shrinks as p decreases
  CHECK(std::fabs(at14 - target) < std::fabs(at6 - target));
}

TEST_CASE("elicitation at x = 0 returns zero") {
  robust_problem prob;
  prob.form = dual_form::penalty;
  prob.phi1 = make_kl();
  prob.phi2 = make_kl();
  // a lottery paying zero has robust value zero at every p, so a short
  // sequence suffices
  const elicitation_result r =
      elicit_composite(prob, 0.0, {0.25, 0.125, 0.0625});
  CHECK_THAT(r.extrapolated, Catch::Matchers::WithinAbs(0.0, 1e-5));
}

TEST_CASE("shortfall-penalty elicitation reaches the same composite limit") {
  robust_problem prob;
  prob.form = dual_form::shortfall_penalty;
  prob.phi1 = make_kl();
  prob.phi2 = make_kl();
  const double target = std::exp(std::exp(1.0) - 1.0) - 1.0;
  std::vector<double> p_seq;
  for (int k = 4; k <= 12; ++k) p_seq.push_back(std::ldexp(1.0, -k));
  const elicitation_result r = elicit_composite(prob, -1.0, p_seq);
  CHECK_THAT(r.extrapolated, Catch::Matchers::WithinAbs(target, 1e-2));
}

TEST_CASE("certainty equivalents recover the utility") {
  // CVaR at level 0.9: u(x) = -phi1*(-x) with phi1*(s) = 10 s for s > 0
  const elicitation_result cv = ce_recover(make_risk_cvar(0.9), -1.0);
  CHECK(cv.target_kind == "utility");
  CHECK_THAT(cv.extrapolated, Catch::Matchers::WithinAbs(-10.0, 1e-3));

  // entropic at gamma = 1: u(-1) = -(e - 1)
  const elicitation_result en = ce_recover(make_risk_entropic(1.0), -1.0);
  CHECK_THAT(en.extrapolated,
             Catch::Matchers::WithinAbs(1.0 - std::exp(1.0), 1e-3));
}

TEST_CASE("degenerate outer divergence reduces elicitation to the utility") {
  robust_problem prob;
  prob.form = dual_form::penalty;
  prob.phi1 = make_kl();
  prob.phi2 = make_degenerate();  // identity conjugate

  const double x = -1.3;
  std::vector<double> p_seq;
  for (int k = 4; k <= 8; ++k) p_seq.push_back(std::ldexp(1.0, -k));
  const elicitation_result comp = elicit_composite(prob, x, p_seq);
  const elicitation_result util = ce_recover(make_risk_oce(make_kl()), x, p_seq);

  REQUIRE(comp.estimates.size() == util.estimates.size());
  for (std::size_t i = 0; i < p_seq.size(); ++i) {
    CHECK(comp.estimates[i].first == util.estimates[i].first);
    // with the identity outer conjugate the robust value equals the nominal
    // optimized certainty equivalent, so the scaled values match pointwise
    CHECK_THAT(comp.estimates[i].second,
               Catch::Matchers::WithinAbs(-util.estimates[i].second, 1e-6));
  }
  CHECK_THAT(comp.extrapolated,
             Catch::Matchers::WithinAbs(-util.extrapolated, 1e-4));
}

TEST_CASE("elicitation preconditions") {
  robust_problem prob;
  prob.form = dual_form::penalty;
  prob.phi1 = make_kl();
  prob.phi2 = make_kl();

  SECTION("only penalty-type forms are admissible") {
    prob.form = dual_form::ball;
    prob.radius = 0.1;
    CHECK_THROWS_AS(elicit_composite(prob, -1.0), param_error);
  }
  SECTION("bounded conjugate domains are rejected") {
    prob.phi2 = make_chi2();  // phi*(s) finite only for s <= 1
    CHECK_THROWS_AS(elicit_composite(prob, -1.0), precondition_error);
    prob.phi2 = make_kl();
    prob.phi1 = make_chi2();
    CHECK_THROWS_AS(elicit_composite(prob, -1.0), precondition_error);
  }
  SECTION("shortfall variant needs unit composite derivative at zero") {
    prob.form = dual_form::shortfall_penalty;
    prob.phi1 = make_cvar_indicator(0.975);  // (phi2* o phi1*)'(0) = 40
    CHECK_THROWS_AS(elicit_composite(prob, -1.0), precondition_error);
  }
  SECTION("probability sequences must decrease within (0, 1/2]") {
    CHECK_THROWS_AS(elicit_composite(prob, -1.0, {0.6, 0.3}), param_error);
    CHECK_THROWS_AS(elicit_composite(prob, -1.0, {0.25, 0.25}), param_error);
    CHECK_THROWS_AS(elicit_composite(prob, -1.0, {0.25, -0.1}), param_error);
  }
}
