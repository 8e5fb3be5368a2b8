// Finiteness analysis: the 30-cell rule table, parameter-dependent cell
// resolution, numeric integral probes, the risk-factor bound reduction, and
// the moment-content checks behind the tailored divergence constructions.

#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <string>
#include <vector>

#include <phirisk/finiteness.hpp>
#include <phirisk/tailored.hpp>

using namespace phirisk;

namespace {

constexpr finiteness_status F = finiteness_status::finite;
constexpr finiteness_status I = finiteness_status::infinite;
constexpr finiteness_status PD = finiteness_status::param_dependent;

}  // namespace

TEST_CASE("full rule table: cvar rows") {
  const std::vector<std::string> cols = {"gaussian", "weibull", "lognormal",
                                         "pareto", "student_t"};
  const finiteness_status kl_row[] = {F, PD, I, I, I};
  const finiteness_status p3_row[] = {F, F, F, PD, PD};
  for (std::size_t j = 0; j < cols.size(); ++j) {
    INFO("column " << cols[j]);
    CHECK(classify("cvar", "kl", cols[j]).status == kl_row[j]);
    CHECK(classify("cvar", "polynomial", cols[j], {{"p", 3.0}}).status == p3_row[j]);
    CHECK(classify("cvar", "polynomial", cols[j], {{"p", 0.5}}).status == I);
  }
}

TEST_CASE("full rule table: entropic rows") {
  const std::vector<std::string> cols = {"gaussian", "weibull", "lognormal",
                                         "pareto", "student_t"};
  const finiteness_status p3_row[] = {F, PD, I, I, I};
  for (std::size_t j = 0; j < cols.size(); ++j) {
    INFO("column " << cols[j]);
    CHECK(classify("entropic", "kl", cols[j]).status == I);
    CHECK(classify("entropic", "polynomial", cols[j], {{"p", 3.0}}).status ==
          p3_row[j]);
    CHECK(classify("entropic", "polynomial", cols[j], {{"p", 0.5}}).status == I);
  }
}

TEST_CASE("parameter-dependent cells resolve with parameters") {
  // cvar / kl / weibull: shape decides; k = 1 compares 1/(1-alpha) with 1/lambda
  CHECK(classify("cvar", "kl", "weibull", {{"k", 2.0}}).status == F);
  CHECK(classify("cvar", "kl", "weibull", {{"k", 0.5}}).status == I);
  CHECK(classify("cvar", "kl", "weibull",
                 {{"k", 1.0}, {"lambda", 0.02}, {"alpha", 0.975}})
            .status == F);
  CHECK(classify("cvar", "kl", "weibull",
                 {{"k", 1.0}, {"lambda", 0.05}, {"alpha", 0.975}})
            .status == I);

  // cvar / polynomial(3) / pareto: finite iff p/(p-1) - (alpha0+1) < -1
  CHECK(classify("cvar", "polynomial", "pareto", {{"p", 3.0}, {"alpha0", 2.0}})
            .status == F);
  CHECK(classify("cvar", "polynomial", "pareto", {{"p", 3.0}, {"alpha0", 1.2}})
            .status == I);
  CHECK(classify("cvar", "polynomial", "pareto", {{"p", 3.0}, {"alpha0", 1.5}})
            .status == I);  // boundary case is not integrable

  // cvar / polynomial(3) / student_t: same exponent rule with nu
  CHECK(classify("cvar", "polynomial", "student_t", {{"p", 3.0}, {"nu", 3.0}})
            .status == F);
  CHECK(classify("cvar", "polynomial", "student_t", {{"p", 3.0}, {"nu", 1.0}})
            .status == I);

  // entropic / polynomial(3) / weibull k=1: finite iff p/(p-1) < 1/lambda
  CHECK(classify("entropic", "polynomial", "weibull",
                 {{"p", 3.0}, {"k", 1.0}, {"lambda", 0.5}})
            .status == F);
  CHECK(classify("entropic", "polynomial", "weibull",
                 {{"p", 3.0}, {"k", 1.0}, {"lambda", 1.0}})
            .status == I);
}

TEST_CASE("identifier normalization and unsupported inputs") {
  CHECK(classify("CVaR", "Kullback-Leibler", "Log-Normal").status == I);
  CHECK(classify("cvar", "poly", "Student", {{"p", 3.0}}).status == PD);
  CHECK(classify("cvar", "kl", "pareto_neg").status == I);
  CHECK(classify("var", "kl", "gaussian").status == finiteness_status::unknown);
  CHECK(classify("cvar", "hellinger", "gaussian").status ==
        finiteness_status::unknown);
  CHECK(classify("cvar", "kl", "cauchy").status == finiteness_status::unknown);
  CHECK(classify("cvar", "polynomial", "gaussian").status ==
        finiteness_status::unknown);  // missing p
  CHECK(to_string(F) == "Finite");
  CHECK(to_string(PD) == "ParamDependent");
}

TEST_CASE("classify_table emits the 15-cell grid per risk measure") {
  for (const std::string risk : {"cvar", "entropic"}) {
    const std::vector<table_cell> table = classify_table(risk);
    REQUIRE(table.size() == 15);
    for (const table_cell& c : table) {
      INFO(risk << " " << c.divergence_label << " x " << c.nominal);
      CHECK(c.risk == risk);
      CHECK(c.v.status ==
            classify(risk, c.divergence_label.substr(0, c.divergence_label.find(' ')),
                     c.nominal,
                     c.divergence_label == "kl"
                         ? std::map<std::string, double>{}
                         : std::map<std::string, double>{
                               {"p", c.divergence_label == "polynomial p>1" ? 3.0
                                                                            : 0.5}})
                .status);
    }
  }
}

TEST_CASE("numeric probe certifies finite cells with a witness") {
  const finiteness_verdict v = numeric_probe(
      make_cvar_indicator(0.975), make_polynomial(3.0), make_pareto_neg(2.0, 1.0));
  CHECK(v.status == F);
  CHECK(v.has_witness);

  const finiteness_verdict g = numeric_probe(make_cvar_indicator(0.975), make_kl(),
                                             make_gaussian(0.0, 1.0));
  CHECK(g.status == F);
  CHECK(g.has_witness);
}

TEST_CASE("numeric probe returns unknown when every grid point diverges") {
  // entropic against a Gaussian through a KL outer layer: double-exponential
  // growth beats the Gaussian tail at every probe point
  const finiteness_verdict v =
      numeric_probe(make_scaled_kl(1.0), make_kl(), make_gaussian(0.0, 1.0));
  CHECK(v.status == finiteness_status::unknown);
  CHECK_FALSE(v.has_witness);
}

TEST_CASE("tailored divergence restores finiteness against its target tail") {
  const finiteness_verdict v =
      numeric_probe(make_cvar_indicator(0.975), make_gl_cvar(1.0, 2.0, 2.0),
                    make_gln_neg(0.0, 1.0, 2.0));
  CHECK(v.status == F);
  CHECK(v.has_witness);
}

TEST_CASE("risk-factor bound reduces to per-marginal integrals") {
  const finiteness_verdict ok = risk_factor_bound_check(
      make_cvar_indicator(0.975), make_polynomial(3.0),
      {make_pareto_neg(2.0, 1.0)}, 1.0, 1);
  CHECK(ok.status == F);

  const finiteness_verdict bad = risk_factor_bound_check(
      make_cvar_indicator(0.975), make_kl(), {make_lognormal(0.0, 1.0)}, 1.0, 1);
  CHECK(bad.status == finiteness_status::unknown);

  CHECK_THROWS_AS(risk_factor_bound_check(make_kl(), make_kl(), {}, 1.0, 1),
                  param_error);
}

TEST_CASE("moment content of the gl-cvar ball around its log-normal target") {
  // densities with finite d-th moment lie inside the ball; a polynomial tail
  // |x|^{-(t+1)} with t in (1, d) lies outside
  const nominal_model gln = make_gln_neg(0.0, 1.0, 2.0);
  const divergence glc = make_gl_cvar(1.0, 2.0, 2.0);
  CHECK(moment_content_check(glc, gln, 2.0, make_weibull_neg(2.0, 1.0)) ==
        moment_verdict::inside);
  CHECK(moment_content_check(glc, gln, 2.0, make_pareto_neg(3.0, 1.0)) ==
        moment_verdict::inside);  // heavier than the target but 2nd moment finite
  CHECK(moment_content_check(glc, gln, 2.0, make_pareto_neg(1.5, 1.0)) ==
        moment_verdict::outside);

  CHECK_THROWS_AS(
      moment_content_check(glc, gln, 1.0, make_weibull_neg(2.0, 1.0)),
      param_error);
}

TEST_CASE("moment content of the Weibull-power ball around a heavy Weibull") {
  const nominal_model wb = make_weibull_neg(0.8, 1.0);
  const divergence wp = make_weibull_power(0.8, 2.0);
  CHECK(moment_content_check(wp, wb, 2.0, make_pareto_neg(3.0, 1.0)) ==
        moment_verdict::inside);
  CHECK(moment_content_check(wp, wb, 2.0, make_pareto_neg(1.5, 1.0)) ==
        moment_verdict::outside);
}

TEST_CASE("moment content of the entropic-Weibull ball") {
  // Weibull(lambda, l) with 1 < l < k stays inside the ball around
  // Weibull(lambda, k); a polynomial tail escapes it
  const nominal_model wb3 = make_weibull_neg(3.0, 1.0);
  const divergence ew = make_entropic_weibull(1.0, 1.0, 3.0);
  CHECK(moment_content_check(ew, wb3, 2.0, make_weibull_neg(2.0, 1.0)) ==
        moment_verdict::inside);
  CHECK(moment_content_check(ew, wb3, 2.0, make_weibull_neg(1.5, 1.0)) ==
        moment_verdict::inside);
  CHECK(moment_content_check(ew, wb3, 2.0, make_pareto_neg(2.0, 1.0)) ==
        moment_verdict::outside);
}
