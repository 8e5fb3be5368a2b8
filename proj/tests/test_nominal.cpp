// Nominal models: quantile/cdf consistency, Kolmogorov-Smirnov fit of the
// samplers, lotteries, empirical models, and importance sampling.

#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <vector>

#include <phirisk/nominal.hpp>

using namespace phirisk;

namespace {

// two-sided KS statistic of a draw against the model cdf
double ks_statistic(const nominal_model& m, std::size_t n, std::uint64_t seed) {
  sample_set s = sample(m, n, seed, /*stream=*/2);
  std::sort(s.values.begin(), s.values.end());
  double d = 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = m.cdf(s.values[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i + 1) * inv));
    d = std::max(d, std::fabs(f - static_cast<double>(i) * inv));
  }
  return d;
}

}  // namespace

TEST_CASE("samplers pass a KS fit test at 1e5 draws for every family") {
  const std::vector<std::string> specs = {
      "gaussian(mu=0,sigma=1)",   "lognormal(mu=0,sigma=1)",
      "exponential(lambda=1)",    "weibull_neg(k=2,lambda=1)",
      "weibull_neg(k=0.8,lambda=1)", "pareto_neg(alpha=2,xm=1)",
      "gln_neg(mu=0,sigma=1,p=2)",   "student_t(nu=5)"};
  for (const std::string& spec : specs) {
    const nominal_model m = model_from_spec(spec);
    INFO(spec);
    CHECK(ks_statistic(m, 100000, 31) <= 0.01);
  }
}

TEST_CASE("quantile and cdf are mutually inverse") {
  const std::vector<std::string> specs = {
      "gaussian(mu=1,sigma=2)", "lognormal(mu=0,sigma=1)",
      "exponential(lambda=0.5)", "weibull_neg(k=1.5,lambda=2)",
      "pareto_neg(alpha=3,xm=2)", "gln_neg(mu=0,sigma=1,p=3)",
      "student_t(nu=4)"};
  for (const std::string& spec : specs) {
    const nominal_model m = model_from_spec(spec);
    for (double u : {0.01, 0.2, 0.5, 0.8, 0.99}) {
      INFO(spec << " u=" << u);
      CHECK(m.cdf(m.quantile(u)) == Catch::Approx(u).margin(1e-7));
    }
  }
}

TEST_CASE("pinned quantiles") {
  const nominal_model ln = make_lognormal(0.0, 1.0);
  CHECK(ln.quantile(0.99) == Catch::Approx(10.240047).margin(1e-3));
  CHECK(ln.quantile(0.04) == Catch::Approx(std::exp(norm_quantile(0.04))).margin(1e-9));

  // negated Pareto: the 0.025 lower quantile is -sqrt(40)
  const nominal_model pa = make_pareto_neg(2.0, 1.0);
  CHECK(pa.quantile(0.025) == Catch::Approx(-std::sqrt(40.0)).margin(1e-9));
  CHECK(pa.quantile(0.5) == Catch::Approx(-std::sqrt(2.0)).margin(1e-12));
  CHECK(pa.cdf(-1.0) == Catch::Approx(1.0).margin(1e-15));

  const nominal_model g = model_from_spec("gaussian(mu=1,sigma=2)");
  CHECK(g.quantile(0.5) == Catch::Approx(1.0).margin(1e-12));

  const nominal_model t5 = make_student_t(5.0);
  CHECK(t5.cdf(0.0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(t5.quantile(t5.cdf(1.3)) == Catch::Approx(1.3).margin(1e-7));
}

TEST_CASE("lottery model frequencies and support") {
  const nominal_model lot = make_lottery(-3.0, 0.25);
  REQUIRE(lot.discrete);
  sample_set s = sample(lot, 1000000, 5);
  double freq = 0.0;
  for (double v : s.values)
    if (v == -3.0) freq += 1.0;
  freq /= static_cast<double>(s.values.size());
  CHECK(freq == Catch::Approx(0.25).margin(0.002));
  for (double v : s.values) REQUIRE((v == -3.0 || v == 0.0));

  CHECK_THROWS_AS(make_lottery(5.0, 1.0), param_error);
  CHECK_THROWS_AS(make_lottery(0.0, 0.5), param_error);

  // a one-point empirical model is the constant x
  const nominal_model unit = make_empirical({5.0});
  CHECK(unit.quantile(0.3) == 5.0);
  CHECK(unit.quantile(0.9999) == 5.0);
}

TEST_CASE("empirical model quantile convention") {
  const nominal_model e = make_empirical({4.0, 1.0, 3.0, 2.0});
  CHECK(e.quantile(0.5) == 2.0);
  CHECK(e.quantile(0.51) == 3.0);
  CHECK(e.quantile(0.25) == 1.0);
  CHECK(e.quantile(0.99) == 4.0);
}

TEST_CASE("sampling is deterministic per (seed, stream)") {
  const nominal_model m = make_gaussian(0.0, 1.0);
  const sample_set a = sample(m, 100, 7, 3), b = sample(m, 100, 7, 3);
  const sample_set c = sample(m, 100, 7, 4);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("importance sampling reweights to the target mean") {
  const nominal_model target = make_pareto_neg(2.0, 1.0);   // mean -2
  const nominal_model proposal = make_pareto_neg(1.0, 1.0); // density 1/x^2
  const sample_set s = importance_sample(target, proposal, 100000, 11);
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    total += s.weights[i];
    mean += s.weights[i] * s.values[i];
  }
  CHECK(total == Catch::Approx(1.0).margin(1e-12));
  CHECK(mean == Catch::Approx(-2.0).margin(0.05));
  CHECK(s.proposal_id == proposal.id);
}

TEST_CASE("model_from_spec rejects unknown names and bad parameters") {
  CHECK_THROWS_AS(model_from_spec("cauchy(0,1)"), param_error);
  CHECK_THROWS_AS(model_from_spec("gaussian(mu=0,sigma=-1)"), param_error);
  CHECK_THROWS_AS(make_pareto_neg(0.0, 1.0), param_error);
  CHECK_FALSE(model_catalog().empty());
}
