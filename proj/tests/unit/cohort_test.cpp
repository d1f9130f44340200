#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "gbs/cohort.hpp"
#include "gbs/error.hpp"
#include "gbs/rng.hpp"

using namespace gbs;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::vector<SubjectRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_cohort(in, "c.csv");
}

const char* kHeader = "id,sex,kl,tkr8y,laterality,mesh_path\n";

// Brute-force U: pairs with a > b, ties count one half.
double brute_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

}  // namespace

TEST_SUITE("cohort") {

TEST_CASE("well-formed cohort") {
  const auto r = parse(std::string(kHeader) +
                       "a1,F,0,0,left,m/a1.off\n"
                       "\"b,2\",male,3,1,R,\"dir with, comma/b.off\"\n"
                       "c3,female,4,,left,c.obj\n");
  REQUIRE(r.size() == 3);
  CHECK(r[0].sex == Sex::female);
  CHECK(r[0].tkr_within_8y == false);
  CHECK(!r[0].needs_mirroring());
  CHECK(r[1].id == "b,2");
  CHECK(r[1].kl_grade == 3);
  CHECK(r[1].needs_mirroring());
  CHECK(r[1].mesh_path == "dir with, comma/b.off");
  CHECK(!r[2].tkr_within_8y.has_value());

  std::ostringstream out;
  write_cohort(out, r);
  const auto again = parse(out.str());
  REQUIRE(again.size() == 3);
  CHECK(again[1].id == r[1].id);
  CHECK(again[1].mesh_path == r[1].mesh_path);
  CHECK(again[2].tkr_within_8y == r[2].tkr_within_8y);
}

TEST_CASE("cohort errors") {
  CHECK(code_of([] { parse(std::string(kHeader) + "a,F,5,0,left,x\n"); }) == ErrorCode::InvalidKL);
  CHECK(code_of([] { parse(std::string(kHeader) + "a,F,1,0,left,x\na,M,2,1,left,y\n"); }) ==
        ErrorCode::DuplicateId);
  CHECK(code_of([] { parse("id,sex,kl\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse(std::string(kHeader) + "a,F,1.5,0,left,x\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { parse(std::string(kHeader) + "a,X,1,0,left,x\n"); }) ==
        ErrorCode::UnknownSex);
  CHECK(code_of([] { parse(std::string(kHeader) + "a,F,1,maybe,left,x\n"); }) ==
        ErrorCode::ParseError);
  try {
    parse(std::string(kHeader) + "a,F,1,0,left,x\nb,F,9,0,left,x\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("c.csv:3") != std::string::npos);
  }
  CHECK(code_of([] { load_cohort("/nonexistent/cohort.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("split by OA is a partition") {
  std::vector<SubjectRecord> r;
  for (int k = 0; k <= 4; ++k) r.push_back({std::to_string(k), Sex::female, k, {}, {}, ""});
  const OaSplit s = split_by_oa(r);
  CHECK(s.nonoa == std::vector<std::string>{"0", "1"});
  CHECK(s.oa == std::vector<std::string>{"2", "3", "4"});
  for (auto& x : r) x.kl_grade = 0;
  CHECK(split_by_oa(r).oa.empty());
  CHECK(split_by_oa({}).nonoa.empty());
}

TEST_CASE("logistic regression on symmetric data has zero intercept") {
  std::vector<double> x;
  std::vector<bool> y;
  for (int i = 0; i < 50; ++i) {
    const bool noisy = i % 5 == 0;  // label noise 0.2 on both sides
    x.push_back(1.0);
    y.push_back(!noisy);
    x.push_back(-1.0);
    y.push_back(noisy);
  }
  const LogisticModel m = fit_logistic(x, y);
  CHECK(m.converged);
  CHECK(std::abs(m.beta0) < 1e-6);
  CHECK(m.beta1 == doctest::Approx(std::log(4.0)).epsilon(1e-8));
}

TEST_CASE("logistic regression recovers generating coefficients") {
  Rng rng(3);
  std::vector<double> x;
  std::vector<bool> y;
  for (int i = 0; i < 5000; ++i) {
    const double s = rng.normal(2.0, 2.5);
    x.push_back(s);
    y.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(4.0 - 0.8 * s))));
  }
  const LogisticModel m = fit_logistic(x, y);
  CHECK(std::abs(m.beta0 + 4.0) < 3 * m.se_beta0);
  CHECK(std::abs(m.beta1 - 0.8) < 3 * m.se_beta1);
  for (std::size_t k = 1; k < m.log_likelihood_trace.size(); ++k)
    CHECK(m.log_likelihood_trace[k] >= m.log_likelihood_trace[k - 1]);
  CHECK(m.log_likelihood == m.log_likelihood_trace.back());

  // predicted risk tracks the empirical proportion per decile
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  for (int d = 0; d < 10; ++d) {
    double pred = 0, obs = 0;
    for (int k = d * 500; k < (d + 1) * 500; ++k) {
      pred += predict_risk(m, x[order[k]]);
      obs += y[order[k]] ? 1 : 0;
    }
    CHECK(std::abs(pred - obs) / 500 < 0.05);
  }
}

TEST_CASE("logistic separation and argument errors") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(code_of([&] { fit_logistic(x, {true, true, true, true}); }) == ErrorCode::SeparableData);
  CHECK(code_of([&] { fit_logistic(x, {false, false, true, true}); }) ==
        ErrorCode::SeparableData);
  CHECK(code_of([&] { fit_logistic(x, {true, true, false, false}); }) ==
        ErrorCode::SeparableData);
  CHECK(code_of([&] { fit_logistic(x, {true}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { fit_logistic({}, {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("predicted risk") {
  LogisticModel m;
  m.beta0 = -4.0;
  m.beta1 = 0.8;
  CHECK(predict_risk(m, 5.0) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double s = -50; s <= 50; s += 0.5) {
    const double p = predict_risk(m, s);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("Mann-Whitney examples") {
  CHECK(mann_whitney_u(std::vector{1.0, 2.0, 3.0}, std::vector{4.0, 5.0, 6.0}).u_a == 0.0);
  const auto r = mann_whitney_u(std::vector{1.0, 3.0}, std::vector{2.0, 4.0});
  CHECK(r.u_a == 1.0);
  CHECK(r.u_b == 3.0);
  const std::vector<double> same{1, 2, 3, 4, 5, 6};
  CHECK(mann_whitney_u(same, same).p_value > 0.9);
  CHECK(code_of([] { mann_whitney_u(std::vector{1.0}, std::vector{1.0, 2.0}); }) ==
        ErrorCode::InsufficientData);
}

TEST_CASE("Mann-Whitney agrees with pair enumeration, with ties") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(2 + rng.below(49)), b(2 + rng.below(49));
    for (double& v : a) v = double(rng.below(12));
    for (double& v : b) v = double(rng.below(12));
    const auto r = mann_whitney_u(a, b);
    CHECK(r.u_a == brute_u(a, b));
    CHECK(r.u_b == brute_u(b, a));
    CHECK(r.u_a + r.u_b == double(a.size() * b.size()));
    CHECK(mann_whitney_u(b, a).p_value == doctest::Approx(r.p_value).epsilon(1e-14));
  }
}

TEST_CASE("Mann-Whitney p-value against a reference value") {
  // scipy.stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
  const std::vector<double> a{1.1, 2.3, 2.3, 4.0, 5.5, 6.1, 7.2};
  const std::vector<double> b{0.2, 0.9, 2.3, 1.5, 3.3, 0.1};
  const auto r = mann_whitney_u(a, b);
  CHECK(r.u_a == 36.0);
  CHECK(r.p_value == doctest::Approx(0.037259909504905916).epsilon(1e-12));
}

TEST_CASE("KL-normalized histogram") {
  Rng rng(5);
  std::vector<double> s;
  std::vector<int> kl;
  for (int i = 0; i < 1000; ++i) {
    s.push_back(rng.uniform(0, 10));
    kl.push_back(0);
  }
  for (int i = 0; i < 10; ++i) {
    s.push_back(rng.uniform(0, 10));
    kl.push_back(3);
  }
  s.push_back(-5.0);  // clamped into the first bin
  kl.push_back(3);
  const std::vector<double> edges{0, 2.5, 5, 7.5, 10};
  const KlHistogram h = kl_normalized_distribution(s, kl, edges);
  REQUIRE(h.per_grade.size() == 2);
  double total0 = 0, total3 = 0;
  for (double m : h.per_grade.at(0)) total0 += m;
  for (double m : h.per_grade.at(3)) total3 += m;
  CHECK(std::abs(total0 - total3) < 1e-12);
  CHECK(total0 + total3 == doctest::Approx(1.0));
  for (double m : h.per_grade.at(0)) CHECK(m == doctest::Approx(0.125).epsilon(0.15));

  const KlHistogram single = kl_normalized_distribution(std::vector{1.0, 2.0, 3.0, 4.0},
                                                        std::vector{1, 1, 1, 1},
                                                        std::vector{0.0, 2.5, 5.0});
  CHECK(single.per_grade.at(1) == std::vector<double>{0.5, 0.5});

  CHECK(code_of([&] { kl_normalized_distribution(s, kl, std::vector{1.0}); }) ==
        ErrorCode::EmptyBinEdges);
  CHECK(code_of([&] { kl_normalized_distribution(s, kl, std::vector{1.0, 0.0}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("risk summary") {
  CHECK(risk_summary(std::vector{0.1, 0.2, 0.3}).median == doctest::Approx(0.2));
  const RiskSummary c = risk_summary(std::vector(7, 0.37));
  for (double v : {c.median, c.mean, c.p5, c.p25, c.p75, c.p95}) CHECK(v == 0.37);
  std::vector<double> r(100);
  for (int i = 0; i < 100; ++i) r[i] = 100 - i;
  const RiskSummary s = risk_summary(r);
  CHECK(s.p25 == doctest::Approx(25.75));
  CHECK(s.median == doctest::Approx(50.5));
  CHECK(code_of([] { risk_summary({}); }) == ErrorCode::EmptyInput);
}

}
