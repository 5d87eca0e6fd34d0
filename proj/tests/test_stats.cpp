#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sandfire/prng.hpp"
#include "sandfire/stats.hpp"

using namespace sandfire;
using Catch::Approx;

namespace {

std::vector<Point> florida_q1_points() {
  const double sizes[] = {9.9, 99, 299, 999, 4999, 10000};
  const double means[] = {2572.67, 795.83, 109.50, 61.83, 23.17, 10.50};
  std::vector<Point> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({std::log10(sizes[i]), std::log10(means[i])});
  return pts;
}

}  // namespace

TEST_CASE("student_t_tail exact anchor points", "[stats]") {
  CHECK(student_t_tail(0.0, 1) == 0.5);
  CHECK(student_t_tail(0.0, 7) == 0.5);
  CHECK(student_t_tail(0.0, 200) == 0.5);
  CHECK(student_t_tail(1.0, 1) == 0.25);
  CHECK(student_t_tail(1.654, 8) == Approx(0.06836269327754727).margin(1e-10));
}

TEST_CASE("student_t_tail matches published critical values", "[stats]") {
  struct Anchor {
    int df;
    double t;
    double alpha;
  };
  const Anchor anchors[] = {
      {1, 6.3138, 0.05},  {1, 12.7062, 0.025}, {2, 2.9200, 0.05},  {2, 4.3027, 0.025},
      {8, 1.8595, 0.05},  {8, 2.3060, 0.025},  {30, 1.6973, 0.05}, {30, 2.0423, 0.025},
      {120, 1.6577, 0.05}, {120, 1.9799, 0.025},
  };
  for (const Anchor& a : anchors) {
    INFO("df=" << a.df << " t=" << a.t);
    CHECK(student_t_tail(a.t, a.df) == Approx(a.alpha).margin(5e-5));
  }
}

TEST_CASE("student_t_tail symmetry and monotonicity", "[stats]") {
  SplitMix64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const double t = (rng.uniform01() - 0.5) * 100.0;
    const int df = 1 + static_cast<int>(rng.bounded(200));
    const double upper = student_t_tail(t, df);
    const double lower = student_t_tail(-t, df);
    REQUIRE(upper >= 0.0);
    REQUIRE(upper <= 1.0);
    REQUIRE(std::fabs(upper + lower - 1.0) <= 1e-12);
  }
  for (int df : {1, 2, 8, 30, 120}) {
    double prev = 1.0;
    for (double t = -50.0; t <= 50.0; t += 0.5) {
      const double p = student_t_tail(t, df);
      REQUIRE(p <= prev + 1e-15);
      prev = p;
    }
  }
}

TEST_CASE("student_t_tail absolute accuracy across the df range", "[stats]") {
  // reference values from an independent high-precision implementation
  struct Ref {
    int df;
    double t;
    double tail;
  };
  const Ref refs[] = {
      {1, 0.5, 0.3524163823495668},      {1, 3.7, 0.08402226282394758},
      {1, 12.3, 0.025822059396594627},   {1, 50.0, 0.006365349100972797},
      {2, 0.5, 0.33333333333333337},     {2, 3.7, 0.032953355097183355},
      {2, 12.3, 0.0032725006362377784},  {2, 50.0, 0.00019988007994404028},
      {5, 0.5, 0.3191494358204645},      {5, 3.7, 0.006999703487849554},
      {5, 12.3, 3.143934151742582e-05},  {5, 50.0, 3.023878813300617e-08},
      {10, 0.5, 0.31394680287148646},    {10, 3.7, 0.002054248410020105},
      {10, 12.3, 1.157621500105024e-07}, {10, 50.0, 1.2371551646513438e-13},
      {50, 0.5, 0.30963428375588564},    {50, 3.7, 0.00026854492762050993},
      {50, 12.3, 4.8667090002003895e-17}, {50, 50.0, 1.1591310411197645e-44},
      {100, 0.5, 0.30908678291544334},   {100, 3.7, 0.00017637331839267934},
      {100, 12.3, 4.994309277976189e-22}, {100, 50.0, 7.23608183988067e-73},
      {200, 0.5, 0.3088123761582304},    {200, 3.7, 0.00013930996601172792},
      {200, 12.3, 1.4669091430606866e-26}, {200, 50.0, 2.7102877398912e-115},
  };
  for (const Ref& r : refs) {
    INFO("df=" << r.df << " t=" << r.t);
    CHECK(student_t_tail(r.t, r.df) == Approx(r.tail).margin(1e-10));
    CHECK(student_t_tail(-r.t, r.df) == Approx(1.0 - r.tail).margin(1e-10));
  }
}

TEST_CASE("student_t_tail approaches the normal limit for large df", "[stats]") {
  for (int df : {100, 150, 200}) {
    const double p = student_t_tail(1.96, df);
    CHECK(p >= 0.024);
    CHECK(p <= 0.027);
  }
}

TEST_CASE("student_t_tail rejects df < 1", "[stats]") {
  CHECK_THROWS_AS(student_t_tail(1.0, 0), ConfigError);
}

TEST_CASE("ols_fit on a perfect line", "[stats]") {
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i), static_cast<double>(i)});
  const RegressionFit fit = ols_fit(pts);
  CHECK(fit.slope == Approx(1.0).margin(1e-14));
  CHECK(fit.se_slope == 0.0);
  CHECK(fit.r_squared == 1.0);
  CHECK(fit.p_two_sided == 0.0);
}

TEST_CASE("ols_fit reproduces the Florida quintile 1 metrics", "[stats]") {
  const RegressionFit fit = ols_fit(florida_q1_points());
  CHECK(fit.n == 6);
  CHECK(fit.slope == Approx(-0.806).margin(0.01));
  CHECK(fit.se_slope == Approx(0.071).margin(0.003));
  CHECK(fit.r_squared == Approx(0.970).margin(0.005));
  CHECK(fit.p_two_sided == Approx(0.00035).margin(5e-5));
  // pinned against an independent long-double evaluation
  CHECK(fit.slope == Approx(-0.8049101865999815).margin(1e-12));
  CHECK(fit.se_slope == Approx(0.07093045759578098).margin(1e-12));
  CHECK(fit.r_squared == Approx(0.9698736964011188).margin(1e-12));
}

TEST_CASE("ols_fit matches the reference oracle on random inputs", "[stats]") {
  SplitMix64 rng(2024);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 3 + static_cast<int>(rng.bounded(40));
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
      pts.push_back({(rng.uniform01() - 0.5) * 20.0, (rng.uniform01() - 0.5) * 20.0});
    }
    const auto ref = oracles::ols_reference(pts);
    const RegressionFit fit = ols_fit(pts);
    const double tol = 1e-10;
    REQUIRE(std::fabs(fit.slope - static_cast<double>(ref.slope)) <= tol);
    REQUIRE(std::fabs(fit.intercept - static_cast<double>(ref.intercept)) <= tol);
    REQUIRE(std::fabs(fit.se_slope - static_cast<double>(ref.se_slope)) <= tol);
    REQUIRE(std::fabs(fit.se_intercept - static_cast<double>(ref.se_intercept)) <= tol);
    REQUIRE(std::fabs(fit.r_squared - static_cast<double>(ref.r_squared)) <= tol);
  }
}

TEST_CASE("ols_fit input validation", "[stats]") {
  CHECK_THROWS_AS(ols_fit(std::vector<Point>{{0, 0}, {1, 1}}), InsufficientDataError);
  CHECK_THROWS_AS(ols_fit(std::vector<Point>{{2, 0}, {2, 1}, {2, 5}}), UndefinedStatisticError);
}

TEST_CASE("ols_fit invariances", "[stats]") {
  SplitMix64 rng(5);
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i) {
    pts.push_back({rng.uniform01() * 8.0, rng.uniform01() * 4.0 - 1.0});
  }
  const RegressionFit base = ols_fit(pts);

  SECTION("point order does not matter") {
    auto shuffled = pts;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[3], shuffled[11]);
    const RegressionFit fit = ols_fit(shuffled);
    CHECK(fit.slope == Approx(base.slope).margin(1e-12));
    CHECK(fit.se_slope == Approx(base.se_slope).margin(1e-12));
    CHECK(fit.r_squared == Approx(base.r_squared).margin(1e-12));
  }

  SECTION("x shift moves only the intercept") {
    auto shifted = pts;
    for (auto& p : shifted) p.x += 100.0;
    const RegressionFit fit = ols_fit(shifted);
    CHECK(fit.slope == Approx(base.slope).margin(1e-9));
    CHECK(fit.se_slope == Approx(base.se_slope).margin(1e-9));
    CHECK(fit.r_squared == Approx(base.r_squared).margin(1e-9));
    CHECK(fit.intercept != Approx(base.intercept).margin(1e-6));
  }

  SECTION("y scaling scales slope and se, leaves r2 and p alone") {
    const double c = 3.5;
    auto scaled = pts;
    for (auto& p : scaled) p.y *= c;
    const RegressionFit fit = ols_fit(scaled);
    CHECK(fit.slope == Approx(base.slope * c).margin(1e-9));
    CHECK(fit.se_slope == Approx(base.se_slope * c).margin(1e-9));
    CHECK(fit.r_squared == Approx(base.r_squared).margin(1e-12));
    CHECK(fit.t_stat == Approx(base.t_stat).margin(1e-9));
    CHECK(fit.p_two_sided == Approx(base.p_two_sided).margin(1e-12));
  }
}

TEST_CASE("compare_slopes on identical fits", "[stats]") {
  const RegressionFit fit = ols_fit(florida_q1_points());
  const SlopeComparison cmp = compare_slopes(fit, fit);
  CHECK(cmp.t == 0.0);
  CHECK(cmp.p_one_sided == 0.5);
  CHECK(cmp.p_two_sided == 1.0);
  CHECK(cmp.df == 8);
}

TEST_CASE("compare_slopes reproduces the published quintile pairs", "[stats]") {
  auto make_fit = [](double slope, double se) {
    RegressionFit f;
    f.n = 6;
    f.slope = slope;
    f.se_slope = se;
    return f;
  };
  const RegressionFit q1 = make_fit(-0.8060, 0.0714);
  const RegressionFit q2 = make_fit(-1.0139, 0.1034);
  const RegressionFit q4 = make_fit(-0.9687, 0.0904);

  const SlopeComparison c12 = compare_slopes(q1, q2);
  CHECK(c12.t == Approx(1.654).margin(0.001));
  CHECK(c12.df == 8);
  CHECK(c12.p_one_sided == Approx(0.0683).margin(0.0005));

  const SlopeComparison c14 = compare_slopes(q1, q4);
  CHECK(c14.p_one_sided == Approx(0.0978).margin(0.0005));
}

TEST_CASE("compare_slopes antisymmetry", "[stats]") {
  auto fit_of = [](std::initializer_list<Point> pts) { return ols_fit(std::vector<Point>(pts)); };
  const RegressionFit a = fit_of({{0, 0.1}, {1, 1.2}, {2, 1.9}, {3, 3.2}});
  const RegressionFit b = fit_of({{0, 0.5}, {1, 0.9}, {2, 1.8}, {3, 2.1}});
  const SlopeComparison ab = compare_slopes(a, b);
  const SlopeComparison ba = compare_slopes(b, a);
  CHECK(ab.t == Approx(-ba.t).margin(1e-15));
  CHECK(ab.p_two_sided == Approx(ba.p_two_sided).margin(1e-15));
  CHECK(ab.p_one_sided == Approx(ba.p_one_sided).margin(1e-15));
}

TEST_CASE("compare_slopes error paths", "[stats]") {
  RegressionFit tiny;
  tiny.n = 2;
  tiny.se_slope = 0.1;
  CHECK_THROWS_AS(compare_slopes(tiny, tiny), InsufficientDataError);

  RegressionFit exact;
  exact.n = 6;
  exact.slope = 1.0;
  exact.se_slope = 0.0;
  CHECK_THROWS_AS(compare_slopes(exact, exact), UndefinedStatisticError);
}

TEST_CASE("two_sample_t basics", "[stats]") {
  const std::vector<double> a = {1, 2, 3};

  SECTION("identical samples") {
    const TTestResult res = two_sample_t(a, a);
    CHECK(res.t == 0.0);
    CHECK(res.p_two_sided == 1.0);
  }

  SECTION("shifted sample, pooled") {
    const std::vector<double> b = {11, 12, 13};
    const TTestResult res = two_sample_t(a, b, TTestVariant::Pooled);
    CHECK(res.t == Approx(-12.247448713915889).margin(1e-12));
    CHECK(res.df == 4.0);
    const auto ref = oracles::pooled_t_reference(a, b);
    CHECK(res.t == Approx(static_cast<double>(ref.t)).margin(1e-12));
  }

  SECTION("zero variance") {
    const std::vector<double> flat = {5, 5, 5};
    CHECK_THROWS_AS(two_sample_t(flat, flat), UndefinedStatisticError);
  }

  SECTION("too small") {
    CHECK_THROWS_AS(two_sample_t(std::vector<double>{1.0}, a), InsufficientDataError);
  }
}

TEST_CASE("two_sample_t matches the oracle on random inputs", "[stats]") {
  SplitMix64 rng(314);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> a, b;
    const int na = 2 + static_cast<int>(rng.bounded(20));
    const int nb = 2 + static_cast<int>(rng.bounded(20));
    for (int i = 0; i < na; ++i) a.push_back(rng.uniform01() * 10.0);
    for (int i = 0; i < nb; ++i) b.push_back(rng.uniform01() * 10.0 + 1.0);

    const TTestResult pooled = two_sample_t(a, b, TTestVariant::Pooled);
    const auto pref = oracles::pooled_t_reference(a, b);
    REQUIRE(std::fabs(pooled.t - static_cast<double>(pref.t)) <= 1e-10);
    REQUIRE(pooled.df == static_cast<double>(na + nb - 2));

    const TTestResult welch = two_sample_t(a, b, TTestVariant::Welch);
    const auto wref = oracles::welch_t_reference(a, b);
    REQUIRE(std::fabs(welch.t - static_cast<double>(wref.t)) <= 1e-10);
    REQUIRE(std::fabs(welch.df - static_cast<double>(wref.df)) <= 1e-9);
  }
}

TEST_CASE("one_way_anova basics", "[stats]") {
  SECTION("equal groups give F = 0") {
    const std::vector<std::vector<double>> groups = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    const AnovaResult res = one_way_anova(groups);
    CHECK(res.f == 0.0);
    CHECK(res.p == 1.0);
    CHECK(res.df_between == 2);
    CHECK(res.df_within == 6);
  }

  SECTION("constant groups are undefined") {
    const std::vector<std::vector<double>> groups = {{5, 5}, {5, 5}};
    CHECK_THROWS_AS(one_way_anova(groups), UndefinedStatisticError);
  }

  SECTION("group size validation") {
    CHECK_THROWS_AS(one_way_anova({{1.0, 2.0}, {3.0}}), InsufficientDataError);
    CHECK_THROWS_AS(one_way_anova({{1.0, 2.0}}), InsufficientDataError);
  }
}

TEST_CASE("one_way_anova matches the oracle on random inputs", "[stats]") {
  SplitMix64 rng(2718);
  for (int rep = 0; rep < 300; ++rep) {
    const int k = 2 + static_cast<int>(rng.bounded(5));
    std::vector<std::vector<double>> groups;
    for (int g = 0; g < k; ++g) {
      std::vector<double> sample;
      const int n = 2 + static_cast<int>(rng.bounded(15));
      for (int i = 0; i < n; ++i) sample.push_back(rng.uniform01() * 5.0 + g);
      groups.push_back(std::move(sample));
    }
    const AnovaResult res = one_way_anova(groups);
    const auto ref = oracles::anova_reference(groups);
    REQUIRE(std::fabs(res.f - static_cast<double>(ref.f)) <= 1e-10 * std::max(1.0, std::fabs(static_cast<double>(ref.f))));
    REQUIRE(res.df_between == ref.df_between);
    REQUIRE(res.df_within == ref.df_within);
  }
}

TEST_CASE("anova on two groups agrees with the pooled t-test", "[stats]") {
  SplitMix64 rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 8; ++i) a.push_back(rng.uniform01() * 3.0);
    for (int i = 0; i < 11; ++i) b.push_back(rng.uniform01() * 3.0 + 0.5);
    const AnovaResult f = one_way_anova({a, b});
    const TTestResult t = two_sample_t(a, b, TTestVariant::Pooled);
    REQUIRE(f.f == Approx(t.t * t.t).epsilon(1e-9));
    REQUIRE(f.p == Approx(t.p_two_sided).epsilon(1e-9));
  }
}

TEST_CASE("f_upper_tail boundary behavior", "[stats]") {
  CHECK(f_upper_tail(0.0, 2, 10) == 1.0);
  CHECK(f_upper_tail(-1.0, 2, 10) == 1.0);
  CHECK(f_upper_tail(1e9, 2, 10) < 1e-10);
}
