#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "meta_audit/combine.hpp"
#include "oracles.hpp"

using namespace meta_audit;

namespace {

// Straight-line recomputation of the DL random-effects estimate, written
// out step by step the way one would in a spreadsheet.
struct DlSheet {
  double fixed, q, c, tau2, pooled, se;
};

DlSheet dl_sheet(const std::vector<double>& v, const std::vector<double>& s) {
  DlSheet out{};
  double sw = 0, swv = 0, sw2 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = 1.0 / (s[i] * s[i]);
    sw += w;
    swv += w * v[i];
    sw2 += w * w;
  }
  out.fixed = swv / sw;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.q += (v[i] - out.fixed) * (v[i] - out.fixed) / (s[i] * s[i]);
  }
  out.c = sw - sw2 / sw;
  out.tau2 = std::max(0.0, (out.q - (v.size() - 1.0)) / out.c);
  double rw = 0, rwv = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = 1.0 / (s[i] * s[i] + out.tau2);
    rw += w;
    rwv += w * v[i];
  }
  out.pooled = rwv / rw;
  out.se = std::sqrt(1.0 / rw);
  return out;
}

}  // namespace

TEST_CASE("fisher_combine k=1 identity") {
  const std::vector<double> p{0.5};
  const auto r = fisher_combine(p);
  CHECK(std::fabs(r.statistic - 1.386294) <= 1e-6);
  CHECK(r.df == 2);
  CHECK(std::fabs(r.combined_p - 0.5) <= 1e-12);
}

TEST_CASE("fisher_combine two 0.05s matches the df=4 closed form") {
  const std::vector<double> p{0.05, 0.05};
  const auto r = fisher_combine(p);
  const double x = -4.0 * std::log(0.05);
  CHECK(std::fabs(r.statistic - 11.98293) <= 1e-5);
  CHECK(r.df == 4);
  CHECK(std::fabs(r.combined_p - std::exp(-x / 2) * (1 + x / 2)) <= 1e-12);
  CHECK(std::fabs(r.combined_p - 0.0174787) <= 1e-6);
}

TEST_CASE("fisher_combine: one tiny p dominates ten null ones") {
  std::vector<double> p(10, 0.5);
  p.push_back(1e-10);
  const auto r = fisher_combine(p);
  CHECK(std::fabs(r.statistic - 59.9146) <= 1e-4);
  CHECK(r.df == 22);
  CHECK(r.combined_p < 1e-4);
  CHECK(std::fabs(r.combined_p - oracle::chi_square_sf(r.statistic, 22)) <= 1e-10);
}

TEST_CASE("fisher_combine invariants") {
  std::vector<double> p{0.2, 0.7, 0.01, 1.0};
  const auto r = fisher_combine(p);
  double sum = 0.0;
  for (double c : r.contributions) sum += c;
  CHECK(r.statistic == sum);
  CHECK(r.contributions[3] == 0.0);
  CHECK(r.clamped.empty());

  SUBCASE("copies of e^-1 hit the null expectation") {
    for (int k : {1, 5, 34}) {
      const std::vector<double> q(k, std::exp(-1.0));
      const auto f = fisher_combine(q);
      CHECK(std::fabs(f.statistic - f.df) <= 1e-12 * f.df);
    }
  }

  SUBCASE("permutation invariance and monotonicity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> v(2 + rng() % 20);
      for (auto& x : v) x = u(rng);
      const auto base = fisher_combine(v);
      auto shuffled = v;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(fisher_combine(shuffled).statistic ==
            doctest::Approx(base.statistic).epsilon(1e-12));
      auto lowered = v;
      lowered[rng() % v.size()] *= 0.5;
      const auto low = fisher_combine(lowered);
      CHECK(low.statistic > base.statistic);
      CHECK(low.combined_p < base.combined_p);
    }
  }
}

TEST_CASE("fisher_combine clamps underflowing p-values and rejects invalid ones") {
  const std::vector<double> p{1e-320, 0.5};
  const auto r = fisher_combine(p);
  REQUIRE(r.clamped.size() == 1);
  CHECK(r.clamped[0] == 0);
  CHECK(std::isfinite(r.statistic));
  CHECK(r.contributions[0] == doctest::Approx(-2.0 * std::log(kFisherFloor)));

  CHECK_THROWS_AS(fisher_combine(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(fisher_combine(std::vector<double>{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(fisher_combine(std::vector<double>{1.5}), std::invalid_argument);
}

TEST_CASE("elston_flags") {
  CHECK(elston_flags(std::vector<double>{0.5, 0.3, 0.9}) ==
        std::vector<std::size_t>{1});
  CHECK(elston_flags(std::vector<double>{std::exp(-1.0)}).empty());
  const std::vector<double> p(34, 0.36);
  CHECK(elston_flags(p).size() == 34);
  CHECK(std::fabs(kElstonThreshold - 0.367879) <= 1e-6);
}

TEST_CASE("dl_pool identical studies") {
  const std::vector<double> e{1, 1, 1}, s{0.5, 0.5, 0.5};
  const auto r = dl_pool(e, s, PoolMode::fixed);
  CHECK(r.pooled == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(r.se_pooled - 0.288675) <= 1e-6);
  CHECK(r.tau2 == 0.0);
  CHECK(r.mode == PoolMode::fixed);
}

TEST_CASE("dl_pool random, Q equal to k-1 truncates tau2") {
  const std::vector<double> e{0, 1, 2}, s{1, 1, 1};
  const auto r = dl_pool(e, s, PoolMode::random);
  CHECK(std::fabs(r.q_statistic - 2.0) <= 1e-12);
  CHECK(r.tau2 == 0.0);
  CHECK(std::fabs(r.pooled - 1.0) <= 1e-12);
  CHECK(std::fabs(r.se_pooled - 0.577350) <= 1e-6);
}

TEST_CASE("dl_pool two-study random effects") {
  const std::vector<double> e{0, 2}, s{1, 0.5};
  const auto sheet = dl_sheet(e, s);
  // The hand-derived fixture, re-verified line by line.
  CHECK(std::fabs(sheet.fixed - 1.6) <= 1e-12);
  CHECK(std::fabs(sheet.q - 3.2) <= 1e-12);
  CHECK(std::fabs(sheet.c - 1.6) <= 1e-12);
  CHECK(std::fabs(sheet.tau2 - 1.375) <= 1e-12);
  CHECK(std::fabs(sheet.pooled - 1.1875) <= 1e-12);

  const auto fixed = dl_pool(e, s, PoolMode::fixed);
  CHECK(std::fabs(fixed.pooled - 1.6) <= 1e-12);
  CHECK(std::fabs(fixed.q_statistic - 3.2) <= 1e-12);

  const auto r = dl_pool(e, s, PoolMode::random);
  CHECK(std::fabs(r.tau2 - 1.375) <= 1e-9);
  CHECK(std::fabs(r.pooled - 1.1875) <= 1e-9);
  CHECK(std::fabs(r.se_pooled - sheet.se) <= 1e-12);
  CHECK(std::fabs(r.ci95.first - (r.pooled - kZ95 * r.se_pooled)) <= 1e-15);
  CHECK(std::fabs(r.ci95.second - (r.pooled + kZ95 * r.se_pooled)) <= 1e-15);
}

TEST_CASE("dl_pool single study in random mode equals fixed") {
  const std::vector<double> e{0.4}, s{0.2};
  const auto r = dl_pool(e, s, PoolMode::random);
  CHECK(r.tau2 == 0.0);
  CHECK(r.q_statistic == 0.0);
  CHECK(r.pooled == 0.4);
  CHECK(r.weights == std::vector<double>{1.0});
}

TEST_CASE("dl_pool errors") {
  const std::vector<double> e{1, 2}, s{1};
  CHECK_THROWS_AS(dl_pool(e, s, PoolMode::fixed), std::invalid_argument);
  CHECK_THROWS_AS(dl_pool(std::vector<double>{}, std::vector<double>{}, PoolMode::fixed),
                  std::invalid_argument);
  CHECK_THROWS_AS(dl_pool(std::vector<double>{1}, std::vector<double>{0}, PoolMode::random),
                  std::invalid_argument);
}

TEST_CASE("dl_pool properties on fuzzed inputs") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> effect(0.0, 2.0);
  std::uniform_real_distribution<double> se(0.05, 3.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> e(1 + rng() % 15), s(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] = effect(rng);
      s[i] = se(rng);
    }
    for (auto mode : {PoolMode::fixed, PoolMode::random}) {
      const auto r = dl_pool(e, s, mode);
      const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
      CHECK(r.pooled >= *lo);
      CHECK(r.pooled <= *hi);
      double wsum = 0.0;
      for (double w : r.weights) {
        CHECK(w > 0.0);
        wsum += w;
      }
      CHECK(std::fabs(wsum - 1.0) <= 1e-12);
      if (mode == PoolMode::fixed) CHECK(r.tau2 == 0.0);
    }

    const auto fixed = dl_pool(e, s, PoolMode::fixed);
    const auto random = dl_pool(e, s, PoolMode::random);
    if (random.tau2 == 0.0) {
      CHECK(std::fabs(random.pooled - fixed.pooled) <= 1e-12);
      CHECK(std::fabs(random.se_pooled - fixed.se_pooled) <= 1e-12);
    }

    const double c = 0.1 + 5.0 * (rng() % 1000) / 1000.0;
    std::vector<double> ec(e), sc(s);
    for (auto& x : ec) x *= c;
    for (auto& x : sc) x *= c;
    const auto scaled = dl_pool(ec, sc, PoolMode::random);
    CHECK(scaled.pooled == doctest::Approx(c * random.pooled).epsilon(1e-9).scale(c));
    CHECK(scaled.se_pooled == doctest::Approx(c * random.se_pooled).epsilon(1e-9));
    CHECK(scaled.tau2 == doctest::Approx(c * c * random.tau2).epsilon(1e-9).scale(c * c));
    for (std::size_t i = 0; i < e.size(); ++i) {
      CHECK(scaled.weights[i] == doctest::Approx(random.weights[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("dl_pool weights equalize under large heterogeneity") {
  const std::vector<double> e{-50, 0, 40, 90, -70}, s{0.5, 1.0, 1.5, 0.8, 1.2};
  const auto r = dl_pool(e, s, PoolMode::random);
  const double max_var = 1.5 * 1.5;
  REQUIRE(r.tau2 >= 100.0 * max_var);
  const auto [lo, hi] = std::minmax_element(r.weights.begin(), r.weights.end());
  CHECK(*hi / *lo <= 1.05);
}
