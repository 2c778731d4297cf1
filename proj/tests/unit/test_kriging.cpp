#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "polishkrige/error.hpp"
#include "polishkrige/kriging.hpp"

using namespace polishkrige;

namespace {

ScatterSet random_scatter(oracle::Rng& rng, std::size_t n, double extent) {
  std::vector<Observation> obs;
  while (obs.size() < n) {
    const Location2D s{rng.uniform(0, extent), rng.uniform(0, extent)};
    bool clash = false;
    for (const auto& o : obs) clash = clash || distance(o.location, s) < 1e-3 * extent;
    if (!clash) obs.push_back({s, rng.uniform(-5, 5)});
  }
  return ScatterSet(std::move(obs));
}

VariogramModel spherical(double nugget, double psill, double range) {
  return {VariogramFamily::spherical, nugget, psill, range};
}

}  // namespace

TEST_SUITE("kriging") {
  TEST_CASE("covariance examples") {
    const auto m = spherical(0.1, 0.9, 2.0);
    CHECK(covariance(m, 0.0) == 1.0);
    CHECK(std::abs(covariance(m, 2.0)) < 1e-15);
    CHECK(covariance(m, 1.0) == doctest::Approx(0.28125).epsilon(1e-14));
    CHECK(covariance(m, 5.0) == 0.0);
    CHECK_THROWS_AS(covariance(m, -1.0), Error);
    for (auto f : {VariogramFamily::exponential, VariogramFamily::gaussian}) {
      const VariogramModel v{f, 0.2, 1.0, 3.0};
      CHECK(covariance(v, 0.0) == doctest::Approx(1.2));
      // practical range: gamma reaches nugget + 95% of the partial sill
      CHECK(v.semivariance(3.0) == doctest::Approx(0.2 + (1 - std::exp(-3.0))));
    }
  }

  TEST_CASE("semivariance is nondecreasing and starts at zero") {
    for (auto f : {VariogramFamily::spherical, VariogramFamily::exponential, VariogramFamily::gaussian}) {
      const VariogramModel v{f, 0.3, 1.7, 2.5};
      CHECK(v.semivariance(0.0) == 0.0);
      double prev = 0.0;
      for (double h = 0.01; h < 10; h += 0.01) {
        const double g = v.semivariance(h);
        CHECK(g >= prev);
        prev = g;
      }
    }
  }

  TEST_CASE("empirical semivariogram examples") {
    const ScatterSet same({{{0, 0}, 2.0}, {{1, 0}, 2.0}});
    auto e = empirical_semivariogram(same, 1, 1.0);
    REQUIRE(e.size() == 1);
    CHECK(e.gamma[0] == 0.0);
    CHECK(e.pair_counts[0] == 1);

    const ScatterSet diff({{{0, 0}, 1.0}, {{1, 0}, 4.0}});
    e = empirical_semivariogram(diff, 1, 1.0);
    CHECK(e.gamma[0] == 4.5);
    CHECK(e.lag_centers[0] == 0.5);

    CHECK_THROWS_AS(empirical_semivariogram(diff, 3, 0.5), Error);
  }

  TEST_CASE("empirical semivariogram bin counts match pair enumeration") {
    oracle::Rng rng(10);
    const auto s = random_scatter(rng, 80, 20.0);
    const int bins = 15;
    const auto e = empirical_semivariogram(s, bins);
    // brute force
    double far = 0.0;
    const auto& o = s.observations();
    for (std::size_t i = 0; i < o.size(); ++i) {
      for (std::size_t j = 0; j < o.size(); ++j) far = std::max(far, std::hypot(o[i].location.x - o[j].location.x, o[i].location.y - o[j].location.y));
    }
    const double max_lag = far / 2;
    std::vector<std::size_t> counts(bins, 0);
    std::vector<double> sq(bins, 0.0);
    for (std::size_t i = 0; i < o.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double h = std::hypot(o[i].location.x - o[j].location.x, o[i].location.y - o[j].location.y);
        if (h > max_lag) continue;
        int b = static_cast<int>(std::floor(h / (max_lag / bins)));
        if (b == bins) b = bins - 1;
        ++counts[b];
        sq[b] += (o[i].value - o[j].value) * (o[i].value - o[j].value);
      }
    }
    std::size_t idx = 0;
    for (int b = 0; b < bins; ++b) {
      if (counts[b] == 0) continue;
      REQUIRE(idx < e.size());
      CHECK(e.pair_counts[idx] == counts[b]);
      CHECK(e.gamma[idx] == doctest::Approx(sq[b] / (2.0 * counts[b])));
      ++idx;
    }
    CHECK(idx == e.size());
  }

  TEST_CASE("fit recovers a spherical generator") {
    const auto truth = spherical(0.1, 0.9, 3.0);
    EmpiricalVariogram e;
    for (int i = 1; i <= 10; ++i) {
      const double h = 0.5 * i;
      e.lag_centers.push_back(h);
      e.gamma.push_back(truth.semivariance(h));
      e.pair_counts.push_back(1);
    }
    const auto fit = fit_variogram(e, VariogramFamily::spherical);
    CHECK_FALSE(fit.degenerate);
    CHECK(std::abs(fit.model.nugget - 0.1) <= 1e-3);
    CHECK(std::abs(fit.model.partial_sill - 0.9) <= 1e-3);
    CHECK(std::abs(fit.model.range - 3.0) <= 1e-3);
  }

  TEST_CASE("fit recovers exponential and gaussian generators") {
    for (auto family : {VariogramFamily::exponential, VariogramFamily::gaussian}) {
      const VariogramModel truth{family, 0.25, 2.0, 4.0};
      EmpiricalVariogram e;
      for (int i = 1; i <= 12; ++i) {
        e.lag_centers.push_back(0.5 * i);
        e.gamma.push_back(truth.semivariance(0.5 * i));
        e.pair_counts.push_back(static_cast<std::size_t>(10 + i));
      }
      const auto fit = fit_variogram(e, family);
      CHECK(fit.model.nugget == doctest::Approx(0.25).epsilon(1e-3));
      CHECK(fit.model.partial_sill == doctest::Approx(2.0).epsilon(1e-3));
      CHECK(fit.model.range == doctest::Approx(4.0).epsilon(1e-3));
    }
  }

  TEST_CASE("flat and zero empirical variograms") {
    EmpiricalVariogram e;
    for (int i = 1; i <= 6; ++i) {
      e.lag_centers.push_back(i);
      e.gamma.push_back(2.5);
      e.pair_counts.push_back(3);
    }
    auto fit = fit_variogram(e, VariogramFamily::spherical);
    CHECK(fit.model.nugget == doctest::Approx(2.5));
    CHECK(fit.model.partial_sill == doctest::Approx(0.0));
    CHECK_FALSE(fit.degenerate);

    std::fill(e.gamma.begin(), e.gamma.end(), 0.0);
    fit = fit_variogram(e, VariogramFamily::spherical);
    CHECK(fit.degenerate);
    CHECK(fit.model.nugget == 0.0);
    CHECK(fit.model.partial_sill == 0.0);

    EmpiricalVariogram two;
    two.lag_centers = {1, 2};
    two.gamma = {1, 2};
    two.pair_counts = {1, 1};
    CHECK_THROWS_AS(fit_variogram(two, VariogramFamily::spherical), Error);
  }

  TEST_CASE("fixed nugget is honoured") {
    const auto truth = spherical(0.0, 1.5, 4.0);
    EmpiricalVariogram e;
    for (int i = 1; i <= 8; ++i) {
      e.lag_centers.push_back(i * 0.6);
      e.gamma.push_back(truth.semivariance(i * 0.6) + 0.2);
      e.pair_counts.push_back(5);
    }
    VariogramFitOptions o;
    o.fixed_nugget = 0.0;
    const auto fit = fit_variogram(e, VariogramFamily::spherical, o);
    CHECK(fit.model.nugget == 0.0);
    CHECK(fit.model.partial_sill > 0.0);
  }

  TEST_CASE("ordinary kriging small cases") {
    const auto model = spherical(0.0, 1.0, 5.0);
    const ScatterSet one({{{1, 1}, 3.0}});
    const auto w1 = ok_solve(one, model, {4, 4});
    CHECK(w1.weights == std::vector<double>{1.0});

    oracle::Rng rng(4);
    const auto s = random_scatter(rng, 7, 4.0);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto w = ok_solve(s, model, s[k].location);
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(w.weights[i] == doctest::Approx(i == k ? 1.0 : 0.0).epsilon(1e-9));
      const auto p = ok_predict(s, model, s[k].location);
      CHECK(p.value == doctest::Approx(s[k].value).epsilon(1e-9));
      CHECK(p.variance <= 1e-8);
    }

    const ScatterSet pair({{{0, 0}, 1.0}, {{2, 0}, 5.0}});
    const auto w2 = ok_solve(pair, model, {1, 0.7});
    CHECK(w2.weights[0] == doctest::Approx(0.5));
    CHECK(w2.weights[1] == doctest::Approx(0.5));
  }

  TEST_CASE("constant data and shift invariance") {
    oracle::Rng rng(12);
    const auto base = random_scatter(rng, 9, 6.0);
    std::vector<Observation> constant = base.observations();
    for (auto& o : constant) o.value = 4.25;
    const ScatterSet c(constant);
    const auto model = VariogramModel{VariogramFamily::exponential, 0.1, 1.0, 3.0};
    CHECK(ok_predict(c, model, {2.5, 1.5}).value == doctest::Approx(4.25).epsilon(1e-12));

    std::vector<Observation> shifted = base.observations();
    for (auto& o : shifted) o.value += 10.0;
    const Location2D t{3.3, 2.2};
    const auto p0 = ok_predict(base, model, t);
    const auto p1 = ok_predict(ScatterSet(shifted), model, t);
    CHECK(p1.value - p0.value == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(p1.variance == p0.variance);
  }

  TEST_CASE("permutation invariance") {
    oracle::Rng rng(13);
    const auto s = random_scatter(rng, 10, 8.0);
    const auto model = spherical(0.05, 1.0, 6.0);
    std::vector<std::size_t> perm(s.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[2], perm[7]);
    std::vector<Observation> shuffled;
    for (auto i : perm) shuffled.push_back(s[i]);
    const Location2D t{4.1, 3.9};
    const auto a = ok_solve(s, model, t);
    const auto b = ok_solve(ScatterSet(shuffled), model, t);
    for (std::size_t j = 0; j < perm.size(); ++j) CHECK(std::abs(b.weights[j] - a.weights[perm[j]]) <= 1e-12);
    const auto pa = ok_predict(s, model, t);
    const auto pb = ok_predict(ScatterSet(shuffled), model, t);
    CHECK(std::abs(pa.value - pb.value) <= 1e-12 * std::max(1.0, std::abs(pa.value)));
    CHECK(std::abs(pa.variance - pb.variance) <= 1e-12 * std::max(1.0, pa.variance));
  }

  TEST_CASE("n=4 configuration matches the extended-precision oracle") {
    const ScatterSet s({{{0.0, 0.0}, 1.2}, {{2.0, 0.5}, -0.7}, {{0.7, 1.9}, 2.4}, {{2.2, 2.4}, 0.3}});
    const auto model = spherical(0.1, 0.9, 3.0);
    const Location2D t{1.1, 1.0};
    const auto ref = oracle::ordinary_kriging(s.observations(), 0.1L, 0.9L, 3.0L, t);
    const auto w = ok_solve(s, model, t);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(w.weights[i] - static_cast<double>(ref.weights[i])) <= 1e-10);
    CHECK(std::abs(w.lagrange - static_cast<double>(ref.lagrange)) <= 1e-10);
    const auto p = ok_predict(s, model, t);
    CHECK(oracle::rel_diff(p.value, static_cast<double>(ref.value)) <= 1e-10);
    CHECK(oracle::rel_diff(p.variance, static_cast<double>(ref.variance)) <= 1e-10);
    CHECK(std::accumulate(w.weights.begin(), w.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("singular systems are reported") {
    const ScatterSet s({{{0, 0}, 1.0}, {{1, 0}, 2.0}, {{0, 1}, 3.0}});
    const VariogramModel zero{VariogramFamily::spherical, 0.0, 0.0, 1.0};
    CHECK_THROWS_AS(ok_solve(s, zero, {0.5, 0.5}), SingularSystemError);
  }

  TEST_CASE("neighbourhood option restricts the support") {
    oracle::Rng rng(21);
    const auto s = random_scatter(rng, 30, 10.0);
    const auto model = spherical(0.0, 1.0, 4.0);
    const OrdinaryKriging local(s, model, 5);
    const Location2D t{5.0, 5.0};
    const auto w = local.weights(t);
    const auto nonzero = std::count_if(w.weights.begin(), w.weights.end(), [](double v) { return v != 0.0; });
    CHECK(nonzero <= 5);
    CHECK(std::accumulate(w.weights.begin(), w.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    const OrdinaryKriging all(s, model, 100);  // larger than n: global
    CHECK(all.neighbors() == 0);
  }
}
