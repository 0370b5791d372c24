#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "probekit/errors.hpp"
#include "probekit/rng.hpp"
#include "probekit/stats.hpp"

using namespace probekit;

namespace {

// Independent enumeration oracle: exact one-sided signed-rank p-value by
// walking all 2^n sign assignments, mid-ranks for tied magnitudes.
double wilcoxon_enumeration(std::vector<double> d) {
  std::erase_if(d, [](double v) { return v == 0.0; });
  const std::size_t n = d.size();
  if (n == 0) return 0.5;
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::fabs(d[i]);
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (mag[k] < mag[i]) below += 1.0;
      if (mag[k] == mag[i]) equal += 1.0;
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0.0) observed += rank[i];
  std::size_t count = 0;
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) w += rank[i];
    if (w >= observed - 1e-12) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-10));
  CHECK(normal_cdf(-1.0) == doctest::Approx(1.0 - 0.8413447460685429).epsilon(1e-10));
  CHECK(normal_cdf(2.5758293035489008) == doctest::Approx(0.995).epsilon(1e-10));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-6));
}

TEST_CASE("normal quantile inverts the cdf") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035489008).epsilon(1e-9));
  CHECK(normal_quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-9));
  for (double p = 0.0005; p < 1.0; p += 0.0125) {
    double x = normal_quantile(p);
    CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("wilcoxon matches full enumeration for n <= 12") {
  Rng rng(20240817);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(10));  // 3..12
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) {
      // quarter-integer magnitudes force plenty of ties
      x = 0.25 * std::round(8.0 * (rng.uniform() - 0.5));
    }
    const double tau = 0.0;
    std::vector<double> d = v;
    double expected = wilcoxon_enumeration(d);
    double got = wilcoxon_signed_rank_p(v, tau);
    CAPTURE(rep);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon all-positive gives 2^-n") {
  std::vector<double> v(16, 1.0 / 3.0);
  CHECK(wilcoxon_signed_rank_p(v, 0.015) ==
        doctest::Approx(std::pow(2.0, -16)).epsilon(1e-12));
}

TEST_CASE("wilcoxon drops exact zeros") {
  std::vector<double> v = {0.015, 0.015, 0.015, 0.4, 0.5, 0.6};
  // the three exact taus drop; remaining three all positive
  CHECK(wilcoxon_signed_rank_p(v, 0.015) == doctest::Approx(0.125).epsilon(1e-12));
  std::vector<double> zeros(5, 0.2);
  CHECK(wilcoxon_signed_rank_p(zeros, 0.2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("wilcoxon normal approximation tracks Monte Carlo above n = 25") {
  Rng rng(7);
  const int n = 30;
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal() + 0.3;
  double p = wilcoxon_signed_rank_p(v, 0.0);

  // Monte Carlo null distribution with the same mid-rank convention
  std::vector<double> mag(n), rank(n);
  for (int i = 0; i < n; ++i) mag[static_cast<std::size_t>(i)] = std::fabs(v[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (int k = 0; k < n; ++k) {
      if (mag[static_cast<std::size_t>(k)] < mag[static_cast<std::size_t>(i)]) below += 1.0;
      if (mag[static_cast<std::size_t>(k)] == mag[static_cast<std::size_t>(i)]) equal += 1.0;
    }
    rank[static_cast<std::size_t>(i)] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (int i = 0; i < n; ++i)
    if (v[static_cast<std::size_t>(i)] > 0.0) observed += rank[static_cast<std::size_t>(i)];
  Rng mc(99);
  int hits = 0;
  const int reps = 200000;
  for (int r = 0; r < reps; ++r) {
    double w = 0.0;
    for (int i = 0; i < n; ++i)
      if (mc.uniform() < 0.5) w += rank[static_cast<std::size_t>(i)];
    if (w >= observed - 1e-12) ++hits;
  }
  double mc_p = static_cast<double>(hits) / reps;
  CHECK(std::fabs(p - mc_p) < 0.01);
}

TEST_CASE("wilcoxon needs at least 3 nonzero observations") {
  std::vector<double> v = {0.1, 0.1};
  CHECK_THROWS_AS(wilcoxon_signed_rank_p(v, 0.0), DataError);
  std::vector<double> all_tau = {0.2, 0.2, 0.2, 0.2};
  CHECK(wilcoxon_signed_rank_p(all_tau, 0.2) == doctest::Approx(0.5));
}

TEST_CASE("weighted least squares matches normal equations") {
  Rng rng(42);
  const int n = 40, p = 4;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n), w(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int k = 1; k < p; ++k) x(i, k) = rng.normal();
    y(i) = rng.normal() + 2.0 * x(i, 1);
    w(i) = 0.5 + rng.uniform();
  }
  Eigen::VectorXd beta = weighted_least_squares(x, y, w);
  Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  Eigen::VectorXd oracle = (xtw * x).ldlt().solve(xtw * y);
  CHECK((beta - oracle).norm() < 1e-8 * (1.0 + oracle.norm()));
}

TEST_CASE("weighted least squares rejects rank-deficient designs") {
  Eigen::MatrixXd x(6, 3);
  Eigen::VectorXd y(6), w = Eigen::VectorXd::Ones(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    x(i, 2) = 2.0 * i;  // collinear with column 1
    y(i) = i;
  }
  CHECK_THROWS_AS(weighted_least_squares(x, y, w), NumericalError);
}

TEST_CASE("summary helpers") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(v) == doctest::Approx(2.5));
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
  CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
}

}  // TEST_SUITE
