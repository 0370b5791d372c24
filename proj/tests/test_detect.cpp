#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "probekit/detect.hpp"
#include "probekit/errors.hpp"
#include "probekit/rng.hpp"
#include "probekit/stats.hpp"

using namespace probekit;

TEST_SUITE("detect") {

TEST_CASE("call thresholds") {
  CHECK(call_from_p(0.0) == Call::present);
  CHECK(call_from_p(0.39999) == Call::present);
  CHECK(call_from_p(0.4) == Call::marginal);
  CHECK(call_from_p(0.5) == Call::marginal);
  CHECK(call_from_p(0.6) == Call::marginal);
  CHECK(call_from_p(0.60001) == Call::absent);
  CHECK(call_from_p(1.0) == Call::absent);
}

TEST_CASE("mas5: PM = 2 MM over 16 probes gives p = 2^-16 and P") {
  std::vector<double> pm(16, 200.0), mm(16, 100.0);
  DetectionResult r = mas5_detect(pm, mm);
  CHECK(r.p_value == doctest::Approx(std::pow(2.0, -16)).epsilon(1e-12));
  CHECK(r.call == Call::present);
  CHECK(r.statistic == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("mas5: PM = MM gives p = 1 and A") {
  std::vector<double> pm(16, 150.0), mm(16, 150.0);
  DetectionResult r = mas5_detect(pm, mm);
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.call == Call::absent);
}

TEST_CASE("mas5 drops zero-sum probes") {
  std::vector<double> pm = {0.0, 200.0, 200.0, 200.0, 200.0};
  std::vector<double> mm = {0.0, 100.0, 100.0, 100.0, 100.0};
  DetectionResult r = mas5_detect(pm, mm);
  CHECK(r.p_value == doctest::Approx(std::pow(2.0, -4)).epsilon(1e-12));

  std::vector<double> zero(4, 0.0);
  CHECK_THROWS_WITH_AS(mas5_detect(zero, zero), doctest::Contains("no valid probes"),
                       DataError);
}

TEST_CASE("model detect: zero residuals give T = 0, p = 0.5, call M") {
  const int J = 8, I = 4;
  Eigen::MatrixXd mu = Eigen::MatrixXd::Constant(J, I, 4.0);
  std::vector<double> optical(I, 30.0);
  Eigen::MatrixXd pm(J, I);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < I; ++i) pm(j, i) = 30.0 + std::exp(4.0);
  DetectionResult r = model_detect(pm, mu, 0.6, 0.7, optical);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.call == Call::marginal);
}

TEST_CASE("model detect matches the hand-computed statistic") {
  // J = 3 probes, I = 2 arrays, residuals set to known z values
  const double sigma = 0.5, rho = 0.4;
  Eigen::MatrixXd mu(3, 2), pm(3, 2);
  double z[3][2] = {{1.0, -0.5}, {0.25, 0.75}, {-1.25, 2.0}};
  std::vector<double> optical = {10.0, 20.0};
  double zsum = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 2; ++i) {
      mu(j, i) = 3.0 + 0.1 * j + 0.05 * i;
      pm(j, i) = optical[static_cast<std::size_t>(i)] +
                 std::exp(mu(j, i) + sigma * z[j][i]);
      zsum += z[j][i];
    }
  double zbar = zsum / 6.0;
  double i_eff = 2.0 / (1.0 + rho);
  double want_t = zbar * std::sqrt(3.0 * i_eff);
  DetectionResult r = model_detect(pm, mu, sigma, rho, optical);
  CHECK(r.statistic == doctest::Approx(want_t).epsilon(1e-10));
  CHECK(r.p_value == doctest::Approx(1.0 - normal_cdf(want_t)).epsilon(1e-10));
}

TEST_CASE("variants agree when given the same background means") {
  Eigen::MatrixXd mu = Eigen::MatrixXd::Constant(5, 3, 4.0);
  Eigen::MatrixXd pm = Eigen::MatrixXd::Constant(5, 3, 120.0);
  std::vector<double> optical(3, 30.0);
  DetectionResult a = model_detect(pm, mu, 0.6, 0.7, optical, DetectVariant::model_pm_mm);
  DetectionResult b =
      model_detect(pm, mu, 0.6, 0.7, optical, DetectVariant::model_half_price);
  CHECK(a.p_value == b.p_value);  // exact equality demanded
  CHECK(a.statistic == b.statistic);
  CHECK(a.variant == DetectVariant::model_pm_mm);
  CHECK(b.variant == DetectVariant::model_half_price);
}

TEST_CASE("raising PM never increases the model p-value") {
  Rng rng(404);
  Eigen::MatrixXd mu(6, 3), pm(6, 3);
  std::vector<double> optical(3, 25.0);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 3; ++i) {
      mu(j, i) = 4.0 + 0.3 * rng.normal();
      pm(j, i) = 25.0 + std::exp(mu(j, i) + 0.5 * rng.normal());
    }
  double prev = model_detect(pm, mu, 0.5, 0.5, optical).p_value;
  for (double f : {1.2, 1.5, 2.0, 4.0, 16.0}) {
    Eigen::MatrixXd scaled = pm;
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i < 3; ++i) scaled(j, i) = 25.0 + f * (pm(j, i) - 25.0);
    double p = model_detect(scaled, mu, 0.5, 0.5, optical).p_value;
    CHECK(p <= prev + 1e-12);
    prev = p;
  }
}

TEST_CASE("null p-values are uniform: KS distance below 0.05 over 2000 genes") {
  Rng rng(2718);
  const int n_genes = 2000, J = 16, I = 3;
  const double sigma = 0.6, rho = 0.7, O = 30.0;
  const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  std::vector<double> optical(I, O);
  std::vector<double> ps;
  for (int g = 0; g < n_genes; ++g) {
    Eigen::MatrixXd mu(J, I), pm(J, I);
    for (int j = 0; j < J; ++j) {
      double z0 = rng.normal();
      for (int i = 0; i < I; ++i) {
        mu(j, i) = 4.5 + 0.2 * ((j * 7) % 5);
        double xi = sigma * (a * z0 + b * rng.normal());
        pm(j, i) = O + std::exp(mu(j, i) + xi);
      }
    }
    ps.push_back(model_detect(pm, mu, sigma, rho, optical).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0.0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    double ecdf_hi = static_cast<double>(k + 1) / static_cast<double>(ps.size());
    double ecdf_lo = static_cast<double>(k) / static_cast<double>(ps.size());
    ks = std::max({ks, std::fabs(ecdf_hi - ps[k]), std::fabs(ps[k] - ecdf_lo)});
  }
  CHECK(ks < 0.05);
  // fraction below 0.05 within 0.05 +- 0.015
  double frac = static_cast<double>(
                    std::lower_bound(ps.begin(), ps.end(), 0.05) - ps.begin()) /
                static_cast<double>(ps.size());
  CHECK(std::fabs(frac - 0.05) < 0.015);
}

TEST_CASE("input validation") {
  Eigen::MatrixXd mu = Eigen::MatrixXd::Constant(2, 2, 4.0);
  Eigen::MatrixXd pm = Eigen::MatrixXd::Constant(2, 2, 100.0);
  std::vector<double> optical(2, 30.0);
  CHECK_THROWS_AS(model_detect(pm, mu, 0.6, 0.7, optical), DataError);  // J < 3
  Eigen::MatrixXd mu_bad = Eigen::MatrixXd::Constant(5, 3, 4.0);
  Eigen::MatrixXd pm5 = Eigen::MatrixXd::Constant(5, 2, 100.0);
  CHECK_THROWS_WITH_AS(model_detect(pm5, mu_bad, 0.6, 0.7, optical),
                       doctest::Contains("no background model"), DataError);
  Eigen::MatrixXd mu5 = Eigen::MatrixXd::Constant(5, 2, 4.0);
  CHECK_THROWS_AS(model_detect(pm5, mu5, 0.0, 0.7, optical), DataError);
}

}  // TEST_SUITE
