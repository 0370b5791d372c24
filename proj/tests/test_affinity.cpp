#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "probekit/affinity.hpp"
#include "probekit/errors.hpp"
#include "probekit/rng.hpp"
#include "probekit/spline.hpp"

using namespace probekit;

namespace {

std::string random_sequence(Rng& rng, int length) {
  static const char bases[] = {'A', 'C', 'G', 'T'};
  std::string s;
  for (int p = 0; p < length; ++p) s += bases[rng.uniform_int(4)];
  return s;
}

AffinityModel random_truth(Rng& rng, int df) {
  AffinityModel m;
  m.df = df;
  m.probe_length = 25;
  m.intercept = 4.0;
  m.coefficients.assign(3, std::vector<double>(static_cast<std::size_t>(df)));
  for (auto& block : m.coefficients)
    for (double& c : block) c = 0.4 * rng.normal();
  return m;
}

}  // namespace

TEST_SUITE("affinity") {

TEST_CASE("design row accumulates spline bases per base block") {
  const int df = 5, L = 25;
  std::string all_t(25, 'T');
  Eigen::RowVectorXd row = affinity_design_row(all_t, df, L);
  REQUIRE(row.size() == 1 + 3 * df);
  CHECK(row(0) == 1.0);
  for (int k = 1; k < row.size(); ++k) CHECK(row(k) == 0.0);

  std::string one_a = all_t;
  one_a[7] = 'A';  // position 8
  Eigen::RowVectorXd ra = affinity_design_row(one_a, df, L);
  std::vector<double> basis = spline_basis(8, df, L);
  for (int k = 0; k < df; ++k) {
    CHECK(ra(1 + k) == doctest::Approx(basis[static_cast<std::size_t>(k)]));
    CHECK(ra(1 + df + k) == 0.0);   // C block untouched
    CHECK(ra(1 + 2 * df + k) == 0.0);  // G block untouched
  }
}

TEST_CASE("sequence validation") {
  CHECK_THROWS_WITH_AS(affinity_design_row("ACGTN" + std::string(20, 'T'), 5, 25),
                       doctest::Contains("malformed sequence"), DataError);
  CHECK_THROWS_AS(affinity_design_row("ACGT", 5, 25), DataError);
}

TEST_CASE("noise-free fit recovers predictions in the model class") {
  Rng rng(1001);
  const int df = 5;
  AffinityModel truth = random_truth(rng, df);
  std::vector<std::string> seqs;
  std::vector<double> resp;
  for (int i = 0; i < 600; ++i) {
    seqs.push_back(random_sequence(rng, 25));
    resp.push_back(predict_affinity(truth, seqs.back()));
  }
  AffinityModel fit = fit_affinity(seqs, resp, df);
  CHECK(!fit.intercept_only);
  CHECK(fit.residual_sd < 1e-8);
  for (int i = 0; i < 50; ++i) {
    std::string s = random_sequence(rng, 25);
    CHECK(predict_affinity(fit, s) ==
          doctest::Approx(predict_affinity(truth, s)).epsilon(1e-8));
  }
}

TEST_CASE("noisy fit keeps residual spread near the injected noise") {
  Rng rng(1002);
  AffinityModel truth = random_truth(rng, 5);
  std::vector<std::string> seqs;
  std::vector<double> resp;
  for (int i = 0; i < 4000; ++i) {
    seqs.push_back(random_sequence(rng, 25));
    resp.push_back(predict_affinity(truth, seqs.back()) + 0.3 * rng.normal());
  }
  AffinityModel fit = fit_affinity(seqs, resp, 5);
  CHECK(fit.residual_sd == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("rank-deficient designs fall back to intercept only") {
  std::vector<std::string> seqs(150, std::string(25, 'A'));
  std::vector<double> resp(150, 2.0);
  resp[0] = 4.0;
  AffinityModel fit = fit_affinity(seqs, resp, 5);
  CHECK(fit.intercept_only);
  CHECK(fit.intercept == doctest::Approx((4.0 + 149 * 2.0) / 150.0));
  CHECK(predict_affinity(fit, std::string(25, 'G')) == doctest::Approx(fit.intercept));
}

TEST_CASE("needs at least 100 probes") {
  std::vector<std::string> seqs(99, std::string(25, 'A'));
  std::vector<double> resp(99, 1.0);
  CHECK_THROWS_AS(fit_affinity(seqs, resp, 5), DataError);
}

TEST_CASE("JSON round trip preserves the model") {
  Rng rng(1003);
  AffinityModel truth = random_truth(rng, 4);
  truth.residual_sd = 0.123;
  AffinityModel back = AffinityModel::from_json(truth.to_json());
  CHECK(back.df == truth.df);
  CHECK(back.probe_length == truth.probe_length);
  CHECK(back.intercept == doctest::Approx(truth.intercept).epsilon(1e-15));
  CHECK(back.residual_sd == doctest::Approx(truth.residual_sd).epsilon(1e-15));
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < 4; ++k)
      CHECK(back.coefficients[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] ==
            doctest::Approx(
                truth.coefficients[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)])
                .epsilon(1e-15));
  CHECK_THROWS_AS(AffinityModel::from_json("{not json"), DataError);
}

}  // TEST_SUITE
