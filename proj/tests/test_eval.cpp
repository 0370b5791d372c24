#include <doctest.h>

#include <cmath>
#include <vector>

#include "probekit/errors.hpp"
#include "probekit/eval.hpp"
#include "probekit/rng.hpp"
#include "probekit/stats.hpp"

using namespace probekit;

namespace {

// Mann-Whitney oracle: fraction of (positive, negative) pairs won, ties half.
double auc_oracle(const std::vector<double>& s, const std::vector<std::uint8_t>& t) {
  double u = 0.0;
  int pos = 0, neg = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (!t[a]) continue;
    ++pos;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (t[b]) continue;
      if (s[a] > s[b])
        u += 1.0;
      else if (s[a] == s[b])
        u += 0.5;
    }
  }
  for (std::uint8_t v : t) neg += v ? 0 : 1;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("perfect separation gives AUC 1, reversal gives 0") {
  std::vector<double> s = {0.9, 0.8, 0.7, 0.2, 0.1};
  std::vector<std::uint8_t> t = {1, 1, 1, 0, 0};
  CHECK(roc(s, t).auc == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<std::uint8_t> flipped = {0, 0, 0, 1, 1};
  CHECK(roc(s, flipped).auc == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hand case with ties matches the pairwise oracle") {
  std::vector<double> s = {3.0, 1.0, 2.0, 2.0, 5.0, 2.0, 0.5, 4.0, 1.0, 3.0};
  std::vector<std::uint8_t> t = {1, 0, 1, 0, 1, 0, 0, 1, 1, 0};
  RocTable r = roc(s, t);
  CHECK(r.auc == doctest::Approx(auc_oracle(s, t)).epsilon(1e-12));
  // curve bookkeeping: starts at the origin, ends at (neg, pos), monotone
  CHECK(r.points.front() == std::pair<int, int>(0, 0));
  CHECK(r.points.back() == std::pair<int, int>(5, 5));
  for (std::size_t k = 1; k < r.points.size(); ++k) {
    CHECK(r.points[k].first >= r.points[k - 1].first);
    CHECK(r.points[k].second >= r.points[k - 1].second);
  }
  // tie group of three 2.0 scores collapses into a single point step
  CHECK(r.points.size() == 7);  // origin + 6 distinct score levels
}

TEST_CASE("random scores hover near one half") {
  Rng rng(314);
  std::vector<double> s(2000);
  std::vector<std::uint8_t> t(2000);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k] = rng.normal();
    t[k] = static_cast<std::uint8_t>(k % 2);
  }
  double a = roc(s, t).auc;
  CHECK(std::fabs(a - 0.5) < 0.05);
  CHECK(a == doctest::Approx(auc_oracle(s, t)).epsilon(1e-12));
}

TEST_CASE("degenerate truth and shape mismatches throw") {
  std::vector<double> s = {1.0, 2.0, 3.0};
  std::vector<std::uint8_t> ones = {1, 1, 1};
  CHECK_THROWS_WITH_AS(roc(s, ones), doctest::Contains("degenerate truth"), DataError);
  std::vector<std::uint8_t> zeros = {0, 0, 0};
  CHECK_THROWS_AS(roc(s, zeros), DataError);
  std::vector<std::uint8_t> two = {0, 1};
  CHECK_THROWS_AS(roc(s, two), DataError);
}

TEST_CASE("ma/pa rows carry log2 coordinates and critical bounds") {
  GeneFitResult f1;
  f1.gene_id = "g1";
  f1.beta0 = 6.0;
  f1.beta1 = std::log(2.0);
  f1.covariance(1, 1) = 0.04;
  f1.p_value = 0.003;
  f1.status = FitStatus::converged;
  GeneFitResult f2;
  f2.gene_id = "g2";
  f2.beta0 = 4.0;
  f2.beta1 = 0.0;
  f2.covariance(1, 1) = 0.0;
  f2.status = FitStatus::absent_fallback;

  DetectionResult d;
  d.gene_id = "g1";
  d.p_value = 0.02;
  std::vector<GeneFitResult> fits = {f1, f2};
  std::vector<DetectionResult> dets = {d};
  std::vector<MaPaRow> rows = ma_pa_table(fits, dets, 0.01);
  REQUIRE(rows.size() == 2);
  const double log2e = 1.0 / std::log(2.0);
  CHECK(rows[0].m_log2 == doctest::Approx(1.0).epsilon(1e-12));  // ln2 in log2 units
  CHECK(rows[0].a_log2 ==
        doctest::Approx(0.5 * (6.0 + std::log(2.0)) * log2e).epsilon(1e-12));
  CHECK(rows[0].se == doctest::Approx(0.2).epsilon(1e-12));
  double q = normal_quantile(0.995);
  CHECK(rows[0].crit_hi == doctest::Approx(q * 0.2).epsilon(1e-12));
  CHECK(rows[0].crit_lo == doctest::Approx(-q * 0.2).epsilon(1e-12));
  CHECK(rows[0].detect_p == doctest::Approx(0.02));
  CHECK(rows[0].status == "converged");

  CHECK(rows[1].m_log2 == 0.0);
  CHECK(rows[1].detect_p < 0.0);  // no detection joined
  CHECK(rows[1].crit_hi == 0.0);
  CHECK(rows[1].status == "absent_fallback");
}

}  // TEST_SUITE
