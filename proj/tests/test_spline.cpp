#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "probekit/errors.hpp"
#include "probekit/spline.hpp"

using namespace probekit;

namespace {

// Independent recursive de Boor oracle over the same documented knot layout:
// clamped cubic on [1, length] with df-3 equally spaced interior knots.
double deboor_recursive(const std::vector<double>& knots, std::size_t i, int deg,
                        double x, double right_end) {
  if (deg == 0) {
    if (x == right_end) return knots[i] < right_end && knots[i + 1] == right_end;
    return knots[i] <= x && x < knots[i + 1];
  }
  double left = 0.0, right = 0.0;
  double dl = knots[i + static_cast<std::size_t>(deg)] - knots[i];
  double dr = knots[i + static_cast<std::size_t>(deg) + 1] - knots[i + 1];
  if (dl > 0.0)
    left = (x - knots[i]) / dl * deboor_recursive(knots, i, deg - 1, x, right_end);
  if (dr > 0.0)
    right = (knots[i + static_cast<std::size_t>(deg) + 1] - x) / dr *
            deboor_recursive(knots, i + 1, deg - 1, x, right_end);
  return left + right;
}

std::vector<double> oracle_basis(double x, int df, int length) {
  std::vector<double> knots(4, 1.0);
  for (int i = 1; i <= df - 3; ++i)
    knots.push_back(1.0 + (length - 1.0) * i / (df - 2.0));
  knots.insert(knots.end(), 4, static_cast<double>(length));
  std::vector<double> out;
  for (int i = 0; i < df + 1; ++i)
    out.push_back(deboor_recursive(knots, static_cast<std::size_t>(i), 3, x,
                                   static_cast<double>(length)));
  return out;
}

}  // namespace

TEST_SUITE("spline") {

TEST_CASE("matches the recursive de Boor oracle") {
  for (int df : {3, 4, 5, 8}) {
    for (double x = 1.0; x <= 25.0; x += 0.25) {
      std::vector<double> got = spline_full_basis(x, df, 25);
      std::vector<double> want = oracle_basis(x, df, 25);
      REQUIRE(got.size() == want.size());
      for (std::size_t k = 0; k < got.size(); ++k) {
        CAPTURE(df);
        CAPTURE(x);
        CAPTURE(k);
        CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("partition of unity and nonnegativity") {
  for (int df : {3, 5, 7}) {
    for (double x = 1.0; x <= 25.0; x += 0.125) {
      std::vector<double> b = spline_full_basis(x, df, 25);
      CHECK(b.size() == static_cast<std::size_t>(df) + 1);
      double s = 0.0;
      for (double v : b) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("regression basis drops the first function") {
  std::vector<double> full = spline_full_basis(7.0, 5, 25);
  std::vector<double> reg = spline_basis(7, 5, 25);
  REQUIRE(reg.size() == 5);
  for (std::size_t k = 0; k < reg.size(); ++k)
    CHECK(reg[k] == doctest::Approx(full[k + 1]).epsilon(1e-15));
}

TEST_CASE("design over all positions has full column rank with intercept") {
  const int df = 5, length = 25;
  Eigen::MatrixXd x(length, df + 1);
  for (int pos = 1; pos <= length; ++pos) {
    x(pos - 1, 0) = 1.0;
    std::vector<double> b = spline_basis(pos, df, length);
    for (int k = 0; k < df; ++k) x(pos - 1, k + 1) = b[static_cast<std::size_t>(k)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  CHECK(qr.rank() == df + 1);
}

TEST_CASE("bounds and degree checks") {
  CHECK_THROWS_AS(spline_basis(0, 5, 25), DataError);
  CHECK_THROWS_AS(spline_basis(26, 5, 25), DataError);
  CHECK_THROWS_AS(spline_full_basis(3.0, 2, 25), DataError);
  CHECK_NOTHROW(spline_basis(1, 5, 25));
  CHECK_NOTHROW(spline_basis(25, 5, 25));
}

}  // TEST_SUITE
