#include "probekit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "probekit/errors.hpp"

namespace probekit {

double normal_cdf(double x) {
  // erfc keeps full precision in the lower tail
  return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw NumericalError("normal_quantile: p outside (0,1)");
  // Acklam's rational approximation, polished with two Newton steps on
  // normal_cdf; final accuracy is limited only by the CDF itself.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    double e = normal_cdf(x) - p;
    double pdf = std::exp(-0.5 * x * x) * 0.39894228040143267793994605993438;
    if (pdf > 0.0) x -= e / pdf;
  }
  return x;
}

namespace {

// mid-ranks of |d|, doubled so they are exact integers
std::vector<long> doubled_midranks(const std::vector<double>& absd) {
  const std::size_t n = absd.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return absd[a] < absd[b]; });
  std::vector<long> r2(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && absd[order[j + 1]] == absd[order[i]]) ++j;
    // ranks i+1 .. j+1 share the mid-rank (i+j+2)/2; doubled: i+j+2
    long doubled = static_cast<long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) r2[order[k]] = doubled;
    i = j + 1;
  }
  return r2;
}

}  // namespace

double wilcoxon_signed_rank_p(std::span<const double> values, double tau) {
  if (values.size() < 3) throw DataError("wilcoxon: insufficient probes (need >= 3)");
  std::vector<double> absd;
  std::vector<bool> positive;
  for (double v : values) {
    double d = v - tau;
    if (d == 0.0) continue;  // zero-drop convention
    absd.push_back(std::fabs(d));
    positive.push_back(d > 0.0);
  }
  const std::size_t n = absd.size();
  if (n == 0) return 0.5;

  std::vector<long> r2 = doubled_midranks(absd);
  long w2 = 0;  // doubled signed-rank statistic W+
  long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += r2[i];
    if (positive[i]) w2 += r2[i];
  }

  if (n <= 25) {
    // exact: count sign assignments with doubled W+ >= w2
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += r2[i];
      for (long s = reach; s >= r2[i]; --s)
        count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r2[i])];
    }
    double ge = 0.0;
    for (long s = w2; s <= total2; ++s) ge += count[static_cast<std::size_t>(s)];
    return ge / std::ldexp(1.0, static_cast<int>(n));
  }

  // normal approximation with tie correction and continuity correction
  double nn = static_cast<double>(n);
  double mean_w = nn * (nn + 1.0) / 4.0;
  double var_w = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  // subtract sum(t^3 - t)/48 over tie groups
  std::vector<double> sorted(absd);
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    double t = static_cast<double>(j - i + 1);
    var_w -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  double w = 0.5 * static_cast<double>(w2);
  double z = (w - mean_w - 0.5) / std::sqrt(var_w);
  return 1.0 - normal_cdf(z);
}

Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& response,
                                       const Eigen::VectorXd& weights) {
  const Eigen::Index n = design.rows(), p = design.cols();
  if (response.size() != n || weights.size() != n)
    throw DataError("weighted_least_squares: dimension mismatch");
  Eigen::VectorXd sw = weights.array().sqrt();
  Eigen::MatrixXd xs = sw.asDiagonal() * design;
  Eigen::VectorXd ys = sw.array() * response.array();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < p)
    throw NumericalError("singular design: rank " + std::to_string(qr.rank()) +
                         " of " + std::to_string(p) + " columns");
  return qr.solve(ys);
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw DataError("quantile of empty sequence");
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

}  // namespace probekit
