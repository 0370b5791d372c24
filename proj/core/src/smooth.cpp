#include "probekit/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "probekit/errors.hpp"

namespace probekit {

double SmoothFit::evaluate(double x) const {
  if (anchors.empty()) throw NumericalError("evaluate on empty SmoothFit");
  if (x <= anchors.front()) return values.front();
  if (x >= anchors.back()) return values.back();
  auto it = std::upper_bound(anchors.begin(), anchors.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - anchors.begin());
  std::size_t lo = hi - 1;
  double t = (x - anchors[lo]) / (anchors[hi] - anchors[lo]);
  return values[lo] * (1.0 - t) + values[hi] * t;
}

namespace {

double tricube(double u) {
  double t = 1.0 - u * u * u;
  return t * t * t;
}

// weighted local linear fit at x0 over points [lo, hi)
double local_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                    std::size_t lo, std::size_t hi, double x0) {
  double dmax = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    dmax = std::max(dmax, std::fabs(xs[i] - x0));
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    sw = swx = swy = swxx = swxy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      double d = std::fabs(xs[i] - x0);
      double w = (dmax > 0.0 && attempt == 0) ? tricube(d / dmax) : 1.0;
      double dx = xs[i] - x0;  // center at x0: intercept is the fit
      sw += w;
      swx += w * dx;
      swy += w * ys[i];
      swxx += w * dx * dx;
      swxy += w * dx * ys[i];
    }
    if (sw > 0.0) break;  // tricube weights can all vanish when every point sits at dmax
  }
  double det = sw * swxx - swx * swx;
  if (std::fabs(det) < 1e-12 * (sw * swxx + 1e-300)) {
    // degenerate local window, fall back to the weighted mean
    return sw > 0.0 ? swy / sw : 0.0;
  }
  return (swxx * swy - swx * swxy) / det;
}

}  // namespace

SmoothFit loess_fit(std::span<const double> x, std::span<const double> y, double span) {
  const std::size_t n = x.size();
  if (n < 10 || y.size() != n) throw DataError("loess_fit: need >= 10 points");
  if (span <= 0.0 || span > 1.0) throw DataError("loess_fit: span must be in (0,1]");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  if (xs.front() == xs.back()) throw DataError("loess_fit: degenerate abscissae");

  std::vector<double> anchors;
  for (std::size_t i = 0; i < n; ++i)
    if (i == 0 || xs[i] != xs[i - 1]) anchors.push_back(xs[i]);
  if (anchors.size() > 1000) {
    // thin to an even grid over the data range
    std::vector<double> grid(1000);
    for (std::size_t i = 0; i < 1000; ++i)
      grid[i] = xs.front() + (xs.back() - xs.front()) * static_cast<double>(i) / 999.0;
    anchors = std::move(grid);
  }

  std::size_t q = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))));
  q = std::min(q, n);

  SmoothFit fit;
  fit.span = span;
  fit.degree = 1;
  fit.anchors = anchors;
  fit.values.resize(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    double x0 = anchors[a];
    // sliding window of the q nearest points in the sorted order
    std::size_t lo = static_cast<std::size_t>(
        std::lower_bound(xs.begin(), xs.end(), x0) - xs.begin());
    std::size_t hi = lo;
    while (hi - lo < q) {
      bool can_left = lo > 0, can_right = hi < n;
      if (can_left && can_right) {
        if (x0 - xs[lo - 1] <= xs[hi] - x0)
          --lo;
        else
          ++hi;
      } else if (can_left) {
        --lo;
      } else {
        ++hi;
      }
    }
    fit.values[a] = local_linear(xs, ys, lo, hi, x0);
  }
  return fit;
}

}  // namespace probekit
