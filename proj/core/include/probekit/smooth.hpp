#pragma once

#include <span>
#include <vector>

namespace probekit {

// Piecewise-linear curve through local-regression fits at anchor abscissae.
// Immutable after construction; evaluate() is pure and thread-safe.
struct SmoothFit {
  std::vector<double> anchors;  // strictly increasing
  std::vector<double> values;
  double span = 0.0;
  int degree = 1;

  // linear interpolation between anchors, constant beyond the data range
  double evaluate(double x) const;
};

// Local linear regression with tricube weights over the span-nearest
// neighbors, fitted at each distinct x (thinned to an even 1000-point grid
// when there are more distinct abscissae than that).
SmoothFit loess_fit(std::span<const double> x, std::span<const double> y, double span);

}  // namespace probekit
