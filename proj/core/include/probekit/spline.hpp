#pragma once

#include <vector>

namespace probekit {

// Cubic B-spline basis on [1, length] with df-3 equally spaced interior knots
// (clamped knot vector).  Returns all df+1 basis values; they are nonnegative
// and sum to 1 at any point of the interval.
std::vector<double> spline_full_basis(double x, int df, int length);

// Basis with the intercept absorbed elsewhere: the first function of the full
// basis is dropped, leaving df columns for regression alongside an intercept.
// position is integral in [1, length]; throws DataError outside that range.
std::vector<double> spline_basis(int position, int df, int length = 25);

}  // namespace probekit
