#include "probekit/spline.hpp"

#include <string>

#include "probekit/errors.hpp"

namespace probekit {

std::vector<double> spline_full_basis(double x, int df, int length) {
  if (df < 3) throw DataError("spline basis needs df >= 3");
  const int order = 4;  // cubic
  const int n_interior = df - 3;
  const int n_basis = df + 1;
  const double a = 1.0, b = static_cast<double>(length);

  // clamped knot vector: a repeated 4x, interior equally spaced, b repeated 4x
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(n_basis + order));
  for (int i = 0; i < order; ++i) knots.push_back(a);
  for (int i = 1; i <= n_interior; ++i)
    knots.push_back(a + (b - a) * static_cast<double>(i) / (n_interior + 1));
  for (int i = 0; i < order; ++i) knots.push_back(b);

  // Cox-de Boor, building from degree 0 up
  std::vector<double> basis(knots.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    bool in = (x >= knots[i] && x < knots[i + 1]);
    // close the last nonempty interval at the right boundary
    if (x == b && knots[i] < b && knots[i + 1] == b) in = true;
    basis[i] = in ? 1.0 : 0.0;
  }
  for (int deg = 1; deg < order; ++deg) {
    for (std::size_t i = 0; i + deg + 1 < knots.size(); ++i) {
      double left = 0.0, right = 0.0;
      double dl = knots[i + deg] - knots[i];
      double dr = knots[i + deg + 1] - knots[i + 1];
      if (dl > 0.0) left = (x - knots[i]) / dl * basis[i];
      if (dr > 0.0) right = (knots[i + deg + 1] - x) / dr * basis[i + 1];
      basis[i] = left + right;
    }
  }
  basis.resize(static_cast<std::size_t>(n_basis));
  return basis;
}

std::vector<double> spline_basis(int position, int df, int length) {
  if (position < 1 || position > length)
    throw DataError("position out of bounds: " + std::to_string(position) +
                    " not in [1, " + std::to_string(length) + "]");
  std::vector<double> full = spline_full_basis(static_cast<double>(position), df, length);
  return std::vector<double>(full.begin() + 1, full.end());
}

}  // namespace probekit
