#pragma once

#include <stdexcept>
#include <string>

namespace probekit {

// Malformed or insufficient input data (files, datasets, degenerate inputs).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: singular systems, non-convergence, degenerate fits.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace probekit
