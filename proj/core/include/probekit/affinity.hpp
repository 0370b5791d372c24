#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace probekit {

// Sequence-based probe affinity: intercept plus per-base position effects,
// each a smooth (spline) function of position.  Base T is the reference
// level, so 1 + 3*df free parameters.
struct AffinityModel {
  int df = 5;
  int probe_length = 25;
  double intercept = 0.0;
  // coefficients[b][k], b in {A=0, C=1, G=2}, k in [0, df)
  std::vector<std::vector<double>> coefficients;
  double residual_sd = 0.0;
  bool intercept_only = false;  // set when the design was rank deficient

  std::string to_json() const;
  static AffinityModel from_json(const std::string& text);
};

// Design row for one sequence: [1, A-block(df), C-block(df), G-block(df)].
Eigen::RowVectorXd affinity_design_row(const std::string& sequence, int df,
                                       int probe_length);

// Least-squares fit of responses on the base-indicator spline design.
// Falls back to an intercept-only model when the design is rank deficient.
AffinityModel fit_affinity(std::span<const std::string> sequences,
                           std::span<const double> responses, int df = 5);

double predict_affinity(const AffinityModel& model, const std::string& sequence);

}  // namespace probekit
