#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace probekit {

// Standard normal CDF, absolute error well below 1e-10.
double normal_cdf(double x);

// Inverse of normal_cdf.
double normal_quantile(double p);

// One-sided p-value for H0: median = tau vs H1: median > tau.
// Exact null distribution (random sign flips, mid-ranks for ties, exact zeros
// dropped) for n <= 25 effective observations; continuity-corrected normal
// approximation above.
double wilcoxon_signed_rank_p(std::span<const double> values, double tau);

// argmin_b sum_i w_i (y_i - x_i'b)^2.  Throws NumericalError on a design that
// is rank deficient over the positively weighted rows.
Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& response,
                                       const Eigen::VectorXd& weights);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);  // n-1 denominator
double quantile(std::vector<double> v, double q);   // linear interpolation

}  // namespace probekit
