#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace probekit {

enum class FitStatus { converged, absent_fallback, failed };

const char* to_string(FitStatus s);

// One gene's probe-level data for the estimating-equation solve.
struct GeneData {
  std::string gene_id;
  Eigen::MatrixXd pm;          // J x I, raw intensities
  std::vector<int> condition;  // X_i per array
};

// Shared immutable plug-in estimates, restricted to one gene.
struct GenePlugins {
  Eigen::MatrixXd mu;           // J x I
  Eigen::VectorXd phi;          // J
  Eigen::VectorXd nu;           // I
  std::vector<double> optical;  // I
  double sigma_n = 0.0, rho_n = 0.0;
  double sigma_s = 0.0, rho_s = 0.0;
};

struct GeeOptions {
  double step_tol = 1e-8;
  int max_iter = 100;
  bool no_background = false;  // force the N term to 0 (bias-comparison baseline)
  double intensity_floor = 0.5;
};

// Bread and meat of the sandwich, averaged over probes.
struct GeeInternals {
  Eigen::Matrix2d bread = Eigen::Matrix2d::Zero();  // D_hat
  Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();   // Omega_hat
  int n_probes = 0;
};

struct GeneFitResult {
  std::string gene_id;
  double beta0 = 0.0, beta1 = 0.0;  // natural log scale
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double p_value = 1.0;             // two-sided for beta1 = 0 (or detection p on fallback)
  FitStatus status = FitStatus::failed;
  int iterations = 0;
  GeeInternals internals;
};

// Damped Newton solve of the per-gene estimating equation with a diagonal
// working covariance evaluated at the current iterate.
GeneFitResult solve_gee(const GeneData& gene, const GenePlugins& plugins,
                        const GeeOptions& options = {});

// D^-1 Omega D^-1' / J
Eigen::Matrix2d sandwich_covariance(const GeeInternals& internals);

struct DeTestResult {
  bool reject = false;
  double p_value = 1.0;
  double lower = 0.0, upper = 0.0;  // +- quantile(1 - level/2) * SE(beta1)
};

DeTestResult de_test(const GeneFitResult& fit, double level = 0.01);

// Identical solve with the background component forced to zero.
GeneFitResult no_background_baseline(const GeneData& gene, const GenePlugins& plugins,
                                     GeeOptions options = {});

}  // namespace probekit
