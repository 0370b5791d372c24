#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

namespace probekit {

enum class Call { present, marginal, absent };
enum class DetectVariant { mas5, model_pm_mm, model_half_price };

struct DetectionResult {
  std::string gene_id;
  DetectVariant variant = DetectVariant::mas5;
  double statistic = 0.0;
  double p_value = 1.0;
  Call call = Call::absent;
};

// p < 0.4 -> P, 0.4 <= p <= 0.6 -> M, p > 0.6 -> A
Call call_from_p(double p);

const char* to_string(Call c);
const char* to_string(DetectVariant v);

// Wilcoxon test on R = (PM - MM)/(PM + MM) against median tau.
// PM/MM are per-probe intensities on one array (or pooled replicates).
DetectionResult mas5_detect(std::span<const double> pm, std::span<const double> mm,
                            double tau = 0.015);

// Model-based presence test: standardized log background residuals averaged
// over probes and arrays, with the effective number of arrays adjusted for
// cross-array correlation.  pm and mu_hat are J x I.
DetectionResult model_detect(const Eigen::MatrixXd& pm, const Eigen::MatrixXd& mu_hat,
                             double sigma_n, double rho_n,
                             std::span<const double> optical,
                             DetectVariant variant = DetectVariant::model_pm_mm,
                             double intensity_floor = 0.5);

}  // namespace probekit
