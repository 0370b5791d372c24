#include "probekit/detect.hpp"

#include <cmath>
#include <vector>

#include "probekit/errors.hpp"
#include "probekit/stats.hpp"

namespace probekit {

Call call_from_p(double p) {
  if (p < 0.4) return Call::present;
  if (p <= 0.6) return Call::marginal;
  return Call::absent;
}

const char* to_string(Call c) {
  switch (c) {
    case Call::present: return "P";
    case Call::marginal: return "M";
    default: return "A";
  }
}

const char* to_string(DetectVariant v) {
  switch (v) {
    case DetectVariant::mas5: return "mas5";
    case DetectVariant::model_pm_mm: return "model_pm_mm";
    default: return "model_half_price";
  }
}

DetectionResult mas5_detect(std::span<const double> pm, std::span<const double> mm,
                            double tau) {
  if (pm.size() != mm.size()) throw DataError("mas5_detect: PM/MM length mismatch");
  std::vector<double> r;
  for (std::size_t j = 0; j < pm.size(); ++j) {
    double s = pm[j] + mm[j];
    if (s <= 0.0) continue;  // dropped
    r.push_back((pm[j] - mm[j]) / s);
  }
  if (r.empty()) throw DataError("no valid probes");
  if (r.size() < 3) throw DataError("wilcoxon: insufficient probes (need >= 3)");
  DetectionResult out;
  out.variant = DetectVariant::mas5;
  out.statistic = mean(r);
  out.p_value = wilcoxon_signed_rank_p(r, tau);
  out.call = call_from_p(out.p_value);
  return out;
}

DetectionResult model_detect(const Eigen::MatrixXd& pm, const Eigen::MatrixXd& mu_hat,
                             double sigma_n, double rho_n,
                             std::span<const double> optical, DetectVariant variant,
                             double intensity_floor) {
  const Eigen::Index j_count = pm.rows(), i_count = pm.cols();
  if (mu_hat.rows() != j_count || mu_hat.cols() != i_count)
    throw DataError("no background model: mu_hat shape mismatch");
  if (j_count < 3) throw DataError("model_detect: need >= 3 probes");
  if (sigma_n <= 0.0) throw DataError("no background model: sigma_n not positive");

  double zsum = 0.0;
  for (Eigen::Index j = 0; j < j_count; ++j)
    for (Eigen::Index i = 0; i < i_count; ++i) {
      double adj = std::max(pm(j, i) - optical[static_cast<std::size_t>(i)],
                            intensity_floor);
      zsum += (std::log(adj) - mu_hat(j, i)) / sigma_n;
    }
  double zbar = zsum / static_cast<double>(j_count * i_count);
  double i_eff = static_cast<double>(i_count) /
                 (1.0 + (static_cast<double>(i_count) - 1.0) * rho_n);
  double t = zbar * std::sqrt(static_cast<double>(j_count) * i_eff);

  DetectionResult out;
  out.variant = variant;
  out.statistic = t;
  out.p_value = 1.0 - normal_cdf(t);
  out.call = call_from_p(out.p_value);
  return out;
}

}  // namespace probekit
