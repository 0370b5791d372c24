#pragma once

#include <span>
#include <string>
#include <vector>

#include "probekit/affinity.hpp"
#include "probekit/model.hpp"
#include "probekit/smooth.hpp"

namespace probekit {

enum class BackgroundSource {
  mm,           // MM channel trains affinity and background curve
  pm_quartile,  // half-price: lowest-quartile PM probes serve as proxies
  external,     // pre-trained affinity model supplied by the caller
};

struct BackgroundOptions {
  BackgroundSource source = BackgroundSource::mm;
  double loess_span = 0.4;
  int affinity_df = 5;
  double intensity_floor = 0.5;   // floor for Y - O before logging
  double high_stratum_frac = 0.1; // top decile of probesets by mean log intensity
};

// Plug-in estimates of Appendix-style pipeline state: optical floor, per-array
// background curves, variance/correlation components, probe effects and
// normalization offsets.
struct BackgroundFit {
  std::vector<double> optical;          // per array
  std::vector<SmoothFit> h;             // per array: log background mean vs affinity
  AffinityModel affinity;               // model behind mu_hat
  double sigma_n = 0.0, rho_n = 0.0;
  double sigma_n0_sq = 0.0;             // mean per-probe cross-array variance, background probes
  double sigma_s = 0.0, rho_s = 0.0;
  double sigma_s0_sq = 0.0;             // analog for signal probes
  std::vector<std::vector<double>> mu_hat;   // per gene: [j * I + i]
  std::vector<std::vector<double>> phi_hat;  // per gene: [j]
  std::vector<double> nu;                    // per array, mean 0
  std::vector<std::vector<bool>> background_probe;  // per gene per probe
  std::vector<bool> high_stratum;                   // per gene
  bool signal_fitted = false;

  std::string to_json() const;
  static BackgroundFit from_json(const std::string& text);
};

// Minimum observed intensity over all probes/channels on one array.
double estimate_optical(const ProbeLevelDataset& data, std::size_t array);

// Background half: optical floor, affinity training, per-array loess curves,
// mu_hat, sigma_n / rho_n and the background probe subset.
BackgroundFit fit_background(const ProbeLevelDataset& data,
                             const BackgroundOptions& options,
                             const AffinityModel* pretrained = nullptr);

// Signal half: sigma_s / rho_s from the high-expression stratum plus the
// probe-effect prediction phi_hat (0 at mean affinity).
void fit_signal_params(const ProbeLevelDataset& data, BackgroundFit& fit,
                       const BackgroundOptions& options);

// Normalization offsets for a two-condition design: a group-level offset such
// that the inverse-variance weighted mean of adjusted beta1 is 0 and
// mean(nu) = 0 across arrays.
std::vector<double> estimate_nu(std::span<const double> beta1,
                                std::span<const double> se,
                                std::span<const int> condition);

}  // namespace probekit
