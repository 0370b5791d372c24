#pragma once

#include <span>
#include <string>

namespace probekit {

struct MixtureComponent {
  double mean = 0.0;
  double var = 1.0;
};

// Two-component univariate normal mixture for one channel.
struct ChannelMixture {
  MixtureComponent dead, alive;  // alive.mean > dead.mean enforced
  double weight_alive = 0.5;     // pi in (0,1)
  double log_likelihood = 0.0;
  int iterations = 0;
};

struct MixtureFit {
  ChannelMixture r, g;
};

// EM with deterministic percentile initialization; convergence when the
// log-likelihood gain drops below 1e-8 (max 500 iterations).  On collapse
// (variance < 1e-6) restarts once with a perturbed init, then throws.
ChannelMixture fit_channel_mixture(std::span<const double> log_intensities);

MixtureFit fit_mixture(std::span<const double> log_r, std::span<const double> log_g);

enum class TagClass { dead_alive, alive_dead, same };

const char* to_string(TagClass c);

struct TagResult {
  std::string id;
  double llr = 0.0;  // log L(different components) - log L(same component)
  TagClass classification = TagClass::same;
  double log_ratio = 0.0;  // only meaningful when log_ratio_valid
  bool log_ratio_valid = false;
};

// Profile likelihood ratio for a tag being in different mixture components
// across channels; xr/xg are the tag's log intensities (1 or 2 probes).
TagResult dead_alive_llr(std::span<const double> xr, std::span<const double> xg,
                         const MixtureFit& fit, double threshold = 0.0);

// Channel-bias-corrected representation difference for alive/alive tags:
// mean over probes of (x_g - alive_mean_g) - (x_r - alive_mean_r).
double log_ratio_mle(std::span<const double> xr, std::span<const double> xg,
                     const MixtureFit& fit);

}  // namespace probekit
