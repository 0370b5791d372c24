#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace probekit {

struct ArrayMeta {
  std::string id;
  int condition = 0;  // X_i in {0,1} for two-group designs
  int mixture = -1;   // spike-in mixture index, -1 when not applicable
};

struct Probe {
  int index = 0;            // j, 1-based in files
  std::string sequence;     // over {A,C,G,T}, typically length 25
};

struct ProbeSet {
  std::string gene_id;
  std::vector<Probe> probes;
};

// Probe intensities Y indexed by (gene g, array i, probe j, channel h).
// Per-gene blocks laid out as [(j * I + i) * H + h].
struct ProbeLevelDataset {
  std::vector<ProbeSet> genes;
  std::vector<ArrayMeta> arrays;
  std::vector<std::string> channels;        // e.g. {"PM","MM"} or {"R","G"}
  std::vector<std::vector<double>> values;  // one block per gene

  std::size_t n_genes() const { return genes.size(); }
  std::size_t n_arrays() const { return arrays.size(); }
  std::size_t n_channels() const { return channels.size(); }

  double at(std::size_t g, std::size_t i, std::size_t j, std::size_t h) const {
    return values[g][(j * n_arrays() + i) * n_channels() + h];
  }
  double& at(std::size_t g, std::size_t i, std::size_t j, std::size_t h) {
    return values[g][(j * n_arrays() + i) * n_channels() + h];
  }
  int channel_index(const std::string& name) const;
  void validate() const;  // throws DataError on shape/negativity violations
};

// All model parameters: optical floor O, background (mu, sigma_n, rho_n),
// signal (nu, phi, theta via beta0/beta1 or per-array theta, sigma_s, rho_s).
// Log-scale parameters are natural log.
struct ModelParams {
  std::vector<double> optical;             // per array
  std::vector<std::vector<double>> mu;     // per gene: [j * H + h]
  double sigma_n = 0.0;
  double rho_n = 0.0;                      // in [0,1)
  std::vector<double> nu;                  // per array, mean 0
  std::vector<std::vector<double>> phi;    // per gene: [j]; 0 at average affinity
  std::vector<double> beta0, beta1;        // per gene; theta_gi = beta0 + beta1 * X_i
  std::vector<std::vector<double>> theta;  // optional per gene per array; overrides beta
  std::vector<int> condition;              // X_i per array
  double sigma_s = 0.0;
  double rho_s = 0.0;
  std::vector<std::vector<bool>> present;  // per gene per array; S term dropped if false

  std::size_t n_channels = 2;
  std::size_t n_arrays() const { return optical.size(); }

  bool is_present(std::size_t g, std::size_t i) const {
    return present.empty() || present[g].empty() || present[g][i];
  }
  double theta_at(std::size_t g, std::size_t i) const;
  void validate() const;
};

struct MomentPair {
  double gamma1 = 0.0;  // E[N]
  double gamma2 = 0.0;  // E[S]
  double v = 0.0;       // var(Y) within array
  double w = 0.0;       // cov(Y) across arrays
};

// E[Y_gijh] = O_i + exp(mu + sigma_n^2/2) + exp(nu_i + phi + theta_gi + sigma_s^2/2),
// with the S term only on the signal channel (h = 0) and only for present genes.
double expected_intensity(const ModelParams& p, std::size_t g, std::size_t i,
                          std::size_t j, std::size_t h);

// Same-array variance V or cross-array covariance W of Y on the signal channel,
// gammas evaluated per array.
double intensity_covariance(const ModelParams& p, std::size_t g, std::size_t j,
                            std::size_t array_a, std::size_t array_b);

MomentPair moments(const ModelParams& p, std::size_t g, std::size_t j,
                   std::size_t array_a, std::size_t array_b);

// Variance of the estimated two-group contrast as a function of signal level:
// [gamma1^2 (e^{sn2} - e^{rn sn2}) + gamma2^2 (e^{ss2} - e^{rs ss2})] / gamma2^2,
// normalized so the gamma2 -> inf limit is e^{ss2} - e^{rs ss2}.
std::vector<double> variance_profile(double sigma_n, double rho_n, double sigma_s,
                                     double rho_s, double gamma1,
                                     std::span<const double> gamma2_grid);

}  // namespace probekit
