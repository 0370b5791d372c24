#include "probekit/model.hpp"

#include <cmath>

#include "probekit/errors.hpp"

namespace probekit {

int ProbeLevelDataset::channel_index(const std::string& name) const {
  for (std::size_t h = 0; h < channels.size(); ++h)
    if (channels[h] == name) return static_cast<int>(h);
  throw DataError("channel missing: " + name);
}

void ProbeLevelDataset::validate() const {
  if (values.size() != genes.size())
    throw DataError("dataset: gene count mismatch between metadata and values");
  const std::size_t ih = n_arrays() * n_channels();
  for (std::size_t g = 0; g < genes.size(); ++g) {
    if (values[g].size() != genes[g].probes.size() * ih)
      throw DataError("dataset: incomplete intensity block for gene " + genes[g].gene_id);
    for (double v : values[g])
      if (!(v >= 0.0)) throw DataError("dataset: negative intensity in gene " + genes[g].gene_id);
  }
}

double ModelParams::theta_at(std::size_t g, std::size_t i) const {
  if (!theta.empty() && !theta[g].empty()) return theta[g][i];
  return beta0[g] + beta1[g] * static_cast<double>(condition[i]);
}

void ModelParams::validate() const {
  if (sigma_n < 0.0 || sigma_s < 0.0) throw DataError("model params: sigma must be >= 0");
  if (rho_n < 0.0 || rho_n >= 1.0 || rho_s < 0.0 || rho_s >= 1.0)
    throw DataError("invalid correlation: rho must be in [0,1)");
}

double expected_intensity(const ModelParams& p, std::size_t g, std::size_t i,
                          std::size_t j, std::size_t h) {
  double e = p.optical[i];
  e += std::exp(p.mu[g][j * p.n_channels + h] + 0.5 * p.sigma_n * p.sigma_n);
  if (h == 0 && p.is_present(g, i))
    e += std::exp(p.nu[i] + p.phi[g][j] + p.theta_at(g, i) +
                  0.5 * p.sigma_s * p.sigma_s);
  return e;
}

MomentPair moments(const ModelParams& p, std::size_t g, std::size_t j,
                   std::size_t array_a, std::size_t array_b) {
  const double sn2 = p.sigma_n * p.sigma_n;
  const double ss2 = p.sigma_s * p.sigma_s;
  auto gamma1 = [&](std::size_t i) {
    (void)i;
    return std::exp(p.mu[g][j * p.n_channels + 0] + 0.5 * sn2);
  };
  auto gamma2 = [&](std::size_t i) {
    if (!p.is_present(g, i)) return 0.0;
    return std::exp(p.nu[i] + p.phi[g][j] + p.theta_at(g, i) + 0.5 * ss2);
  };
  MomentPair m;
  m.gamma1 = gamma1(array_a);
  m.gamma2 = gamma2(array_a);
  if (array_a == array_b) {
    m.v = m.gamma1 * m.gamma1 * (std::exp(sn2) - 1.0) +
          m.gamma2 * m.gamma2 * (std::exp(ss2) - 1.0);
    m.w = m.v;
  } else {
    double g1b = gamma1(array_b), g2b = gamma2(array_b);
    m.w = m.gamma1 * g1b * (std::exp(p.rho_n * sn2) - 1.0) +
          m.gamma2 * g2b * (std::exp(p.rho_s * ss2) - 1.0);
    m.v = m.w;
  }
  return m;
}

double intensity_covariance(const ModelParams& p, std::size_t g, std::size_t j,
                            std::size_t array_a, std::size_t array_b) {
  MomentPair m = moments(p, g, j, array_a, array_b);
  return array_a == array_b ? m.v : m.w;
}

std::vector<double> variance_profile(double sigma_n, double rho_n, double sigma_s,
                                     double rho_s, double gamma1,
                                     std::span<const double> gamma2_grid) {
  const double sn2 = sigma_n * sigma_n, ss2 = sigma_s * sigma_s;
  const double bg = std::exp(sn2) - std::exp(rho_n * sn2);
  const double sig = std::exp(ss2) - std::exp(rho_s * ss2);
  std::vector<double> out;
  out.reserve(gamma2_grid.size());
  for (double g2 : gamma2_grid) {
    if (!(g2 > 0.0)) throw DataError("variance_profile: gamma2 must be > 0");
    out.push_back((gamma1 * gamma1 * bg + g2 * g2 * sig) / (g2 * g2));
  }
  return out;
}

}  // namespace probekit
