#include "probekit/pipeline.hpp"

#include <cmath>

#include "probekit/errors.hpp"

namespace probekit {

GeneData make_gene_data(const ProbeLevelDataset& data, std::size_t g,
                        const std::string& signal_channel) {
  const std::size_t h = static_cast<std::size_t>(data.channel_index(signal_channel));
  const std::size_t I = data.n_arrays();
  const std::size_t J = data.genes[g].probes.size();
  GeneData gene;
  gene.gene_id = data.genes[g].gene_id;
  gene.pm.resize(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(I));
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t i = 0; i < I; ++i)
      gene.pm(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          data.at(g, i, j, h);
  gene.condition.reserve(I);
  for (const auto& a : data.arrays) gene.condition.push_back(a.condition);
  return gene;
}

GenePlugins make_plugins(const BackgroundFit& fit, std::size_t g) {
  const std::size_t I = fit.optical.size();
  const std::size_t J = fit.phi_hat[g].size();
  GenePlugins p;
  p.mu.resize(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(I));
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t i = 0; i < I; ++i)
      p.mu(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          fit.mu_hat[g][j * I + i];
  p.phi.resize(static_cast<Eigen::Index>(J));
  for (std::size_t j = 0; j < J; ++j) p.phi(static_cast<Eigen::Index>(j)) = fit.phi_hat[g][j];
  p.nu.resize(static_cast<Eigen::Index>(I));
  for (std::size_t i = 0; i < I; ++i)
    p.nu(static_cast<Eigen::Index>(i)) = fit.nu.empty() ? 0.0 : fit.nu[i];
  p.optical = fit.optical;
  p.sigma_n = fit.sigma_n;
  p.rho_n = fit.rho_n;
  p.sigma_s = fit.sigma_s;
  p.rho_s = fit.rho_s;
  return p;
}

std::vector<GeneFitResult> run_diffexp_with_fit(const ProbeLevelDataset& data,
                                                BackgroundFit& fit,
                                                const DiffExpOptions& options) {
  const std::size_t G = data.n_genes();
  const std::size_t I = data.n_arrays();

  std::vector<GeneData> genes;
  genes.reserve(G);
  for (std::size_t g = 0; g < G; ++g)
    genes.push_back(make_gene_data(data, g, options.signal_channel));

  auto solve_all = [&]() {
    std::vector<GeneFitResult> out;
    out.reserve(G);
    for (std::size_t g = 0; g < G; ++g)
      out.push_back(solve_gee(genes[g], make_plugins(fit, g), options.gee));
    return out;
  };

  // pass 1: nu = 0
  fit.nu.assign(I, 0.0);
  std::vector<GeneFitResult> first = solve_all();

  std::vector<double> beta1, se;
  for (const auto& f : first) {
    if (f.status != FitStatus::converged) continue;
    beta1.push_back(f.beta1);
    se.push_back(std::sqrt(std::max(f.covariance(1, 1), 0.0)));
  }
  std::vector<int> condition;
  condition.reserve(I);
  for (const auto& a : data.arrays) condition.push_back(a.condition);

  bool two_group = false;
  for (int c : condition)
    if (c != condition.front()) two_group = true;
  if (two_group && !beta1.empty()) fit.nu = estimate_nu(beta1, se, condition);

  // pass 2: refit under the estimated offsets (fixed schedule, no iteration)
  return solve_all();
}

DiffExpResult run_diffexp(const ProbeLevelDataset& data, const DiffExpOptions& options) {
  DiffExpResult result;
  result.fit = fit_background(data, options.background);
  fit_signal_params(data, result.fit, options.background);
  result.genes = run_diffexp_with_fit(data, result.fit, options);
  return result;
}

std::vector<DetectionResult> run_detection(const ProbeLevelDataset& data,
                                           const BackgroundFit& fit,
                                           DetectVariant variant, double tau,
                                           int condition,
                                           const std::string& signal_channel) {
  const std::size_t I = data.n_arrays();
  std::vector<std::size_t> arrays;
  for (std::size_t i = 0; i < I; ++i)
    if (condition < 0 || data.arrays[i].condition == condition) arrays.push_back(i);
  if (arrays.empty()) throw DataError("no arrays in condition " + std::to_string(condition));

  const std::size_t hs = static_cast<std::size_t>(data.channel_index(signal_channel));
  std::size_t hm = 0;
  if (variant == DetectVariant::mas5)
    hm = static_cast<std::size_t>(data.channel_index("MM"));

  std::vector<DetectionResult> out;
  out.reserve(data.n_genes());
  for (std::size_t g = 0; g < data.n_genes(); ++g) {
    const std::size_t J = data.genes[g].probes.size();
    DetectionResult r;
    if (variant == DetectVariant::mas5) {
      std::vector<double> pm, mm;
      pm.reserve(J * arrays.size());
      mm.reserve(J * arrays.size());
      for (std::size_t i : arrays)
        for (std::size_t j = 0; j < J; ++j) {
          pm.push_back(data.at(g, i, j, hs));
          mm.push_back(data.at(g, i, j, hm));
        }
      r = mas5_detect(pm, mm, tau);
    } else {
      Eigen::MatrixXd pm(J, arrays.size()), mu(J, arrays.size());
      std::vector<double> optical;
      optical.reserve(arrays.size());
      for (std::size_t c = 0; c < arrays.size(); ++c) {
        std::size_t i = arrays[c];
        optical.push_back(fit.optical[i]);
        for (std::size_t j = 0; j < J; ++j) {
          pm(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
              data.at(g, i, j, hs);
          mu(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
              fit.mu_hat[g][j * I + i];
        }
      }
      r = model_detect(pm, mu, fit.sigma_n, fit.rho_n, optical, variant);
    }
    r.gene_id = data.genes[g].gene_id;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace probekit
