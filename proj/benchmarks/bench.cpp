#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "probekit/affinity.hpp"
#include "probekit/background.hpp"
#include "probekit/gee.hpp"
#include "probekit/rng.hpp"
#include "probekit/sim.hpp"
#include "probekit/smooth.hpp"

namespace {

using namespace probekit;

void bm_loess_fit(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = 10.0 * static_cast<double>(k) / static_cast<double>(n);
    y[k] = std::sin(x[k]) + 0.2 * rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(loess_fit(x, y, 0.4));
}
BENCHMARK(bm_loess_fit)->Arg(2000)->Arg(20000);

void bm_solve_gee(benchmark::State& state) {
  Rng rng(2);
  const int J = 16, I = 6;
  GeneData gene;
  gene.gene_id = "g";
  gene.condition = {0, 0, 0, 1, 1, 1};
  gene.pm.resize(J, I);
  GenePlugins plugins;
  plugins.mu = Eigen::MatrixXd::Constant(J, I, 3.5);
  plugins.phi = Eigen::VectorXd::Zero(J);
  plugins.nu = Eigen::VectorXd::Zero(I);
  plugins.optical.assign(I, 30.0);
  plugins.sigma_n = 0.5;
  plugins.rho_n = 0.7;
  plugins.sigma_s = 0.25;
  plugins.rho_s = 0.6;
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < I; ++i)
      gene.pm(j, i) = 30.0 + std::exp(3.5 + 0.5 * rng.normal()) +
                      std::exp(5.0 + 0.25 * rng.normal());
  for (auto _ : state) benchmark::DoNotOptimize(solve_gee(gene, plugins));
}
BENCHMARK(bm_solve_gee);

void bm_fit_affinity(benchmark::State& state) {
  Rng rng(3);
  const int n = static_cast<int>(state.range(0));
  static const char bases[] = {'A', 'C', 'G', 'T'};
  std::vector<std::string> seqs;
  std::vector<double> resp;
  for (int k = 0; k < n; ++k) {
    std::string s;
    for (int p = 0; p < 25; ++p) s += bases[rng.uniform_int(4)];
    seqs.push_back(s);
    resp.push_back(4.0 + rng.normal());
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_affinity(seqs, resp, 5));
}
BENCHMARK(bm_fit_affinity)->Arg(5000)->Arg(20000);

void bm_fit_background(benchmark::State& state) {
  TwoGroupSpec spec;
  spec.n_genes = static_cast<int>(state.range(0));
  spec.frac_absent = 0.5;
  SimResult sim = generate_two_group(spec, SimPreset{}, 4);
  BackgroundOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(fit_background(sim.data, opt));
}
BENCHMARK(bm_fit_background)->Arg(250)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
