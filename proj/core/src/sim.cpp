#include "probekit/sim.hpp"

#include <algorithm>
#include <cmath>

#include "probekit/errors.hpp"
#include "probekit/rng.hpp"
#include "probekit/spline.hpp"

namespace probekit {

SpikeInDesign default_latin_square() {
  SpikeInDesign d;
  d.n_genes = 42;
  d.replicates = 3;
  d.levels.push_back(0.0);
  double c = 0.125;
  for (int k = 0; k < 13; ++k) {
    d.levels.push_back(c);
    c *= 2.0;
  }
  // gene group g/3 starts one level further along; cyclic over the 14 levels
  d.assignment.assign(42, std::vector<double>(14, 0.0));
  for (int g = 0; g < 42; ++g)
    for (int m = 0; m < 14; ++m)
      d.assignment[static_cast<std::size_t>(g)][static_cast<std::size_t>(m)] =
          d.levels[static_cast<std::size_t>((g / 3 + m) % 14)];
  return d;
}

namespace {

constexpr const char kBases[] = {'A', 'C', 'G', 'T'};

char complement(char b) {
  switch (b) {
    case 'A': return 'T';
    case 'T': return 'A';
    case 'C': return 'G';
    default: return 'C';
  }
}

std::string random_sequence(Rng& rng, int length) {
  std::string s(static_cast<std::size_t>(length), 'A');
  for (auto& c : s) c = kBases[rng.uniform_int(4)];
  return s;
}

// A smooth per-base position-effect function: for each non-reference base,
// df spline coefficients.  No intercept; that is carried by mu_level / the
// phi centering.
struct TrueAffinity {
  int df;
  int probe_length;
  std::vector<std::vector<double>> coef;  // [3][df]

  static TrueAffinity draw(Rng& rng, int df, int probe_length, double sd) {
    TrueAffinity a;
    a.df = df;
    a.probe_length = probe_length;
    a.coef.assign(3, std::vector<double>(static_cast<std::size_t>(df), 0.0));
    for (auto& block : a.coef)
      for (auto& v : block) v = sd * rng.normal();
    return a;
  }

  double value(const std::string& seq) const {
    double s = 0.0;
    for (int p = 1; p <= probe_length; ++p) {
      char b = seq[static_cast<std::size_t>(p - 1)];
      int bi = b == 'A' ? 0 : b == 'C' ? 1 : b == 'G' ? 2 : -1;
      if (bi < 0) continue;
      std::vector<double> basis = spline_basis(p, df, probe_length);
      for (int k = 0; k < df; ++k)
        s += coef[static_cast<std::size_t>(bi)][static_cast<std::size_t>(k)] *
             basis[static_cast<std::size_t>(k)];
    }
    return s;
  }
};

// Skeleton with PM/MM channels; fills sequences, mu, phi and presets.
SimResult build_skeleton(int n_genes, const std::vector<ArrayMeta>& arrays,
                         const SimPreset& preset, Rng& rng) {
  SimResult out;
  ProbeLevelDataset& data = out.data;
  ModelParams& params = out.truth.params;

  data.arrays = arrays;
  data.channels = {"PM", "MM"};
  const std::size_t I = data.n_arrays(), H = 2;
  const int J = preset.probes_per_gene;

  params.optical.assign(I, preset.optical);
  params.sigma_n = preset.sigma_n;
  params.rho_n = preset.rho_n;
  params.sigma_s = preset.sigma_s;
  params.rho_s = preset.rho_s;
  params.nu.assign(I, 0.0);
  params.n_channels = H;
  params.condition.resize(I);
  for (std::size_t i = 0; i < I; ++i) params.condition[i] = arrays[i].condition;

  TrueAffinity mu_fn =
      TrueAffinity::draw(rng, preset.affinity_df, preset.probe_length, preset.affinity_sd);
  TrueAffinity phi_fn =
      TrueAffinity::draw(rng, preset.affinity_df, preset.probe_length, preset.affinity_sd);

  data.genes.resize(static_cast<std::size_t>(n_genes));
  data.values.resize(static_cast<std::size_t>(n_genes));
  params.mu.resize(static_cast<std::size_t>(n_genes));
  params.phi.resize(static_cast<std::size_t>(n_genes));
  double phi_sum = 0.0;
  std::size_t phi_count = 0;
  for (int g = 0; g < n_genes; ++g) {
    ProbeSet& ps = data.genes[static_cast<std::size_t>(g)];
    ps.gene_id = "g" + std::to_string(g + 1);
    ps.probes.resize(static_cast<std::size_t>(J));
    params.mu[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(J) * H);
    params.phi[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
      std::string pm = random_sequence(rng, preset.probe_length);
      std::string mm = pm;
      std::size_t mid = static_cast<std::size_t>(preset.probe_length / 2);
      mm[mid] = complement(mm[mid]);
      ps.probes[static_cast<std::size_t>(j)] = {j + 1, pm};
      params.mu[static_cast<std::size_t>(g)][static_cast<std::size_t>(j) * H + 0] =
          preset.mu_level + mu_fn.value(pm);
      params.mu[static_cast<std::size_t>(g)][static_cast<std::size_t>(j) * H + 1] =
          preset.mu_level + mu_fn.value(mm);
      double phi = phi_fn.value(pm);
      params.phi[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)] = phi;
      phi_sum += phi;
      ++phi_count;
    }
    data.values[static_cast<std::size_t>(g)]
        .assign(static_cast<std::size_t>(J) * I * H, 0.0);
  }
  // identifiability: phi at average affinity is 0
  double phi_mean = phi_sum / static_cast<double>(phi_count);
  for (auto& block : params.phi)
    for (auto& v : block) v -= phi_mean;
  return out;
}

}  // namespace

void draw_intensities(ProbeLevelDataset& data, const ModelParams& params,
                      std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  const std::size_t I = data.n_arrays(), H = data.n_channels();
  const double sn = params.sigma_n, ss = params.sigma_s;
  const double cn = std::sqrt(params.rho_n), cni = std::sqrt(1.0 - params.rho_n);
  const double cs = std::sqrt(params.rho_s), csi = std::sqrt(1.0 - params.rho_s);
  std::vector<double> xi(I), eps(I);
  for (std::size_t g = 0; g < data.n_genes(); ++g) {
    const std::size_t J = data.genes[g].probes.size();
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t h = 0; h < H; ++h) {
        double z0 = rng.normal();
        for (std::size_t i = 0; i < I; ++i)
          xi[i] = sn * (cn * z0 + cni * rng.normal());
        double e0 = rng.normal();
        for (std::size_t i = 0; i < I; ++i)
          eps[i] = ss * (cs * e0 + csi * rng.normal());
        for (std::size_t i = 0; i < I; ++i) {
          double y = params.optical[i] + std::exp(params.mu[g][j * H + h] + xi[i]);
          if (h == 0 && params.is_present(g, i))
            y += std::exp(params.nu[i] + params.phi[g][j] + params.theta_at(g, i) +
                          eps[i]);
          data.at(g, i, j, h) = y;
        }
      }
    }
  }
}

SimResult build_spike_in(const SpikeInDesign& design, const SimPreset& preset,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ArrayMeta> arrays;
  for (int m = 0; m < design.n_mixtures(); ++m)
    for (int r = 0; r < design.replicates; ++r)
      arrays.push_back({"m" + std::to_string(m + 1) + "_r" + std::to_string(r + 1),
                        0, m});
  SimResult out = build_skeleton(design.n_genes, arrays, preset, rng);
  ModelParams& params = out.truth.params;
  const std::size_t I = arrays.size();
  params.theta.assign(static_cast<std::size_t>(design.n_genes),
                      std::vector<double>(I, 0.0));
  params.present.assign(static_cast<std::size_t>(design.n_genes),
                        std::vector<bool>(I, false));
  for (int g = 0; g < design.n_genes; ++g) {
    for (std::size_t i = 0; i < I; ++i) {
      int m = arrays[i].mixture;
      double conc =
          design.assignment[static_cast<std::size_t>(g)][static_cast<std::size_t>(m)];
      if (conc > 0.0) {
        params.theta[static_cast<std::size_t>(g)][i] = std::log(conc) + preset.theta_offset;
        params.present[static_cast<std::size_t>(g)][i] = true;
      }
    }
  }
  out.truth.true_beta1.assign(static_cast<std::size_t>(design.n_genes), 0.0);
  return out;
}

SimResult generate(const SpikeInDesign& design, const SimPreset& preset,
                   std::uint64_t seed) {
  SimResult out = build_spike_in(design, preset, seed);
  draw_intensities(out.data, out.truth.params, seed + 1);
  return out;
}

SimResult generate_two_group(const TwoGroupSpec& spec, const SimPreset& preset,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ArrayMeta> arrays;
  for (int c = 0; c <= 1; ++c)
    for (int r = 0; r < spec.replicates_per_group; ++r)
      arrays.push_back({"c" + std::to_string(c) + "_r" + std::to_string(r + 1), c, -1});
  SimResult out = build_skeleton(spec.n_genes, arrays, preset, rng);
  ModelParams& params = out.truth.params;
  const std::size_t I = arrays.size();
  for (std::size_t i = 0; i < I; ++i)
    params.nu[i] = spec.nu_group_delta * (params.condition[i] == 1 ? 1.0 : -1.0);

  const int n_absent = static_cast<int>(std::lround(spec.frac_absent * spec.n_genes));
  const int n_de = static_cast<int>(std::lround(spec.frac_de * (spec.n_genes - n_absent)));
  params.beta0.assign(static_cast<std::size_t>(spec.n_genes), 0.0);
  params.beta1.assign(static_cast<std::size_t>(spec.n_genes), 0.0);
  params.present.assign(static_cast<std::size_t>(spec.n_genes),
                        std::vector<bool>(I, true));
  out.truth.true_beta1.assign(static_cast<std::size_t>(spec.n_genes), 0.0);
  for (int g = 0; g < spec.n_genes; ++g) {
    std::size_t gu = static_cast<std::size_t>(g);
    params.beta0[gu] =
        spec.theta_min + (spec.theta_max - spec.theta_min) * rng.uniform();
    if (g < n_absent) {
      params.present[gu].assign(I, false);
    } else if (g < n_absent + n_de) {
      params.beta1[gu] = spec.log_fold_change;
      out.truth.true_beta1[gu] = spec.log_fold_change;
    }
  }
  draw_intensities(out.data, out.truth.params, seed + 1);
  return out;
}

SimResult subset_comparison(const SimResult& sim, int mixture_a, int mixture_b) {
  const ProbeLevelDataset& src = sim.data;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < src.n_arrays(); ++i)
    if (src.arrays[i].mixture == mixture_a || src.arrays[i].mixture == mixture_b)
      keep.push_back(i);
  if (keep.empty()) throw DataError("subset_comparison: mixtures not found");

  SimResult out;
  out.data.genes = src.genes;
  out.data.channels = src.channels;
  const std::size_t H = src.n_channels(), I = keep.size();
  for (std::size_t i : keep) {
    ArrayMeta m = src.arrays[i];
    m.condition = (m.mixture == mixture_b) ? 1 : 0;
    out.data.arrays.push_back(m);
  }
  out.data.values.resize(src.n_genes());
  const ModelParams& sp = sim.truth.params;
  ModelParams& tp = out.truth.params;
  tp = sp;
  tp.optical.clear();
  tp.nu.clear();
  tp.condition.clear();
  tp.theta.assign(src.n_genes(), {});
  tp.present.assign(src.n_genes(), {});
  for (std::size_t k = 0; k < I; ++k) {
    std::size_t i = keep[k];
    tp.optical.push_back(sp.optical[i]);
    tp.nu.push_back(sp.nu[i]);
    tp.condition.push_back(out.data.arrays[k].condition);
  }
  out.truth.true_beta1.assign(src.n_genes(), 0.0);
  for (std::size_t g = 0; g < src.n_genes(); ++g) {
    const std::size_t J = src.genes[g].probes.size();
    out.data.values[g].assign(J * I * H, 0.0);
    tp.theta[g].resize(I);
    tp.present[g].resize(I);
    for (std::size_t k = 0; k < I; ++k) {
      std::size_t i = keep[k];
      tp.theta[g][k] = sp.theta.empty() ? 0.0 : sp.theta[g][i];
      tp.present[g][k] = sp.is_present(g, i);
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t h = 0; h < H; ++h)
          out.data.values[g][(j * I + k) * H + h] = src.at(g, i, j, h);
    }
    // nominal log fold change between the two mixtures, when defined
    double ta = 0.0, tb = 0.0;
    bool pa = false, pb = false;
    for (std::size_t k = 0; k < I; ++k) {
      if (out.data.arrays[k].condition == 0 && tp.present[g][k]) {
        ta = tp.theta[g][k];
        pa = true;
      }
      if (out.data.arrays[k].condition == 1 && tp.present[g][k]) {
        tb = tp.theta[g][k];
        pb = true;
      }
    }
    if (pa && pb) out.truth.true_beta1[g] = tb - ta;
  }
  return out;
}

TagSimResult generate_tag_screen(const TagScreenSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  TagSimResult out;
  const int n = spec.n_tags;
  const int n_da = static_cast<int>(std::lround(spec.frac_dead_alive * n));
  const int n_db = static_cast<int>(std::lround(spec.frac_dead_both * n));
  const int n_ratio = static_cast<int>(std::lround(spec.frac_ratio * n));
  const int n_heavy = static_cast<int>(std::lround(spec.heavy_tail_frac * n));
  out.ids.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    out.ids.push_back("tag" + std::to_string(t + 1));
    bool dead_alive = t < n_da;
    bool dead_both = !dead_alive && t < n_da + n_db;
    bool ratio_tag = !dead_alive && !dead_both && t < n_da + n_db + n_ratio;
    bool heavy =
        !dead_alive && !dead_both && !ratio_tag && t < n_da + n_db + n_ratio + n_heavy;
    out.truth_dead_alive.push_back(dead_alive ? 1 : 0);
    out.is_ratio_tag.push_back(ratio_tag);

    double theta_r = 0.0, theta_g = 0.0, lr = 0.0;
    if (dead_alive) {
      theta_g = spec.alive_mean + spec.alive_sd * rng.normal();
    } else if (!dead_both) {
      theta_r = spec.alive_mean + spec.alive_sd * rng.normal();
      if (ratio_tag)
        lr = spec.log_ratio;
      else if (heavy)
        lr = spec.heavy_tail_sd * rng.normal();
      theta_g = theta_r + lr;
    }
    out.true_log_ratio.push_back(lr);

    std::array<double, 2> xr{}, xg{};
    for (int j = 0; j < 2; ++j) {
      std::size_t ju = static_cast<std::size_t>(j);
      if (dead_alive || dead_both)
        xr[ju] = spec.dead_mean + spec.dead_sd * rng.normal();
      else
        xr[ju] = theta_r + spec.probe_sd * rng.normal();
      if (dead_both)
        xg[ju] = spec.dead_mean + spec.dead_sd * rng.normal() + spec.channel_bias_g;
      else
        xg[ju] = theta_g + spec.probe_sd * rng.normal() + spec.channel_bias_g;
    }
    out.log_r.push_back(xr);
    out.log_g.push_back(xg);
  }
  return out;
}

}  // namespace probekit
