#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "probekit/model.hpp"

namespace probekit {

// Latin-square spike-in layout: each gene sees each concentration exactly
// once across mixtures.
struct SpikeInDesign {
  int n_genes = 0;
  std::vector<double> levels;                   // picoMolar, 0 means absent
  std::vector<std::vector<double>> assignment;  // [gene][mixture] -> concentration
  int replicates = 1;

  int n_mixtures() const { return static_cast<int>(levels.size()); }
  int n_arrays() const { return n_mixtures() * replicates; }
};

// 42 genes, levels {0, 0.125, ..., 512}, 14 mixtures, 3 replicates each.
SpikeInDesign default_latin_square();

// Generator configuration.  The variance/correlation values are presets tuned
// to produce realistic signal-to-background behavior, not measured truths.
struct SimPreset {
  double sigma_n = 0.6;
  double rho_n = 0.7;
  double sigma_s = 0.25;
  double rho_s = 0.6;
  double optical = 30.0;
  int probes_per_gene = 16;
  int probe_length = 25;
  int affinity_df = 5;
  double mu_level = 4.5;       // baseline log nonspecific mean
  double theta_offset = 5.0;   // theta = log(concentration pM) + offset
  double affinity_sd = 0.25;   // spread of the true base-effect coefficients
};

struct GroundTruth {
  ModelParams params;
  std::vector<double> true_beta1;  // per gene; 0 when not differentially expressed
};

struct SimResult {
  ProbeLevelDataset data;
  GroundTruth truth;
};

// Dataset skeleton (sequences, arrays, channels) plus full true parameters
// for a spike-in design.  mu and phi derive from random sequences through
// smooth per-base position curves, so the affinity model class contains the
// truth exactly.
SimResult build_spike_in(const SpikeInDesign& design, const SimPreset& preset,
                         std::uint64_t seed);

// Draw Y = O + exp(mu + xi) + exp(nu + phi + theta + eps) into data, with xi
// and eps jointly normal across arrays under exchangeable correlation.
// Identical seed gives a bit-identical dataset.
void draw_intensities(ProbeLevelDataset& data, const ModelParams& params,
                      std::uint64_t seed);

SimResult generate(const SpikeInDesign& design, const SimPreset& preset,
                   std::uint64_t seed);

// Two-condition experiment for differential-expression studies.
struct TwoGroupSpec {
  int n_genes = 200;
  int replicates_per_group = 3;
  double log_fold_change = 0.6931471805599453;  // ln 2 for DE genes
  double frac_de = 1.0;
  double frac_absent = 0.0;      // absent under both conditions
  double theta_min = 2.0;        // baseline theta drawn uniformly in [min,max]
  double theta_max = 9.0;
  double nu_group_delta = 0.0;   // array effect +delta (cond 1) / -delta (cond 0)
};

SimResult generate_two_group(const TwoGroupSpec& spec, const SimPreset& preset,
                             std::uint64_t seed);

// Restrict a spike-in dataset/truth to the arrays of two mixtures, relabeling
// conditions to {0 (mixture_a), 1 (mixture_b)}; true_beta1 becomes the nominal
// log fold change of each spiked gene between the two mixtures.
SimResult subset_comparison(const SimResult& sim, int mixture_a, int mixture_b);

// Two-color yeast tag screen: log intensities for J = 2 probes per tag in R
// and G channels, one array.
struct TagScreenSpec {
  int n_tags = 1000;
  double frac_dead_alive = 0.1;  // dead in R, alive in G
  double frac_dead_both = 0.1;   // dead in both channels
  double dead_mean = 5.0;
  double alive_mean = 10.0;
  double dead_sd = 0.5;
  double alive_sd = 0.5;
  double probe_sd = 0.1;         // within-tag probe noise
  double log_ratio = 0.0;        // known G-vs-R representation shift
  double frac_ratio = 0.0;       // alive/alive tags carrying log_ratio
  double heavy_tail_frac = 0.0;  // alive/alive tags with inflated ratio noise
  double heavy_tail_sd = 2.0;
  double channel_bias_g = 0.0;   // additive log-scale bias on the G channel
};

struct TagSimResult {
  std::vector<std::string> ids;
  std::vector<std::array<double, 2>> log_r;  // per tag, two probes
  std::vector<std::array<double, 2>> log_g;
  std::vector<int> truth_dead_alive;         // 1 when dead in R / alive in G
  std::vector<bool> is_ratio_tag;
  std::vector<double> true_log_ratio;
};

TagSimResult generate_tag_screen(const TagScreenSpec& spec, std::uint64_t seed);

}  // namespace probekit
