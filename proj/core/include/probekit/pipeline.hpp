#pragma once

#include <string>
#include <vector>

#include "probekit/background.hpp"
#include "probekit/detect.hpp"
#include "probekit/gee.hpp"
#include "probekit/model.hpp"

namespace probekit {

// Per-gene views over a dataset and shared plug-in estimates.
GeneData make_gene_data(const ProbeLevelDataset& data, std::size_t g,
                        const std::string& signal_channel = "PM");
GenePlugins make_plugins(const BackgroundFit& fit, std::size_t g);

struct DiffExpOptions {
  BackgroundOptions background;
  GeeOptions gee;
  std::string signal_channel = "PM";
};

struct DiffExpResult {
  BackgroundFit fit;
  std::vector<GeneFitResult> genes;
};

// Full two-condition pipeline: plug-in estimation, a first solve of every gene
// under nu = 0, normalization offsets from the inverse-variance weighted
// contrasts, then one refit pass (two solve passes total, fixed).
DiffExpResult run_diffexp(const ProbeLevelDataset& data, const DiffExpOptions& options);

// Same two-pass schedule against an existing background/signal fit; the fit's
// nu is replaced by the estimated offsets.
std::vector<GeneFitResult> run_diffexp_with_fit(const ProbeLevelDataset& data,
                                                BackgroundFit& fit,
                                                const DiffExpOptions& options);

// One detection result per gene, pooling the selected arrays (condition < 0
// pools everything) -- replicates enter mas5 as concatenated probe pairs and
// the model tests through the effective array count.
std::vector<DetectionResult> run_detection(const ProbeLevelDataset& data,
                                           const BackgroundFit& fit,
                                           DetectVariant variant, double tau = 0.015,
                                           int condition = -1,
                                           const std::string& signal_channel = "PM");

}  // namespace probekit
