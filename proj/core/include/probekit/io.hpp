#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "probekit/detect.hpp"
#include "probekit/eval.hpp"
#include "probekit/gee.hpp"
#include "probekit/model.hpp"
#include "probekit/sim.hpp"
#include "probekit/tagscreen.hpp"

namespace probekit {

// fixed-point, 6 decimals, '.' separator, never scientific
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

// write-then-rename so readers never observe a partial file
void atomic_write(const std::filesystem::path& path, const std::string& content);

// Dataset TSV: gene_id, probe_idx, channel, array_id, condition, intensity,
// sequence.  UTF-8, tab-separated, header row required.
std::string dataset_to_tsv(const ProbeLevelDataset& data);
ProbeLevelDataset dataset_from_tsv(const std::string& text,
                                   const std::string& filename = "<input>");

void write_dataset_tsv(const std::filesystem::path& path, const ProbeLevelDataset& data);
ProbeLevelDataset read_dataset_tsv(const std::filesystem::path& path);

// Ground truth: gene_id, true_beta1, absent
std::string truth_to_tsv(const ProbeLevelDataset& data, const GroundTruth& truth);

// Tag-screen ground truth: tag, dead_alive, is_ratio_tag, true_log_ratio
std::string tag_truth_to_tsv(const TagSimResult& sim);

// Tag-screen input: tag, probe_idx, log_r, log_g (one array, log scale)
struct TagData {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> log_r;  // per tag, one value per probe
  std::vector<std::vector<double>> log_g;
};
std::string tag_data_to_tsv(const TagSimResult& sim);
TagData tag_data_from_tsv(const std::string& text,
                          const std::string& filename = "<input>");

std::string detections_to_tsv(const std::vector<DetectionResult>& results);
std::vector<DetectionResult> detections_from_tsv(const std::string& text,
                                                 const std::string& filename = "<input>");
std::string diffexp_to_tsv(const std::vector<GeneFitResult>& results);
std::vector<GeneFitResult> diffexp_from_tsv(const std::string& text,
                                            const std::string& filename = "<input>");
std::string tag_results_to_tsv(const std::vector<TagResult>& results);
std::string roc_to_tsv(const RocTable& table);
std::string ma_pa_to_tsv(const std::vector<MaPaRow>& rows);

// Generic score table for the roc command: id, score, truth(0/1)
struct ScoreRow {
  std::string id;
  double score;
  int truth;
};
std::vector<ScoreRow> scores_from_tsv(const std::string& text,
                                      const std::string& filename = "<input>");

}  // namespace probekit
