#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "probekit/detect.hpp"
#include "probekit/gee.hpp"

namespace probekit {

struct RocTable {
  // cumulative (false positives, true positives) as the threshold sweeps from
  // high scores to low, ties grouped
  std::vector<std::pair<int, int>> points;
  double auc = 0.0;
};

// Higher score means "more positive".  Throws DataError on single-class truth.
RocTable roc(std::span<const double> scores, std::span<const std::uint8_t> truth);

struct MaPaRow {
  std::string gene_id;
  double m_log2 = 0.0;       // beta1 in log2
  double a_log2 = 0.0;       // (beta1 + beta0)/2 in log2
  double se = 0.0;           // SE(beta1), natural log
  double p_value = 1.0;      // differential-expression p
  double detect_p = -1.0;    // detection p, negative when missing
  double crit_lo = 0.0;      // -quantile(1 - level/2) * SE, natural log
  double crit_hi = 0.0;
  std::string status;
};

// Joins differential-expression fits with detection p-values per gene.
std::vector<MaPaRow> ma_pa_table(std::span<const GeneFitResult> fits,
                                 std::span<const DetectionResult> detections,
                                 double level = 0.01);

}  // namespace probekit
