#include "probekit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "probekit/errors.hpp"
#include "probekit/stats.hpp"

namespace probekit {

RocTable roc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
  if (scores.size() != truth.size()) throw DataError("roc: score/truth length mismatch");
  int pos = 0, neg = 0;
  for (std::uint8_t t : truth) (t ? pos : neg)++;
  if (pos == 0 || neg == 0) throw DataError("degenerate truth");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocTable out;
  out.points.emplace_back(0, 0);
  int fp = 0, tp = 0;
  double area2 = 0.0;  // twice the unnormalized trapezoid area
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t k2 = k;
    int dfp = 0, dtp = 0;
    while (k2 < order.size() && scores[order[k2]] == scores[order[k]]) {
      (truth[order[k2]] ? dtp : dfp)++;
      ++k2;
    }
    area2 += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
    fp += dfp;
    tp += dtp;
    out.points.emplace_back(fp, tp);
    k = k2;
  }
  out.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

std::vector<MaPaRow> ma_pa_table(std::span<const GeneFitResult> fits,
                                 std::span<const DetectionResult> detections,
                                 double level) {
  std::map<std::string, double> detect_p;
  for (const auto& d : detections) detect_p[d.gene_id] = d.p_value;
  const double log2e = 1.4426950408889634;  // 1/ln 2
  const double q = normal_quantile(1.0 - level / 2.0);
  std::vector<MaPaRow> rows;
  rows.reserve(fits.size());
  for (const auto& f : fits) {
    MaPaRow r;
    r.gene_id = f.gene_id;
    r.m_log2 = f.beta1 * log2e;
    r.a_log2 = 0.5 * (f.beta1 + f.beta0) * log2e;
    r.se = std::sqrt(std::max(f.covariance(1, 1), 0.0));
    r.p_value = f.p_value;
    auto it = detect_p.find(f.gene_id);
    if (it != detect_p.end()) r.detect_p = it->second;
    r.crit_lo = -q * r.se;
    r.crit_hi = q * r.se;
    r.status = to_string(f.status);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace probekit
