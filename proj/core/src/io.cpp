#include "probekit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "probekit/errors.hpp"

namespace probekit {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("cannot format non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

[[noreturn]] void parse_fail(const std::string& file, std::size_t line, std::size_t col,
                             const std::string& msg) {
  throw DataError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Plain decimal notation only: optional sign, digits, optional fraction.
double parse_number(const std::string& s, const std::string& file, std::size_t line,
                    std::size_t col) {
  if (s.empty()) parse_fail(file, line, col, "empty numeric field");
  for (char c : s)
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+'))
      parse_fail(file, line, col, "invalid numeric field '" + s + "'");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    parse_fail(file, line, col, "invalid numeric field '" + s + "'");
  return v;
}

long parse_int(const std::string& s, const std::string& file, std::size_t line,
               std::size_t col) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    parse_fail(file, line, col, "invalid integer field '" + s + "'");
  return v;
}

const char* kDatasetHeader = "gene_id\tprobe_idx\tchannel\tarray_id\tcondition\tintensity\tsequence";

struct RawRow {
  std::size_t line;
  std::string gene_id, channel, array_id, sequence;
  long probe_idx, condition;
  double intensity;
};

}  // namespace

std::string dataset_to_tsv(const ProbeLevelDataset& data) {
  std::string out = kDatasetHeader;
  out += '\n';
  for (std::size_t g = 0; g < data.n_genes(); ++g) {
    const ProbeSet& gene = data.genes[g];
    for (std::size_t j = 0; j < gene.probes.size(); ++j) {
      for (std::size_t h = 0; h < data.n_channels(); ++h) {
        for (std::size_t i = 0; i < data.n_arrays(); ++i) {
          out += gene.gene_id;
          out += '\t';
          out += std::to_string(gene.probes[j].index);
          out += '\t';
          out += data.channels[h];
          out += '\t';
          out += data.arrays[i].id;
          out += '\t';
          out += std::to_string(data.arrays[i].condition);
          out += '\t';
          out += format_double(data.at(g, i, j, h));
          out += '\t';
          out += gene.probes[j].sequence;
          out += '\n';
        }
      }
    }
  }
  return out;
}

ProbeLevelDataset dataset_from_tsv(const std::string& text, const std::string& filename) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(filename, 1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader)
    parse_fail(filename, 1, 1, std::string("bad header, expected '") + kDatasetHeader + "'");

  std::vector<RawRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 7)
      parse_fail(filename, lineno, 1,
                 "expected 7 tab-separated fields, got " + std::to_string(f.size()));
    RawRow r;
    r.line = lineno;
    r.gene_id = f[0];
    if (r.gene_id.empty()) parse_fail(filename, lineno, 1, "empty gene_id");
    r.probe_idx = parse_int(f[1], filename, lineno, 2);
    if (r.probe_idx < 1) parse_fail(filename, lineno, 2, "probe_idx must be >= 1");
    r.channel = f[2];
    if (r.channel.empty()) parse_fail(filename, lineno, 3, "empty channel");
    r.array_id = f[3];
    if (r.array_id.empty()) parse_fail(filename, lineno, 4, "empty array_id");
    r.condition = parse_int(f[4], filename, lineno, 5);
    r.intensity = parse_number(f[5], filename, lineno, 6);
    if (r.intensity < 0.0) parse_fail(filename, lineno, 6, "negative intensity");
    r.sequence = f[6];
    rows.push_back(std::move(r));
  }
  if (rows.empty()) parse_fail(filename, lineno, 1, "no data rows");

  ProbeLevelDataset data;
  std::map<std::string, std::size_t> gene_ix, array_ix, channel_ix;
  std::map<std::pair<std::size_t, long>, std::size_t> probe_ix;  // (gene, probe_idx) -> j
  for (const RawRow& r : rows) {
    auto [gi, gnew] = gene_ix.try_emplace(r.gene_id, data.genes.size());
    if (gnew) data.genes.push_back({r.gene_id, {}});
    std::size_t g = gi->second;
    auto [ai, anew] = array_ix.try_emplace(r.array_id, data.arrays.size());
    if (anew)
      data.arrays.push_back({r.array_id, static_cast<int>(r.condition), -1});
    else if (data.arrays[ai->second].condition != static_cast<int>(r.condition))
      parse_fail(filename, r.line, 5,
                 "conflicting condition for array " + r.array_id);
    auto [hi, hnew] = channel_ix.try_emplace(r.channel, data.channels.size());
    if (hnew) data.channels.push_back(r.channel);
    auto [pi, pnew] = probe_ix.try_emplace({g, r.probe_idx}, data.genes[g].probes.size());
    if (pnew)
      data.genes[g].probes.push_back({static_cast<int>(r.probe_idx), r.sequence});
    else if (data.genes[g].probes[pi->second].sequence != r.sequence)
      parse_fail(filename, r.line, 7,
                 "conflicting sequence for probe " + std::to_string(r.probe_idx) +
                     " of gene " + r.gene_id);
  }

  const std::size_t I = data.n_arrays(), H = data.n_channels();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  data.values.resize(data.n_genes());
  for (std::size_t g = 0; g < data.n_genes(); ++g)
    data.values[g].assign(data.genes[g].probes.size() * I * H, nan);
  for (const RawRow& r : rows) {
    std::size_t g = gene_ix.at(r.gene_id);
    std::size_t i = array_ix.at(r.array_id);
    std::size_t h = channel_ix.at(r.channel);
    std::size_t j = probe_ix.at({g, r.probe_idx});
    double& cell = data.values[g][(j * I + i) * H + h];
    if (!std::isnan(cell))
      parse_fail(filename, r.line, 1,
                 "duplicate measurement for gene " + r.gene_id + " probe " +
                     std::to_string(r.probe_idx) + " channel " + r.channel +
                     " array " + r.array_id);
    cell = r.intensity;
  }
  for (std::size_t g = 0; g < data.n_genes(); ++g)
    for (double v : data.values[g])
      if (std::isnan(v))
        throw DataError(filename + ": incomplete dataset, gene " +
                        data.genes[g].gene_id + " is missing measurements");
  data.validate();
  return data;
}

void write_dataset_tsv(const std::filesystem::path& path, const ProbeLevelDataset& data) {
  atomic_write(path, dataset_to_tsv(data));
}

ProbeLevelDataset read_dataset_tsv(const std::filesystem::path& path) {
  return dataset_from_tsv(read_file(path), path.string());
}

std::string truth_to_tsv(const ProbeLevelDataset& data, const GroundTruth& truth) {
  std::string out = "gene_id\ttrue_beta1\tabsent\n";
  for (std::size_t g = 0; g < data.n_genes(); ++g) {
    bool absent = true;
    for (std::size_t i = 0; i < data.n_arrays() && absent; ++i)
      if (truth.params.is_present(g, i)) absent = false;
    out += data.genes[g].gene_id;
    out += '\t';
    out += format_double(truth.true_beta1[g]);
    out += '\t';
    out += absent ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string tag_truth_to_tsv(const TagSimResult& sim) {
  std::string out = "tag\tdead_alive\tis_ratio_tag\ttrue_log_ratio\n";
  for (std::size_t k = 0; k < sim.ids.size(); ++k) {
    out += sim.ids[k];
    out += '\t';
    out += sim.truth_dead_alive[k] ? '1' : '0';
    out += '\t';
    out += sim.is_ratio_tag[k] ? '1' : '0';
    out += '\t';
    out += format_double(sim.true_log_ratio[k]);
    out += '\n';
  }
  return out;
}

std::string tag_data_to_tsv(const TagSimResult& sim) {
  std::string out = "tag\tprobe_idx\tlog_r\tlog_g\n";
  for (std::size_t k = 0; k < sim.ids.size(); ++k) {
    for (int j = 0; j < 2; ++j) {
      out += sim.ids[k];
      out += '\t';
      out += std::to_string(j + 1);
      out += '\t';
      out += format_double(sim.log_r[k][static_cast<std::size_t>(j)]);
      out += '\t';
      out += format_double(sim.log_g[k][static_cast<std::size_t>(j)]);
      out += '\n';
    }
  }
  return out;
}

TagData tag_data_from_tsv(const std::string& text, const std::string& filename) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(filename, 1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tag\tprobe_idx\tlog_r\tlog_g")
    parse_fail(filename, 1, 1, "bad header, expected 'tag\tprobe_idx\tlog_r\tlog_g'");
  TagData out;
  std::map<std::string, std::size_t> ix;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 4)
      parse_fail(filename, lineno, 1,
                 "expected 4 tab-separated fields, got " + std::to_string(f.size()));
    if (f[0].empty()) parse_fail(filename, lineno, 1, "empty tag");
    parse_int(f[1], filename, lineno, 2);  // validated but ordering is positional
    double r = parse_number(f[2], filename, lineno, 3);
    double g = parse_number(f[3], filename, lineno, 4);
    auto [it, fresh] = ix.try_emplace(f[0], out.ids.size());
    if (fresh) {
      out.ids.push_back(f[0]);
      out.log_r.emplace_back();
      out.log_g.emplace_back();
    }
    out.log_r[it->second].push_back(r);
    out.log_g[it->second].push_back(g);
  }
  if (out.ids.empty()) parse_fail(filename, lineno, 1, "no data rows");
  return out;
}

namespace {

DetectVariant variant_from_string(const std::string& s, const std::string& file,
                                  std::size_t line) {
  if (s == "mas5") return DetectVariant::mas5;
  if (s == "model_pm_mm") return DetectVariant::model_pm_mm;
  if (s == "model_half_price") return DetectVariant::model_half_price;
  parse_fail(file, line, 2, "unknown variant '" + s + "'");
}

Call call_from_string(const std::string& s, const std::string& file, std::size_t line) {
  if (s == "P") return Call::present;
  if (s == "M") return Call::marginal;
  if (s == "A") return Call::absent;
  parse_fail(file, line, 5, "unknown call '" + s + "'");
}

FitStatus status_from_string(const std::string& s, const std::string& file,
                             std::size_t line) {
  if (s == "converged") return FitStatus::converged;
  if (s == "absent_fallback") return FitStatus::absent_fallback;
  if (s == "failed") return FitStatus::failed;
  parse_fail(file, line, 7, "unknown status '" + s + "'");
}

}  // namespace

std::string detections_to_tsv(const std::vector<DetectionResult>& results) {
  std::string out = "gene_id\tvariant\tstatistic\tp_value\tcall\n";
  for (const auto& d : results) {
    out += d.gene_id;
    out += '\t';
    out += to_string(d.variant);
    out += '\t';
    out += format_double(d.statistic);
    out += '\t';
    out += format_double(d.p_value);
    out += '\t';
    out += to_string(d.call);
    out += '\n';
  }
  return out;
}

std::string diffexp_to_tsv(const std::vector<GeneFitResult>& results) {
  const double log2e = 1.4426950408889634;
  std::string out = "gene_id\tbeta0\tbeta1\tbeta1_log2\tse_beta1\tp_value\tstatus\titerations\n";
  for (const auto& f : results) {
    double se = std::sqrt(std::max(f.covariance(1, 1), 0.0));
    out += f.gene_id;
    out += '\t';
    out += format_double(f.beta0);
    out += '\t';
    out += format_double(f.beta1);
    out += '\t';
    out += format_double(f.beta1 * log2e);
    out += '\t';
    out += format_double(se);
    out += '\t';
    out += format_double(f.p_value);
    out += '\t';
    out += to_string(f.status);
    out += '\t';
    out += std::to_string(f.iterations);
    out += '\n';
  }
  return out;
}

std::string tag_results_to_tsv(const std::vector<TagResult>& results) {
  const double log2e = 1.4426950408889634;
  std::string out = "tag\tllr\tclassification\tlog_ratio\tlog2_ratio\n";
  for (const auto& t : results) {
    out += t.id;
    out += '\t';
    out += format_double(t.llr);
    out += '\t';
    out += to_string(t.classification);
    out += '\t';
    if (t.log_ratio_valid) {
      out += format_double(t.log_ratio);
      out += '\t';
      out += format_double(t.log_ratio * log2e);
    } else {
      out += "NA\tNA";
    }
    out += '\n';
  }
  return out;
}

std::vector<DetectionResult> detections_from_tsv(const std::string& text,
                                                 const std::string& filename) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(filename, 1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "gene_id\tvariant\tstatistic\tp_value\tcall")
    parse_fail(filename, 1, 1, "bad detection header");
  std::vector<DetectionResult> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 5)
      parse_fail(filename, lineno, 1,
                 "expected 5 tab-separated fields, got " + std::to_string(f.size()));
    DetectionResult d;
    d.gene_id = f[0];
    d.variant = variant_from_string(f[1], filename, lineno);
    d.statistic = parse_number(f[2], filename, lineno, 3);
    d.p_value = parse_number(f[3], filename, lineno, 4);
    d.call = call_from_string(f[4], filename, lineno);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<GeneFitResult> diffexp_from_tsv(const std::string& text,
                                            const std::string& filename) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(filename, 1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "gene_id\tbeta0\tbeta1\tbeta1_log2\tse_beta1\tp_value\tstatus\titerations")
    parse_fail(filename, 1, 1, "bad diffexp header");
  std::vector<GeneFitResult> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 8)
      parse_fail(filename, lineno, 1,
                 "expected 8 tab-separated fields, got " + std::to_string(f.size()));
    GeneFitResult r;
    r.gene_id = f[0];
    r.beta0 = parse_number(f[1], filename, lineno, 2);
    r.beta1 = parse_number(f[2], filename, lineno, 3);
    double se = parse_number(f[4], filename, lineno, 5);
    r.covariance(1, 1) = se * se;
    r.p_value = parse_number(f[5], filename, lineno, 6);
    r.status = status_from_string(f[6], filename, lineno);
    r.iterations = static_cast<int>(parse_int(f[7], filename, lineno, 8));
    out.push_back(std::move(r));
  }
  return out;
}

std::string roc_to_tsv(const RocTable& table) {
  std::string out = "#auc\t" + format_double(table.auc) + "\n";
  out += "false_positives\ttrue_positives\n";
  for (const auto& [fp, tp] : table.points) {
    out += std::to_string(fp);
    out += '\t';
    out += std::to_string(tp);
    out += '\n';
  }
  return out;
}

std::string ma_pa_to_tsv(const std::vector<MaPaRow>& rows) {
  std::string out =
      "gene_id\tm_log2\ta_log2\tse\tp_value\tdetect_p\tcrit_lo\tcrit_hi\tstatus\n";
  for (const auto& r : rows) {
    out += r.gene_id;
    out += '\t';
    out += format_double(r.m_log2);
    out += '\t';
    out += format_double(r.a_log2);
    out += '\t';
    out += format_double(r.se);
    out += '\t';
    out += format_double(r.p_value);
    out += '\t';
    out += r.detect_p < 0.0 ? std::string("NA") : format_double(r.detect_p);
    out += '\t';
    out += format_double(r.crit_lo);
    out += '\t';
    out += format_double(r.crit_hi);
    out += '\t';
    out += r.status;
    out += '\n';
  }
  return out;
}

std::vector<ScoreRow> scores_from_tsv(const std::string& text, const std::string& filename) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(filename, 1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id\tscore\ttruth")
    parse_fail(filename, 1, 1, "bad header, expected 'id\tscore\ttruth'");
  std::vector<ScoreRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 3)
      parse_fail(filename, lineno, 1,
                 "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    ScoreRow r;
    r.id = f[0];
    r.score = parse_number(f[1], filename, lineno, 2);
    long t = parse_int(f[2], filename, lineno, 3);
    if (t != 0 && t != 1) parse_fail(filename, lineno, 3, "truth must be 0 or 1");
    r.truth = static_cast<int>(t);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace probekit
