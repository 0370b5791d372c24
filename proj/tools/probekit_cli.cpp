// probekit command-line driver: simulate, fit-background, detect, diffexp,
// tagscreen, roc, ma-pa.  Exit codes: 0 success, 2 usage error, 3 data error,
// 4 numerical failure.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "probekit/background.hpp"
#include "probekit/errors.hpp"
#include "probekit/eval.hpp"
#include "probekit/io.hpp"
#include "probekit/pipeline.hpp"
#include "probekit/sim.hpp"
#include "probekit/tagscreen.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const std::string& out_prefix, const std::string& command,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["config"] = config;
  m["config_hash"] = hex64(fnv1a(config.dump()));
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  probekit::atomic_write(out_prefix + ".manifest.json", m.dump(2) + "\n");
}

// Applies a JSON config file underneath command-line flags: every key must
// name a registered option, and flags given explicitly win.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  json cfg = json::parse(probekit::read_file(path));
  if (!cfg.is_object()) throw CLI::ValidationError("config", "config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw CLI::ValidationError("config", "unknown config key '" + key + "'");
    if (opt->count() > 0) continue;  // explicit flag wins
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(text);
    opt->run_callback();
  }
}

// Final effective values for the manifest, one entry per non-flag option.
json effective_config(const CLI::App* cmd) {
  json out = json::object();
  for (const CLI::Option* opt : cmd->get_options()) {
    std::string name = opt->get_name(false, true);
    if (name.rfind("--", 0) != 0) continue;
    std::string key = name.substr(2);
    if (key == "config" || key == "help") continue;
    if (!opt->results().empty())
      out[key] = opt->results().back();
    else
      out[key] = opt->get_default_str();
  }
  return out;
}

probekit::BackgroundOptions background_options(const std::string& source, double span,
                                               int df) {
  probekit::BackgroundOptions opt;
  if (source == "mm")
    opt.source = probekit::BackgroundSource::mm;
  else if (source == "pm-quartile")
    opt.source = probekit::BackgroundSource::pm_quartile;
  else
    throw CLI::ValidationError("source", "unknown source '" + source + "'");
  opt.loess_span = span;
  opt.affinity_df = df;
  return opt;
}

probekit::DetectVariant parse_variant(const std::string& v) {
  if (v == "mas5") return probekit::DetectVariant::mas5;
  if (v == "model-pm-mm") return probekit::DetectVariant::model_pm_mm;
  if (v == "model-half-price") return probekit::DetectVariant::model_half_price;
  throw CLI::ValidationError("variant", "unknown variant '" + v + "'");
}

struct CommonArgs {
  std::string config;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "JSON config file; flags override its keys");
  cmd->add_option("--out", a.out, "output path prefix")->required();
}

int run_simulate(CLI::App* cmd) {
  static CommonArgs common;
  static std::string mode = "two-group";
  static std::uint64_t seed = 1;
  static probekit::TwoGroupSpec tg;
  static probekit::TagScreenSpec ts;
  static probekit::SimPreset preset;
  static int replicates = 3;

  add_common(cmd, common);
  cmd->add_option("--mode", mode, "spike-in | two-group | tag-screen")
      ->check(CLI::IsMember({"spike-in", "two-group", "tag-screen"}));
  cmd->add_option("--seed", seed, "RNG seed");
  cmd->add_option("--genes", tg.n_genes, "two-group: gene count");
  cmd->add_option("--replicates", replicates, "arrays per group / per mixture");
  cmd->add_option("--log-fold-change", tg.log_fold_change, "two-group: true beta1");
  cmd->add_option("--frac-de", tg.frac_de, "two-group: fraction differentially expressed");
  cmd->add_option("--frac-absent", tg.frac_absent, "two-group: fraction absent");
  cmd->add_option("--theta-min", tg.theta_min, "two-group: min baseline theta");
  cmd->add_option("--theta-max", tg.theta_max, "two-group: max baseline theta");
  cmd->add_option("--nu-delta", tg.nu_group_delta, "two-group: array-offset half-spread");
  cmd->add_option("--sigma-n", preset.sigma_n, "background log-sd");
  cmd->add_option("--rho-n", preset.rho_n, "background cross-array correlation");
  cmd->add_option("--sigma-s", preset.sigma_s, "signal log-sd");
  cmd->add_option("--rho-s", preset.rho_s, "signal cross-array correlation");
  cmd->add_option("--probes", preset.probes_per_gene, "probes per gene");
  cmd->add_option("--tags", ts.n_tags, "tag-screen: tag count");
  cmd->add_option("--frac-dead-alive", ts.frac_dead_alive, "tag-screen: dead-in-R fraction");
  cmd->add_option("--frac-dead-both", ts.frac_dead_both, "tag-screen: dead-in-both fraction");
  cmd->add_option("--tag-log-ratio", ts.log_ratio, "tag-screen: known representation shift");
  cmd->add_option("--frac-ratio", ts.frac_ratio, "tag-screen: fraction carrying the shift");

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    std::vector<std::string> outputs;
    if (mode == "tag-screen") {
      probekit::TagSimResult sim = probekit::generate_tag_screen(ts, seed);
      probekit::atomic_write(common.out + ".tags.tsv", probekit::tag_data_to_tsv(sim));
      probekit::atomic_write(common.out + ".truth.tsv", probekit::tag_truth_to_tsv(sim));
      outputs = {common.out + ".tags.tsv", common.out + ".truth.tsv"};
    } else {
      probekit::SimResult sim;
      if (mode == "spike-in") {
        probekit::SpikeInDesign design = probekit::default_latin_square();
        design.replicates = replicates;
        sim = probekit::generate(design, preset, seed);
      } else {
        tg.replicates_per_group = replicates;
        sim = probekit::generate_two_group(tg, preset, seed);
      }
      probekit::write_dataset_tsv(common.out + ".dataset.tsv", sim.data);
      probekit::atomic_write(common.out + ".truth.tsv",
                             probekit::truth_to_tsv(sim.data, sim.truth));
      outputs = {common.out + ".dataset.tsv", common.out + ".truth.tsv"};
    }
    write_manifest(common.out, "simulate", effective_config(cmd), {}, outputs);
  });
  return 0;
}

int run_fit_background(CLI::App* cmd) {
  static CommonArgs common;
  static std::string data_path, source = "mm";
  static double span = 0.4;
  static int df = 5;
  static bool no_signal = false;

  add_common(cmd, common);
  cmd->add_option("--data", data_path, "dataset TSV")->required();
  cmd->add_option("--source", source, "mm | pm-quartile");
  cmd->add_option("--span", span, "loess span");
  cmd->add_option("--df", df, "affinity spline df");
  cmd->add_flag("--no-signal", no_signal, "skip the signal-half fit");

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    probekit::ProbeLevelDataset data = probekit::read_dataset_tsv(data_path);
    probekit::BackgroundOptions opt = background_options(source, span, df);
    probekit::BackgroundFit fit = probekit::fit_background(data, opt);
    if (!no_signal) probekit::fit_signal_params(data, fit, opt);
    probekit::atomic_write(common.out + ".background.json", fit.to_json());
    write_manifest(common.out, "fit-background", effective_config(cmd), {data_path},
                   {common.out + ".background.json"});
  });
  return 0;
}

int run_detect(CLI::App* cmd) {
  static CommonArgs common;
  static std::string data_path, bg_path, variant = "model-pm-mm";
  static double tau = 0.015, span = 0.4;
  static int df = 5, condition = -1;

  add_common(cmd, common);
  cmd->add_option("--data", data_path, "dataset TSV")->required();
  cmd->add_option("--background", bg_path, "background fit JSON (fit on the fly if absent)");
  cmd->add_option("--variant", variant, "mas5 | model-pm-mm | model-half-price");
  cmd->add_option("--tau", tau, "mas5 shift");
  cmd->add_option("--condition", condition, "pool only this condition (-1 = all arrays)");
  cmd->add_option("--span", span, "loess span for an on-the-fly fit");
  cmd->add_option("--df", df, "affinity df for an on-the-fly fit");

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    probekit::ProbeLevelDataset data = probekit::read_dataset_tsv(data_path);
    probekit::DetectVariant v = parse_variant(variant);
    probekit::BackgroundFit fit;
    std::vector<std::string> inputs = {data_path};
    if (v != probekit::DetectVariant::mas5) {
      if (!bg_path.empty()) {
        fit = probekit::BackgroundFit::from_json(probekit::read_file(bg_path));
        inputs.push_back(bg_path);
      } else {
        std::string source =
            v == probekit::DetectVariant::model_half_price ? "pm-quartile" : "mm";
        fit = probekit::fit_background(data, background_options(source, span, df));
      }
    }
    std::vector<probekit::DetectionResult> results =
        probekit::run_detection(data, fit, v, tau, condition);
    probekit::atomic_write(common.out + ".detect.tsv",
                           probekit::detections_to_tsv(results));
    write_manifest(common.out, "detect", effective_config(cmd), inputs,
                   {common.out + ".detect.tsv"});
  });
  return 0;
}

int run_diffexp(CLI::App* cmd) {
  static CommonArgs common;
  static std::string data_path, source = "mm", channel = "PM";
  static double span = 0.4, step_tol = 1e-8;
  static int df = 5, max_iter = 100;
  static bool no_background = false;

  add_common(cmd, common);
  cmd->add_option("--data", data_path, "dataset TSV")->required();
  cmd->add_option("--source", source, "mm | pm-quartile");
  cmd->add_option("--span", span, "loess span");
  cmd->add_option("--df", df, "affinity spline df");
  cmd->add_option("--channel", channel, "signal channel name");
  cmd->add_option("--step-tol", step_tol, "solver step tolerance");
  cmd->add_option("--max-iter", max_iter, "solver iteration cap");
  cmd->add_flag("--no-background", no_background, "bias-comparison baseline solve");

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    probekit::ProbeLevelDataset data = probekit::read_dataset_tsv(data_path);
    probekit::DiffExpOptions opt;
    opt.background = background_options(source, span, df);
    opt.gee.step_tol = step_tol;
    opt.gee.max_iter = max_iter;
    opt.gee.no_background = no_background;
    opt.signal_channel = channel;
    probekit::DiffExpResult result = probekit::run_diffexp(data, opt);
    probekit::atomic_write(common.out + ".diffexp.tsv",
                           probekit::diffexp_to_tsv(result.genes));
    probekit::atomic_write(common.out + ".background.json", result.fit.to_json());
    write_manifest(common.out, "diffexp", effective_config(cmd), {data_path},
                   {common.out + ".diffexp.tsv", common.out + ".background.json"});
  });
  return 0;
}

int run_tagscreen(CLI::App* cmd) {
  static CommonArgs common;
  static std::string data_path;
  static double threshold = 0.0;

  add_common(cmd, common);
  cmd->add_option("--data", data_path, "tag TSV (tag, probe_idx, log_r, log_g)")->required();
  cmd->add_option("--threshold", threshold, "llr classification threshold");

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    probekit::TagData tags =
        probekit::tag_data_from_tsv(probekit::read_file(data_path), data_path);
    std::vector<double> all_r, all_g;
    for (const auto& v : tags.log_r) all_r.insert(all_r.end(), v.begin(), v.end());
    for (const auto& v : tags.log_g) all_g.insert(all_g.end(), v.begin(), v.end());
    probekit::MixtureFit fit = probekit::fit_mixture(all_r, all_g);
    std::vector<probekit::TagResult> results;
    results.reserve(tags.ids.size());
    for (std::size_t k = 0; k < tags.ids.size(); ++k) {
      probekit::TagResult r =
          probekit::dead_alive_llr(tags.log_r[k], tags.log_g[k], fit, threshold);
      r.id = tags.ids[k];
      results.push_back(std::move(r));
    }
    probekit::atomic_write(common.out + ".tagscreen.tsv",
                           probekit::tag_results_to_tsv(results));
    write_manifest(common.out, "tagscreen", effective_config(cmd), {data_path},
                   {common.out + ".tagscreen.tsv"});
  });
  return 0;
}

int run_roc(CLI::App* cmd) {
  static CommonArgs common;
  static std::string scores_path;

  add_common(cmd, common);
  cmd->add_option("--scores", scores_path, "TSV: id, score, truth")->required();

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    std::vector<probekit::ScoreRow> rows =
        probekit::scores_from_tsv(probekit::read_file(scores_path), scores_path);
    std::vector<double> scores;
    std::vector<std::uint8_t> truth;
    for (const auto& r : rows) {
      scores.push_back(r.score);
      truth.push_back(static_cast<std::uint8_t>(r.truth));
    }
    probekit::RocTable table = probekit::roc(scores, truth);
    probekit::atomic_write(common.out + ".roc.tsv", probekit::roc_to_tsv(table));
    std::cout << "auc\t" << probekit::format_double(table.auc) << "\n";
    write_manifest(common.out, "roc", effective_config(cmd), {scores_path},
                   {common.out + ".roc.tsv"});
  });
  return 0;
}

int run_ma_pa(CLI::App* cmd) {
  static CommonArgs common;
  static std::string diffexp_path, detect_path;
  static double level = 0.01;

  add_common(cmd, common);
  cmd->add_option("--diffexp", diffexp_path, "diffexp results TSV")->required();
  cmd->add_option("--detect", detect_path, "detection results TSV");
  cmd->add_option("--level", level, "test level for the critical bounds")
      ->check(CLI::Range(1e-12, 0.5));

  cmd->callback([cmd]() {
    apply_config(cmd, common.config);
    std::vector<probekit::GeneFitResult> fits =
        probekit::diffexp_from_tsv(probekit::read_file(diffexp_path), diffexp_path);
    std::vector<probekit::DetectionResult> detections;
    std::vector<std::string> inputs = {diffexp_path};
    if (!detect_path.empty()) {
      detections =
          probekit::detections_from_tsv(probekit::read_file(detect_path), detect_path);
      inputs.push_back(detect_path);
    }
    std::vector<probekit::MaPaRow> rows = probekit::ma_pa_table(fits, detections, level);
    probekit::atomic_write(common.out + ".mapa.tsv", probekit::ma_pa_to_tsv(rows));
    write_manifest(common.out, "ma-pa", effective_config(cmd), inputs,
                   {common.out + ".mapa.tsv"});
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probekit: probe-level microarray background, detection and "
               "differential-expression toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  run_simulate(app.add_subcommand("simulate", "generate synthetic datasets"));
  run_fit_background(app.add_subcommand("fit-background", "plug-in parameter estimation"));
  run_detect(app.add_subcommand("detect", "presence/absence calls"));
  run_diffexp(app.add_subcommand("diffexp", "per-gene differential expression"));
  run_tagscreen(app.add_subcommand("tagscreen", "two-color tag mixture screen"));
  run_roc(app.add_subcommand("roc", "ROC table and AUC from a score file"));
  run_ma_pa(app.add_subcommand("ma-pa", "MA-PA table from diffexp + detection results"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const probekit::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const probekit::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
