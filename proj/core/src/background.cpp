#include "probekit/background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "probekit/errors.hpp"
#include "probekit/stats.hpp"

namespace probekit {

namespace {

std::string mm_sequence(const std::string& pm) {
  std::string mm = pm;
  std::size_t mid = pm.size() / 2;
  switch (mm[mid]) {
    case 'A': mm[mid] = 'T'; break;
    case 'T': mm[mid] = 'A'; break;
    case 'C': mm[mid] = 'G'; break;
    default: mm[mid] = 'C'; break;
  }
  return mm;
}

double clamp_rho(double r) { return std::clamp(r, 0.0, 0.999); }

}  // namespace

double estimate_optical(const ProbeLevelDataset& data, std::size_t array) {
  const std::size_t H = data.n_channels();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < data.n_genes(); ++g)
    for (std::size_t j = 0; j < data.genes[g].probes.size(); ++j)
      for (std::size_t h = 0; h < H; ++h)
        m = std::min(m, data.at(g, array, j, h));
  if (!std::isfinite(m)) throw DataError("empty array");
  return m;
}

BackgroundFit fit_background(const ProbeLevelDataset& data,
                             const BackgroundOptions& options,
                             const AffinityModel* pretrained) {
  data.validate();
  const std::size_t I = data.n_arrays();
  const double floor_v = options.intensity_floor;
  BackgroundFit fit;
  fit.optical.resize(I);
  for (std::size_t i = 0; i < I; ++i) fit.optical[i] = estimate_optical(data, i);
  fit.nu.assign(I, 0.0);

  auto flog = [&](double y, std::size_t i) {
    return std::log(std::max(y - fit.optical[i], floor_v));
  };

  // training set: (sequence, per-array responses) per proxy probe
  std::vector<std::string> train_seq;
  std::vector<std::pair<std::size_t, std::size_t>> train_probe;  // (g, j)
  int train_channel;
  if (options.source == BackgroundSource::mm ||
      (options.source == BackgroundSource::external && data.n_channels() > 1)) {
    train_channel = data.channel_index("MM");
    for (std::size_t g = 0; g < data.n_genes(); ++g)
      for (std::size_t j = 0; j < data.genes[g].probes.size(); ++j) {
        train_seq.push_back(mm_sequence(data.genes[g].probes[j].sequence));
        train_probe.emplace_back(g, j);
      }
  } else {
    // half-price: lowest quartile of PM probes by mean raw intensity
    train_channel = 0;
    std::vector<double> probe_mean;
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t g = 0; g < data.n_genes(); ++g)
      for (std::size_t j = 0; j < data.genes[g].probes.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < I; ++i) s += data.at(g, i, j, 0);
        probe_mean.push_back(s / static_cast<double>(I));
        all.emplace_back(g, j);
      }
    double cut = quantile(probe_mean, 0.25);
    for (std::size_t k = 0; k < all.size(); ++k)
      if (probe_mean[k] <= cut) {
        auto [g, j] = all[k];
        train_seq.push_back(data.genes[g].probes[j].sequence);
        train_probe.push_back(all[k]);
      }
  }

  // affinity model: pretrained, or fit to mean log training intensity
  if (options.source == BackgroundSource::external) {
    if (pretrained == nullptr) throw DataError("external affinity model not supplied");
    fit.affinity = *pretrained;
  } else {
    std::vector<double> response(train_seq.size());
    for (std::size_t k = 0; k < train_probe.size(); ++k) {
      auto [g, j] = train_probe[k];
      double s = 0.0;
      for (std::size_t i = 0; i < I; ++i)
        s += flog(data.at(g, i, j, static_cast<std::size_t>(train_channel)), i);
      response[k] = s / static_cast<double>(I);
    }
    fit.affinity = fit_affinity(train_seq, response, options.affinity_df);
  }

  // per-array loess of log training intensity on affinity
  std::vector<double> alpha(train_seq.size());
  for (std::size_t k = 0; k < train_seq.size(); ++k)
    alpha[k] = predict_affinity(fit.affinity, train_seq[k]);
  fit.h.resize(I);
  std::vector<double> residuals;
  for (std::size_t i = 0; i < I; ++i) {
    std::vector<double> y(train_seq.size());
    for (std::size_t k = 0; k < train_probe.size(); ++k) {
      auto [g, j] = train_probe[k];
      y[k] = flog(data.at(g, i, j, static_cast<std::size_t>(train_channel)), i);
    }
    fit.h[i] = loess_fit(alpha, y, options.loess_span);
    for (std::size_t k = 0; k < y.size(); ++k)
      residuals.push_back(y[k] - fit.h[i].evaluate(alpha[k]));
  }
  double sn2 = sample_variance(residuals);
  fit.sigma_n = std::sqrt(std::max(sn2, 1e-12));

  // mu_hat for every PM probe through the per-array curves
  fit.mu_hat.resize(data.n_genes());
  fit.background_probe.resize(data.n_genes());
  std::size_t n_bg = 0;
  std::vector<double> bg_var;
  for (std::size_t g = 0; g < data.n_genes(); ++g) {
    const std::size_t J = data.genes[g].probes.size();
    fit.mu_hat[g].resize(J * I);
    fit.background_probe[g].assign(J, false);
    for (std::size_t j = 0; j < J; ++j) {
      double a = predict_affinity(fit.affinity, data.genes[g].probes[j].sequence);
      double mean_logpm = 0.0, mean_mu = 0.0;
      std::vector<double> logpm(I);
      for (std::size_t i = 0; i < I; ++i) {
        double mu = fit.h[i].evaluate(a);
        fit.mu_hat[g][j * I + i] = mu;
        logpm[i] = flog(data.at(g, i, j, 0), i);
        mean_logpm += logpm[i];
        mean_mu += mu;
      }
      mean_logpm /= static_cast<double>(I);
      mean_mu /= static_cast<double>(I);
      if (mean_logpm < mean_mu) {
        fit.background_probe[g][j] = true;
        ++n_bg;
        if (I >= 2) bg_var.push_back(sample_variance(logpm));
      }
    }
  }
  if (n_bg < 50) throw DataError("insufficient background probes: " + std::to_string(n_bg));
  fit.sigma_n0_sq = mean(bg_var);
  fit.rho_n = sn2 > 1e-12 ? clamp_rho((sn2 - fit.sigma_n0_sq) / sn2) : 0.0;
  return fit;
}

void fit_signal_params(const ProbeLevelDataset& data, BackgroundFit& fit,
                       const BackgroundOptions& options) {
  const std::size_t I = data.n_arrays(), G = data.n_genes();
  const double floor_v = options.intensity_floor;
  auto flog = [&](double y, std::size_t i) {
    return std::log(std::max(y - fit.optical[i], floor_v));
  };

  // high-expression stratum: top decile of probesets by mean log PM
  std::vector<double> gene_level(G);
  for (std::size_t g = 0; g < G; ++g) {
    double s = 0.0;
    const std::size_t J = data.genes[g].probes.size();
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t i = 0; i < I; ++i) s += flog(data.at(g, i, j, 0), i);
    gene_level[g] = s / static_cast<double>(J * I);
  }
  std::size_t n_high = static_cast<std::size_t>(
      std::floor(options.high_stratum_frac * static_cast<double>(G)));
  if (n_high < 1) throw DataError("no signal stratum");
  std::vector<std::size_t> order(G);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return gene_level[a] > gene_level[b]; });
  fit.high_stratum.assign(G, false);
  for (std::size_t k = 0; k < n_high; ++k) fit.high_stratum[order[k]] = true;

  // regression of within-probeset-centered log PM on the centered affinity
  // design: residual variance estimates sigma_s^2, coefficients predict phi
  const int df = fit.affinity.df;
  const Eigen::Index p = 3 * df;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> resp;
  double mean_j = 0.0;
  std::size_t n_sets = 0;
  for (std::size_t g = 0; g < G; ++g) {
    if (!fit.high_stratum[g]) continue;
    const std::size_t J = data.genes[g].probes.size();
    // probe design rows without the intercept column
    Eigen::MatrixXd d(static_cast<Eigen::Index>(J), p);
    for (std::size_t j = 0; j < J; ++j)
      d.row(static_cast<Eigen::Index>(j)) =
          affinity_design_row(data.genes[g].probes[j].sequence, df,
                              fit.affinity.probe_length)
              .tail(p);
    Eigen::RowVectorXd dbar = d.colwise().mean();
    for (std::size_t i = 0; i < I; ++i) {
      double xbar = 0.0;
      std::vector<double> x(J);
      for (std::size_t j = 0; j < J; ++j) {
        x[j] = flog(data.at(g, i, j, 0), i);
        xbar += x[j];
      }
      xbar /= static_cast<double>(J);
      for (std::size_t j = 0; j < J; ++j) {
        rows.push_back(d.row(static_cast<Eigen::Index>(j)) - dbar);
        resp.push_back(x[j] - xbar);
      }
    }
    mean_j += static_cast<double>(J);
    ++n_sets;
  }
  if (rows.empty()) throw DataError("no signal stratum");
  mean_j /= static_cast<double>(n_sets);

  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), p);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    design.row(static_cast<Eigen::Index>(k)) = rows[k];
    y(static_cast<Eigen::Index>(k)) = resp[k];
  }
  Eigen::VectorXd coef;
  try {
    coef = weighted_least_squares(design, y,
                                  Eigen::VectorXd::Ones(design.rows()));
  } catch (const NumericalError&) {
    coef = Eigen::VectorXd::Zero(p);
  }
  Eigen::VectorXd resid = y - design * coef;
  double ss2 = resid.squaredNorm() /
               std::max<double>(1.0, static_cast<double>(design.rows() - p));
  // per-array centering removes 1/J of the noise variance
  ss2 *= mean_j / std::max(1.0, mean_j - 1.0);
  fit.sigma_s = std::sqrt(std::max(ss2, 1e-12));

  // phi for all probes, centered so phi at the mean affinity design is 0
  fit.phi_hat.resize(G);
  double phi_sum = 0.0;
  std::size_t phi_n = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t J = data.genes[g].probes.size();
    fit.phi_hat[g].resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      Eigen::RowVectorXd d = affinity_design_row(data.genes[g].probes[j].sequence, df,
                                                 fit.affinity.probe_length)
                                 .tail(p);
      fit.phi_hat[g][j] = d.dot(coef);
      phi_sum += fit.phi_hat[g][j];
      ++phi_n;
    }
  }
  double phi_mean = phi_sum / static_cast<double>(phi_n);
  for (auto& block : fit.phi_hat)
    for (auto& v : block) v -= phi_mean;

  // sigma_s0: mean per-probe cross-array variance of log PM on strong-signal
  // probes, pooled within condition so condition effects do not leak in
  std::vector<int> conds;
  for (const auto& a : data.arrays)
    if (std::find(conds.begin(), conds.end(), a.condition) == conds.end())
      conds.push_back(a.condition);
  std::vector<double> probe_var;
  for (std::size_t g = 0; g < G; ++g) {
    if (!fit.high_stratum[g]) continue;
    const std::size_t J = data.genes[g].probes.size();
    for (std::size_t j = 0; j < J; ++j) {
      double ss = 0.0, dfree = 0.0;
      for (int c : conds) {
        std::vector<double> x;
        for (std::size_t i = 0; i < I; ++i)
          if (data.arrays[i].condition == c) x.push_back(flog(data.at(g, i, j, 0), i));
        if (x.size() >= 2) {
          ss += sample_variance(x) * static_cast<double>(x.size() - 1);
          dfree += static_cast<double>(x.size() - 1);
        }
      }
      if (dfree > 0.0) probe_var.push_back(ss / dfree);
    }
    // high-expression probesets leave the background subset
    std::fill(fit.background_probe[g].begin(), fit.background_probe[g].end(), false);
  }
  fit.sigma_s0_sq = mean(probe_var);
  fit.rho_s = ss2 > 1e-12 ? clamp_rho((ss2 - fit.sigma_s0_sq) / ss2) : 0.0;
  fit.signal_fitted = true;
}

std::vector<double> estimate_nu(std::span<const double> beta1,
                                std::span<const double> se,
                                std::span<const int> condition) {
  double sw = 0.0, swb = 0.0;
  for (std::size_t k = 0; k < beta1.size(); ++k) {
    if (!std::isfinite(beta1[k]) || !std::isfinite(se[k]) || se[k] <= 0.0) continue;
    double w = 1.0 / (se[k] * se[k]);
    sw += w;
    swb += w * beta1[k];
  }
  if (sw <= 0.0) throw DataError("no usable genes");
  double c = swb / sw;
  std::size_t i1 = 0, i0 = 0;
  for (int x : condition) (x == 1 ? i1 : i0)++;
  if (i0 == 0 || i1 == 0) throw DataError("estimate_nu: both conditions required");
  const double I = static_cast<double>(i0 + i1);
  std::vector<double> nu(condition.size());
  for (std::size_t i = 0; i < condition.size(); ++i)
    nu[i] = condition[i] == 1 ? c * static_cast<double>(i0) / I
                              : -c * static_cast<double>(i1) / I;
  return nu;
}

std::string BackgroundFit::to_json() const {
  nlohmann::json j;
  j["optical"] = optical;
  j["sigma_n"] = sigma_n;
  j["rho_n"] = rho_n;
  j["sigma_n0_sq"] = sigma_n0_sq;
  j["sigma_s"] = sigma_s;
  j["rho_s"] = rho_s;
  j["sigma_s0_sq"] = sigma_s0_sq;
  j["nu"] = nu;
  j["signal_fitted"] = signal_fitted;
  j["affinity"] = nlohmann::json::parse(affinity.to_json());
  for (const auto& curve : h)
    j["h"].push_back({{"anchors", curve.anchors},
                      {"values", curve.values},
                      {"span", curve.span},
                      {"degree", curve.degree}});
  j["mu_hat"] = mu_hat;
  j["phi_hat"] = phi_hat;
  for (const auto& b : background_probe)
    j["background_probe"].push_back(std::vector<int>(b.begin(), b.end()));
  j["high_stratum"] = std::vector<int>(high_stratum.begin(), high_stratum.end());
  return j.dump();
}

BackgroundFit BackgroundFit::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("background fit JSON: ") + e.what());
  }
  BackgroundFit f;
  f.optical = j.at("optical").get<std::vector<double>>();
  f.sigma_n = j.at("sigma_n").get<double>();
  f.rho_n = j.at("rho_n").get<double>();
  f.sigma_n0_sq = j.value("sigma_n0_sq", 0.0);
  f.sigma_s = j.value("sigma_s", 0.0);
  f.rho_s = j.value("rho_s", 0.0);
  f.sigma_s0_sq = j.value("sigma_s0_sq", 0.0);
  f.nu = j.at("nu").get<std::vector<double>>();
  f.signal_fitted = j.value("signal_fitted", false);
  f.affinity = AffinityModel::from_json(j.at("affinity").dump());
  if (j.contains("h"))
    for (const auto& c : j.at("h")) {
      SmoothFit s;
      s.anchors = c.at("anchors").get<std::vector<double>>();
      s.values = c.at("values").get<std::vector<double>>();
      s.span = c.at("span").get<double>();
      s.degree = c.at("degree").get<int>();
      f.h.push_back(std::move(s));
    }
  f.mu_hat = j.value("mu_hat", std::vector<std::vector<double>>{});
  f.phi_hat = j.value("phi_hat", std::vector<std::vector<double>>{});
  if (j.contains("background_probe"))
    for (const auto& b : j.at("background_probe")) {
      auto v = b.get<std::vector<int>>();
      f.background_probe.emplace_back(v.begin(), v.end());
    }
  if (j.contains("high_stratum")) {
    auto v = j.at("high_stratum").get<std::vector<int>>();
    f.high_stratum.assign(v.begin(), v.end());
  }
  return f;
}

}  // namespace probekit
