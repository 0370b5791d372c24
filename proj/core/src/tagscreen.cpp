#include "probekit/tagscreen.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "probekit/errors.hpp"
#include "probekit/stats.hpp"

namespace probekit {

const char* to_string(TagClass c) {
  switch (c) {
    case TagClass::dead_alive: return "dead_alive";
    case TagClass::alive_dead: return "alive_dead";
    default: return "same";
  }
}

namespace {

double log_normal_pdf(double x, const MixtureComponent& c) {
  double d = x - c.mean;
  return -0.5 * d * d / c.var - 0.5 * std::log(6.283185307179586 * c.var);
}

ChannelMixture em_run(std::span<const double> x, double m1, double m2, double v0) {
  const std::size_t n = x.size();
  ChannelMixture mix;
  mix.dead = {m1, v0};
  mix.alive = {m2, v0};
  mix.weight_alive = 0.5;
  double prev_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> resp(n);
  for (int it = 1; it <= 500; ++it) {
    mix.iterations = it;
    double ll = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double la = std::log(mix.weight_alive) + log_normal_pdf(x[k], mix.alive);
      double ld = std::log(1.0 - mix.weight_alive) + log_normal_pdf(x[k], mix.dead);
      double mx = std::max(la, ld);
      double denom = std::exp(la - mx) + std::exp(ld - mx);
      resp[k] = std::exp(la - mx) / denom;
      ll += mx + std::log(denom);
    }
    mix.log_likelihood = ll;
    double na = 0.0, sa = 0.0, nd = 0.0, sd = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      na += resp[k];
      sa += resp[k] * x[k];
      nd += 1.0 - resp[k];
      sd += (1.0 - resp[k]) * x[k];
    }
    if (na < 1e-10 || nd < 1e-10) {
      mix.alive.var = 0.0;  // flag collapse through the variance check below
      return mix;
    }
    double ma = sa / na, md = sd / nd;
    double va = 0.0, vd = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      va += resp[k] * (x[k] - ma) * (x[k] - ma);
      vd += (1.0 - resp[k]) * (x[k] - md) * (x[k] - md);
    }
    mix.alive = {ma, va / na};
    mix.dead = {md, vd / nd};
    mix.weight_alive = na / static_cast<double>(n);
    if (ll - prev_ll < 1e-8 && it > 1) break;
    prev_ll = ll;
  }
  if (mix.alive.mean < mix.dead.mean) {
    std::swap(mix.alive, mix.dead);
    mix.weight_alive = 1.0 - mix.weight_alive;
  }
  return mix;
}

bool collapsed(const ChannelMixture& m) {
  return !(m.alive.var > 1e-6) || !(m.dead.var > 1e-6) ||
         !(m.weight_alive > 0.0 && m.weight_alive < 1.0);
}

}  // namespace

ChannelMixture fit_channel_mixture(std::span<const double> x) {
  if (x.size() < 200) throw DataError("fit_mixture: need >= 200 tags per channel");
  std::vector<double> sorted(x.begin(), x.end());
  double q25 = quantile(sorted, 0.25), q75 = quantile(sorted, 0.75);
  double v0 = std::max(sample_variance(sorted) / 4.0, 1e-4);
  ChannelMixture mix = em_run(x, q25, q75, v0);
  if (collapsed(mix)) {
    // one restart from a perturbed init
    double q10 = quantile(sorted, 0.10), q90 = quantile(sorted, 0.90);
    mix = em_run(x, q10, q90, 2.0 * v0);
    if (collapsed(mix)) throw NumericalError("degenerate mixture");
  }
  return mix;
}

MixtureFit fit_mixture(std::span<const double> log_r, std::span<const double> log_g) {
  return {fit_channel_mixture(log_r), fit_channel_mixture(log_g)};
}

TagResult dead_alive_llr(std::span<const double> xr, std::span<const double> xg,
                         const MixtureFit& fit, double threshold) {
  if (xr.empty() || xg.empty()) throw DataError("no data for tag");
  auto loglik = [](std::span<const double> x, const MixtureComponent& c) {
    double s = 0.0;
    for (double v : x) s += log_normal_pdf(v, c);
    return s;
  };
  double l_da = loglik(xr, fit.r.dead) + loglik(xg, fit.g.alive);
  double l_ad = loglik(xr, fit.r.alive) + loglik(xg, fit.g.dead);
  double l_dd = loglik(xr, fit.r.dead) + loglik(xg, fit.g.dead);
  double l_aa = loglik(xr, fit.r.alive) + loglik(xg, fit.g.alive);
  double l_diff = std::max(l_da, l_ad);
  double l_same = std::max(l_dd, l_aa);

  TagResult out;
  out.llr = l_diff - l_same;
  if (out.llr > threshold)
    out.classification = l_da >= l_ad ? TagClass::dead_alive : TagClass::alive_dead;
  else
    out.classification = TagClass::same;
  if (out.classification == TagClass::same && l_aa >= l_dd) {
    out.log_ratio = log_ratio_mle(xr, xg, fit);
    out.log_ratio_valid = true;
  }
  return out;
}

double log_ratio_mle(std::span<const double> xr, std::span<const double> xg,
                     const MixtureFit& fit) {
  if (xr.empty() || xg.empty()) throw DataError("no data for tag");
  // channel variances are common across a tag's probes, so precision weights
  // reduce to plain means
  double mr = 0.0, mg = 0.0;
  for (double v : xr) mr += v;
  for (double v : xg) mg += v;
  mr = mr / static_cast<double>(xr.size()) - fit.r.alive.mean;
  mg = mg / static_cast<double>(xg.size()) - fit.g.alive.mean;
  return mg - mr;
}

}  // namespace probekit
