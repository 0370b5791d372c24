#include "probekit/gee.hpp"

#include <cmath>

#include "probekit/detect.hpp"
#include "probekit/errors.hpp"
#include "probekit/stats.hpp"

namespace probekit {

const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::absent_fallback: return "absent_fallback";
    default: return "failed";
  }
}

namespace {

struct Workspace {
  const GeneData& gene;
  const GenePlugins& plugins;
  const GeeOptions& options;
  Eigen::MatrixXd yadj;    // J x I, optical-adjusted
  Eigen::MatrixXd gamma1;  // J x I (zero in no-background mode)
  Eigen::MatrixXd gamma2;  // J x I, refreshed per iterate
  Eigen::MatrixXd v0;      // J x I diagonal working variances
  double ev_n, ev_s;       // e^{sigma^2} - 1 factors
  double ref_scale;        // N-term scale for the absent test

  Workspace(const GeneData& g, const GenePlugins& p, const GeeOptions& o)
      : gene(g), plugins(p), options(o) {
    const Eigen::Index J = g.pm.rows(), I = g.pm.cols();
    yadj.resize(J, I);
    gamma1.resize(J, I);
    const double sn2 = p.sigma_n * p.sigma_n;
    for (Eigen::Index j = 0; j < J; ++j)
      for (Eigen::Index i = 0; i < I; ++i) {
        yadj(j, i) = g.pm(j, i) - p.optical[static_cast<std::size_t>(i)];
        gamma1(j, i) = o.no_background ? 0.0 : std::exp(p.mu(j, i) + 0.5 * sn2);
      }
    ev_n = std::exp(sn2) - 1.0;
    ev_s = std::exp(p.sigma_s * p.sigma_s) - 1.0;
    ref_scale = o.no_background ? yadj.array().abs().mean() : gamma1.mean();
    gamma2.resize(J, I);
    v0.resize(J, I);
  }

  void refresh(double beta0, double beta1) {
    const double ss2 = plugins.sigma_s * plugins.sigma_s;
    for (Eigen::Index j = 0; j < gamma2.rows(); ++j)
      for (Eigen::Index i = 0; i < gamma2.cols(); ++i) {
        double x = static_cast<double>(gene.condition[static_cast<std::size_t>(i)]);
        gamma2(j, i) = std::exp(plugins.nu(i) + plugins.phi(j) + beta0 + beta1 * x +
                                0.5 * ss2);
        double e = gamma1(j, i) + gamma2(j, i);
        double v = gamma1(j, i) * gamma1(j, i) * ev_n +
                   gamma2(j, i) * gamma2(j, i) * ev_s;
        v0(j, i) = std::max(v, 1e-10 * (1.0 + e * e));
      }
  }

  // estimating function G and its linearization M at the current gammas
  void score(Eigen::Vector2d& g_out, Eigen::Matrix2d& m_out) const {
    g_out.setZero();
    m_out.setZero();
    const Eigen::Index J = gamma2.rows(), I = gamma2.cols();
    for (Eigen::Index j = 0; j < J; ++j)
      for (Eigen::Index i = 0; i < I; ++i) {
        double x = static_cast<double>(gene.condition[static_cast<std::size_t>(i)]);
        double d0 = gamma2(j, i);  // dE/dbeta0; dE/dbeta1 = d0 * x
        double r = yadj(j, i) - gamma1(j, i) - gamma2(j, i);
        double wi = 1.0 / v0(j, i);
        g_out(0) += d0 * wi * r;
        g_out(1) += d0 * x * wi * r;
        double q = d0 * d0 * wi;
        m_out(0, 0) += q;
        m_out(0, 1) += q * x;
        m_out(1, 1) += q * x * x;
      }
    m_out(1, 0) = m_out(0, 1);
    double inv_j = 1.0 / static_cast<double>(J);
    g_out *= inv_j;
    m_out *= inv_j;
  }

  GeeInternals internals() const {
    GeeInternals out;
    const Eigen::Index J = gamma2.rows(), I = gamma2.cols();
    out.n_probes = static_cast<int>(J);
    const double wn = std::exp(plugins.rho_n * plugins.sigma_n * plugins.sigma_n) - 1.0;
    const double ws = std::exp(plugins.rho_s * plugins.sigma_s * plugins.sigma_s) - 1.0;
    for (Eigen::Index j = 0; j < J; ++j) {
      Eigen::MatrixXd a(2, I);  // A_j = Dm' V0^-1
      Eigen::MatrixXd dm(I, 2);
      for (Eigen::Index i = 0; i < I; ++i) {
        double x = static_cast<double>(gene.condition[static_cast<std::size_t>(i)]);
        dm(i, 0) = gamma2(j, i);
        dm(i, 1) = gamma2(j, i) * x;
        a(0, i) = dm(i, 0) / v0(j, i);
        a(1, i) = dm(i, 1) / v0(j, i);
      }
      Eigen::MatrixXd cov(I, I);  // full model covariance: V diag, W off-diag
      for (Eigen::Index ia = 0; ia < I; ++ia)
        for (Eigen::Index ib = 0; ib < I; ++ib) {
          if (ia == ib) {
            cov(ia, ib) = gamma1(j, ia) * gamma1(j, ia) * ev_n +
                          gamma2(j, ia) * gamma2(j, ia) * ev_s;
          } else {
            cov(ia, ib) = gamma1(j, ia) * gamma1(j, ib) * wn +
                          gamma2(j, ia) * gamma2(j, ib) * ws;
          }
        }
      out.bread += a * dm;
      out.meat += a * cov * a.transpose();
    }
    double inv_j = 1.0 / static_cast<double>(J);
    out.bread *= inv_j;
    out.meat *= inv_j;
    return out;
  }
};

double fallback_detection_p(const GeneData& gene, const GenePlugins& plugins,
                            const GeeOptions& options) {
  try {
    DetectionResult det =
        model_detect(gene.pm, plugins.mu, plugins.sigma_n, plugins.rho_n,
                     plugins.optical, DetectVariant::model_pm_mm,
                     options.intensity_floor);
    return det.p_value;
  } catch (const std::exception&) {
    return 1.0;
  }
}

}  // namespace

GeneFitResult solve_gee(const GeneData& gene, const GenePlugins& plugins,
                        const GeeOptions& options) {
  const Eigen::Index J = gene.pm.rows(), I = gene.pm.cols();
  GeneFitResult out;
  out.gene_id = gene.gene_id;
  if (J < 3) throw DataError("solve_gee: need >= 3 probes");
  if (I < 2) throw DataError("solve_gee: need >= 2 arrays");
  {
    bool has0 = false, has1 = false;
    for (int c : gene.condition) (c == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw DataError("solve_gee: both conditions required");
  }

  Workspace ws(gene, plugins, options);

  // start: 75th percentile of the background-subtracted intensity
  std::vector<double> resid;
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index i = 0; i < I; ++i)
      resid.push_back(ws.yadj(j, i) - ws.gamma1(j, i));
  double q75 = std::max(quantile(resid, 0.75), options.intensity_floor);
  double beta0 = std::log(q75) - plugins.phi.mean() -
                 0.5 * plugins.sigma_s * plugins.sigma_s;
  double beta1 = 0.0;

  Eigen::Vector2d g;
  Eigen::Matrix2d m;
  ws.refresh(beta0, beta1);
  ws.score(g, m);
  double gnorm = g.norm();
  int absent_streak = 0;

  for (int it = 1; it <= options.max_iter; ++it) {
    out.iterations = it;
    Eigen::Vector2d step = m.ldlt().solve(g);
    if (!step.allFinite()) {
      out.status = FitStatus::failed;
      return out;
    }
    // halve until the estimating-equation norm decreases
    double t = 1.0;
    double nb0 = beta0, nb1 = beta1, ngnorm = gnorm;
    for (int half = 0; half <= 20; ++half) {
      double cb0 = beta0 + t * step(0), cb1 = beta1 + t * step(1);
      ws.refresh(cb0, cb1);
      Eigen::Vector2d gc;
      Eigen::Matrix2d mc;
      ws.score(gc, mc);
      if (std::isfinite(gc.norm()) && (gc.norm() < gnorm || half == 20)) {
        nb0 = cb0;
        nb1 = cb1;
        ngnorm = gc.norm();
        g = gc;
        m = mc;
        break;
      }
      t *= 0.5;
    }
    double step_norm = std::hypot(nb0 - beta0, nb1 - beta1);
    beta0 = nb0;
    beta1 = nb1;
    gnorm = ngnorm;

    if (ws.gamma2.mean() < 1e-6 * ws.ref_scale) {
      if (++absent_streak >= 5) {
        out.beta0 = beta0;
        out.beta1 = beta1;
        out.status = FitStatus::absent_fallback;
        out.p_value = fallback_detection_p(gene, plugins, options);
        return out;
      }
    } else {
      absent_streak = 0;
    }

    if (step_norm < options.step_tol) {
      out.beta0 = beta0;
      out.beta1 = beta1;
      ws.refresh(beta0, beta1);
      if (ws.gamma2.mean() < 1e-6 * ws.ref_scale) {
        // converged onto the boundary: the signal term vanished
        out.status = FitStatus::absent_fallback;
        out.p_value = fallback_detection_p(gene, plugins, options);
        return out;
      }
      out.status = FitStatus::converged;
      out.internals = ws.internals();
      try {
        out.covariance = sandwich_covariance(out.internals);
      } catch (const NumericalError&) {
        out.status = FitStatus::failed;
        return out;
      }
      double se = std::sqrt(std::max(out.covariance(1, 1), 0.0));
      if (se > 0.0)
        out.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(beta1) / se));
      else
        out.p_value = beta1 != 0.0 ? 0.0 : 1.0;
      return out;
    }
  }
  out.beta0 = beta0;
  out.beta1 = beta1;
  out.status = FitStatus::failed;
  return out;
}

Eigen::Matrix2d sandwich_covariance(const GeeInternals& internals) {
  Eigen::Matrix2d bread_inv;
  bool invertible = false;
  double det = 0.0;
  internals.bread.computeInverseAndDetWithCheck(bread_inv, det, invertible);
  if (!invertible) throw NumericalError("singular bread matrix");
  return bread_inv * internals.meat * bread_inv.transpose() /
         static_cast<double>(internals.n_probes);
}

DeTestResult de_test(const GeneFitResult& fit, double level) {
  if (fit.status != FitStatus::converged)
    throw DataError("de_test: fit not converged");
  DeTestResult out;
  double se = std::sqrt(std::max(fit.covariance(1, 1), 0.0));
  if (se <= 0.0) {
    out.p_value = fit.beta1 != 0.0 ? 0.0 : 1.0;
    out.lower = out.upper = 0.0;
    out.reject = fit.beta1 != 0.0;
    return out;
  }
  double z = fit.beta1 / se;
  out.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(z)));
  double q = normal_quantile(1.0 - level / 2.0);
  out.lower = -q * se;
  out.upper = q * se;
  out.reject = out.p_value < level;
  return out;
}

GeneFitResult no_background_baseline(const GeneData& gene, const GenePlugins& plugins,
                                     GeeOptions options) {
  options.no_background = true;
  return solve_gee(gene, plugins, options);
}

}  // namespace probekit
