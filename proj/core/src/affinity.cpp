#include "probekit/affinity.hpp"

#include <cmath>

#include "json.hpp"
#include "probekit/errors.hpp"
#include "probekit/spline.hpp"
#include "probekit/stats.hpp"

namespace probekit {

namespace {

int base_index(char c) {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return -1;  // reference base
    default: return -2;
  }
}

void check_sequence(const std::string& seq, int probe_length) {
  if (static_cast<int>(seq.size()) != probe_length)
    throw DataError("malformed sequence: length " + std::to_string(seq.size()) +
                    ", expected " + std::to_string(probe_length));
  for (std::size_t p = 0; p < seq.size(); ++p)
    if (base_index(seq[p]) == -2)
      throw DataError("malformed sequence: bad base '" + std::string(1, seq[p]) +
                      "' at position " + std::to_string(p + 1));
}

}  // namespace

Eigen::RowVectorXd affinity_design_row(const std::string& sequence, int df,
                                       int probe_length) {
  check_sequence(sequence, probe_length);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(1 + 3 * df);
  row(0) = 1.0;
  for (int p = 1; p <= probe_length; ++p) {
    int b = base_index(sequence[static_cast<std::size_t>(p - 1)]);
    if (b < 0) continue;
    std::vector<double> basis = spline_basis(p, df, probe_length);
    for (int k = 0; k < df; ++k) row(1 + b * df + k) += basis[static_cast<std::size_t>(k)];
  }
  return row;
}

AffinityModel fit_affinity(std::span<const std::string> sequences,
                           std::span<const double> responses, int df) {
  if (sequences.size() < 100)
    throw DataError("fit_affinity: need >= 100 probes, got " +
                    std::to_string(sequences.size()));
  if (sequences.size() != responses.size())
    throw DataError("fit_affinity: sequence/response length mismatch");

  AffinityModel model;
  model.df = df;
  model.probe_length = static_cast<int>(sequences[0].size());

  const Eigen::Index n = static_cast<Eigen::Index>(sequences.size());
  const Eigen::Index p = 1 + 3 * df;
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design.row(i) = affinity_design_row(sequences[static_cast<std::size_t>(i)], df,
                                        model.probe_length);
    y(i) = responses[static_cast<std::size_t>(i)];
  }

  Eigen::VectorXd coef;
  try {
    coef = weighted_least_squares(design, y, Eigen::VectorXd::Ones(n));
  } catch (const NumericalError&) {
    model.intercept_only = true;
    model.intercept = y.mean();
    model.coefficients.assign(3, std::vector<double>(static_cast<std::size_t>(df), 0.0));
    double ss = (y.array() - model.intercept).square().sum();
    model.residual_sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return model;
  }

  model.intercept = coef(0);
  model.coefficients.assign(3, std::vector<double>(static_cast<std::size_t>(df), 0.0));
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < df; ++k)
      model.coefficients[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] =
          coef(1 + b * df + k);
  Eigen::VectorXd resid = y - design * coef;
  model.residual_sd =
      n > p ? std::sqrt(resid.squaredNorm() / static_cast<double>(n - p)) : 0.0;
  return model;
}

double predict_affinity(const AffinityModel& model, const std::string& sequence) {
  check_sequence(sequence, model.probe_length);
  double a = model.intercept;
  if (model.intercept_only) return a;
  for (int p = 1; p <= model.probe_length; ++p) {
    int b = base_index(sequence[static_cast<std::size_t>(p - 1)]);
    if (b < 0) continue;
    std::vector<double> basis = spline_basis(p, model.df, model.probe_length);
    for (int k = 0; k < model.df; ++k)
      a += model.coefficients[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] *
           basis[static_cast<std::size_t>(k)];
  }
  return a;
}

std::string AffinityModel::to_json() const {
  nlohmann::json j;
  j["df"] = df;
  j["probe_length"] = probe_length;
  j["intercept"] = intercept;
  j["residual_sd"] = residual_sd;
  j["intercept_only"] = intercept_only;
  const char* bases[3] = {"A", "C", "G"};
  for (int b = 0; b < 3; ++b)
    j["coefficients"][bases[b]] = coefficients[static_cast<std::size_t>(b)];
  return j.dump(2);
}

AffinityModel AffinityModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("affinity model JSON: ") + e.what());
  }
  AffinityModel m;
  m.df = j.at("df").get<int>();
  m.probe_length = j.at("probe_length").get<int>();
  m.intercept = j.at("intercept").get<double>();
  m.residual_sd = j.value("residual_sd", 0.0);
  m.intercept_only = j.value("intercept_only", false);
  const char* bases[3] = {"A", "C", "G"};
  m.coefficients.resize(3);
  for (int b = 0; b < 3; ++b) {
    m.coefficients[static_cast<std::size_t>(b)] =
        j.at("coefficients").at(bases[b]).get<std::vector<double>>();
    if (m.coefficients[static_cast<std::size_t>(b)].size() !=
        static_cast<std::size_t>(m.df))
      throw DataError("affinity model JSON: coefficient block length != df");
  }
  return m;
}

}  // namespace probekit
