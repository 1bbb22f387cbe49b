#include "icjm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace icjm {

void TimeScale::validate() const {
  if (!(divisor > 0.0)) throw std::invalid_argument("TimeScale: divisor <= 0");
}

void EventRecord::validate(const std::string& id) const {
  const auto fail = [&](const char* what) {
    throw std::invalid_argument("EventRecord[" + id + "]: " + what);
  };
  if (!(entry <= last_healthy)) fail("entry > last_healthy");
  if (!(last_healthy <= terminal)) fail("last_healthy > terminal");
  if (dem) {
    if (!diagnosis) fail("dem set but diagnosis missing");
    if (!(last_healthy <= *diagnosis && *diagnosis <= terminal))
      fail("diagnosis outside [last_healthy, terminal]");
  } else if (diagnosis) {
    fail("diagnosis present without dem flag");
  }
}

void SubjectData::validate() const {
  event.validate(id);
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& v : visits) {
    if (!(v.time > prev))
      throw std::invalid_argument("SubjectData[" + id +
                                  "]: visit times not strictly increasing");
    if (v.measurements.empty())
      throw std::invalid_argument("SubjectData[" + id + "]: empty visit block");
    if (!(v.time <= event.terminal + 1e-12))
      throw std::invalid_argument("SubjectData[" + id +
                                  "]: visit after terminal time");
    prev = v.time;
  }
}

void ModelSpec::validate() const {
  if (n_fixed < 1 || n_random < 1)
    throw std::invalid_argument("ModelSpec: designs need at least an intercept");
  if (n_marker_covariates < 0) throw std::invalid_argument("ModelSpec: bad covariate count");
  for (const auto& tr : transitions)
    if (tr.n_covariates < 0)
      throw std::invalid_argument("ModelSpec: bad transition covariate count");
}

Eigen::RowVectorXd poly_row(int n, double t) {
  Eigen::RowVectorXd row(n);
  double p = 1.0;
  for (int m = 0; m < n; ++m, p *= t) row[m] = p;
  return row;
}

Eigen::RowVectorXd poly_row_deriv(int n, double t) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  double p = 1.0;
  for (int m = 1; m < n; ++m, p *= t) row[m] = m * p;
  return row;
}

TrajectoryPoint trajectory(const ModelSpec& spec, double t,
                           const Eigen::VectorXd& marker_covariates,
                           const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& b) {
  if (beta.size() != spec.beta_dim())
    throw std::invalid_argument("trajectory: beta dimension mismatch");
  if (b.size() != spec.n_random)
    throw std::invalid_argument("trajectory: random-effect dimension mismatch");
  if (marker_covariates.size() != spec.n_marker_covariates)
    throw std::invalid_argument("trajectory: covariate dimension mismatch");
  TrajectoryPoint out;
  out.value = poly_row(spec.n_fixed, t).dot(beta.head(spec.n_fixed)) +
              poly_row(spec.n_random, t).dot(b);
  if (spec.n_marker_covariates > 0)
    out.value += marker_covariates.dot(beta.tail(spec.n_marker_covariates));
  out.slope = poly_row_deriv(spec.n_fixed, t).dot(beta.head(spec.n_fixed)) +
              poly_row_deriv(spec.n_random, t).dot(b);
  return out;
}

double baseline_hazard(const TransitionSpec& spec, const TransitionParams& p,
                       double t) {
  if (spec.family == BaselineFamily::Exponential) return std::exp(p.zeta);
  const double eta = p.sqrt_eta * p.sqrt_eta;
  if (t < 0.0 || (t == 0.0 && eta < 1.0))
    throw std::domain_error("baseline_hazard: Weibull singular at t <= 0");
  if (t == 0.0) return eta == 1.0 ? std::exp(p.zeta) : 0.0;
  return eta * std::pow(t, eta - 1.0) * std::exp(p.zeta);
}

double transition_hazard(const TransitionSpec& spec, const TransitionParams& p,
                         double t, const Eigen::VectorXd& covariates,
                         const TrajectoryPoint& y, double sigma, double kappa) {
  if (covariates.size() != spec.n_covariates)
    throw std::invalid_argument("transition_hazard: covariate dimension mismatch");
  double lin = 0.0;
  if (spec.n_covariates > 0) lin += covariates.dot(p.gamma);
  if (spec.assoc.value) lin += p.a_value * y.value;
  if (spec.assoc.slope) lin += p.a_slope * y.slope;
  if (spec.assoc.sigma) lin += p.a_sigma * sigma;
  if (spec.assoc.kappa) lin += p.a_kappa * kappa;
  return baseline_hazard(spec, p, t) * std::exp(lin);
}

namespace {

int chol_dim(const ModelSpec& spec) { return spec.re_dim(); }

}  // namespace

std::vector<std::pair<int, int>> free_chol_entries(const ModelSpec& spec) {
  const int d = chol_dim(spec);
  const int q = spec.n_random;
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      if (spec.independent_effects && i >= q && j < q) continue;  // masked
      out.emplace_back(i, j);
    }
  return out;
}

int ParameterSet::packed_size(const ModelSpec& spec) {
  int n = spec.beta_dim() + 2 + int(free_chol_entries(spec).size());
  for (const auto& tr : spec.transitions) {
    n += tr.n_covariates;
    n += tr.assoc.value + tr.assoc.slope + tr.assoc.sigma + tr.assoc.kappa;
    n += tr.family == BaselineFamily::Weibull ? 2 : 1;
  }
  return n;
}

Eigen::VectorXd ParameterSet::pack(const ModelSpec& spec) const {
  Eigen::VectorXd flat(packed_size(spec));
  int k = 0;
  flat.head(beta.size()) = beta;
  k += int(beta.size());
  flat[k++] = mu_sigma;
  flat[k++] = mu_kappa;
  for (auto [i, j] : free_chol_entries(spec)) flat[k++] = chol(i, j);
  for (int tix = 0; tix < 3; ++tix) {
    const auto& ts = spec.transitions[tix];
    const auto& tp = trans[tix];
    for (int c = 0; c < ts.n_covariates; ++c) flat[k++] = tp.gamma[c];
    if (ts.assoc.value) flat[k++] = tp.a_value;
    if (ts.assoc.slope) flat[k++] = tp.a_slope;
    if (ts.assoc.sigma) flat[k++] = tp.a_sigma;
    if (ts.assoc.kappa) flat[k++] = tp.a_kappa;
    if (ts.family == BaselineFamily::Weibull) flat[k++] = tp.sqrt_eta;
    flat[k++] = tp.zeta;
  }
  return flat;
}

ParameterSet ParameterSet::unpack(const ModelSpec& spec,
                                  const Eigen::VectorXd& flat) {
  if (flat.size() != packed_size(spec))
    throw std::invalid_argument("ParameterSet::unpack: size mismatch");
  ParameterSet p;
  int k = 0;
  p.beta = flat.head(spec.beta_dim());
  k += spec.beta_dim();
  p.mu_sigma = flat[k++];
  p.mu_kappa = flat[k++];
  p.chol = Eigen::MatrixXd::Zero(chol_dim(spec), chol_dim(spec));
  for (auto [i, j] : free_chol_entries(spec)) p.chol(i, j) = flat[k++];
  for (int tix = 0; tix < 3; ++tix) {
    const auto& ts = spec.transitions[tix];
    auto& tp = p.trans[tix];
    tp.gamma.resize(ts.n_covariates);
    for (int c = 0; c < ts.n_covariates; ++c) tp.gamma[c] = flat[k++];
    tp.a_value = ts.assoc.value ? flat[k++] : 0.0;
    tp.a_slope = ts.assoc.slope ? flat[k++] : 0.0;
    tp.a_sigma = ts.assoc.sigma ? flat[k++] : 0.0;
    tp.a_kappa = ts.assoc.kappa ? flat[k++] : 0.0;
    tp.sqrt_eta = ts.family == BaselineFamily::Weibull ? flat[k++] : 0.0;
    tp.zeta = flat[k++];
  }
  return p;
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
  std::vector<std::string> names;
  for (int m = 0; m < spec.n_fixed; ++m) names.push_back("beta" + std::to_string(m));
  for (int c = 0; c < spec.n_marker_covariates; ++c)
    names.push_back("beta_x" + std::to_string(c + 1));
  names.push_back("mu_sigma");
  names.push_back("mu_kappa");
  for (auto [i, j] : free_chol_entries(spec))
    names.push_back("chol_" + std::to_string(i + 1) + std::to_string(j + 1));
  const char* labels[3] = {"01", "02", "12"};
  for (int tix = 0; tix < 3; ++tix) {
    const auto& ts = spec.transitions[tix];
    const std::string suf = std::string("_") + labels[tix];
    for (int c = 0; c < ts.n_covariates; ++c)
      names.push_back("gamma" + std::to_string(c + 1) + suf);
    if (ts.assoc.value) names.push_back("a_value" + suf);
    if (ts.assoc.slope) names.push_back("a_slope" + suf);
    if (ts.assoc.sigma) names.push_back("a_sigma" + suf);
    if (ts.assoc.kappa) names.push_back("a_kappa" + suf);
    if (ts.family == BaselineFamily::Weibull) names.push_back("sqrt_eta" + suf);
    names.push_back("zeta" + suf);
  }
  return names;
}

Eigen::MatrixXd assemble_covariance(const Eigen::MatrixXd& chol) {
  return chol * chol.transpose();
}

RandomEffectsDistribution RandomEffectsDistribution::from_parameters(
    const ModelSpec& spec, const ParameterSet& params) {
  return {params.chol, spec.independent_effects};
}

Eigen::MatrixXd RandomEffectsDistribution::covariance() const {
  return assemble_covariance(chol);
}

}  // namespace icjm
