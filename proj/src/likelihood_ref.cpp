#include <cmath>
#include <stdexcept>

#include "icjm/likelihood.hpp"
#include "icjm/numerics.hpp"
#include "icjm/sobol.hpp"

namespace icjm {

void QmcConfig::validate() const {
  if (draws < 1) throw std::invalid_argument("QmcConfig: draws < 1");
  if (dimension < 3 || dimension > SobolSequence::max_dimension)
    throw std::invalid_argument("QmcConfig: dimension out of range");
  if (skip < 0) throw std::invalid_argument("QmcConfig: negative skip");
}

CaseTag classify_case(const EventRecord& event, double time_eps) {
  if (event.dem) {
    return (*event.diagnosis - event.last_healthy) > time_eps
               ? CaseTag::IntervalIllness
               : CaseTag::ExactIllness;
  }
  return (event.terminal - event.last_healthy) > time_eps
             ? CaseTag::HealthyBeforeTerminal
             : CaseTag::HealthyAtTerminal;
}

double visit_block_logdensity(const VisitBlock& block, double mean,
                              double sigma, double kappa) {
  if (!(sigma > 0.0) || !(kappa > 0.0))
    throw std::domain_error("visit_block_logdensity: scales must be positive");
  const int n = int(block.measurements.size());
  if (n < 1) throw std::invalid_argument("visit_block_logdensity: empty block");
  double rbar = 0.0;
  for (double y : block.measurements) rbar += y - mean;
  rbar /= n;
  double ss = 0.0;
  for (double y : block.measurements) {
    const double d = (y - mean) - rbar;
    ss += d * d;
  }
  const double k2 = kappa * kappa;
  const double det_last = k2 + n * sigma * sigma;
  constexpr double kLog2Pi = 1.8378770664093454836;
  return -0.5 * (n * kLog2Pi + (n - 1) * std::log(k2) + std::log(det_last) +
                 ss / k2 + n * rbar * rbar / det_last);
}

Eigen::MatrixXd sobol_standard_normals(const QmcConfig& cfg) {
  cfg.validate();
  const auto pts = sobol_points(cfg.dimension, cfg.draws, cfg.skip, cfg.scramble);
  Eigen::MatrixXd z(cfg.dimension, cfg.draws);
  for (int s = 0; s < cfg.draws; ++s)
    for (int d = 0; d < cfg.dimension; ++d)
      z(d, s) = inv_normal_cdf(pts[std::size_t(s) * cfg.dimension + d]);
  return z;
}

std::vector<RandomEffects> sobol_normal_draws(
    const QmcConfig& cfg, const RandomEffectsDistribution& dist) {
  if (dist.chol.rows() != cfg.dimension)
    throw std::invalid_argument("sobol_normal_draws: dimension mismatch");
  const Eigen::MatrixXd z = sobol_standard_normals(cfg);
  const int q = cfg.dimension - 2;
  std::vector<RandomEffects> draws(cfg.draws);
  for (int s = 0; s < cfg.draws; ++s) {
    const Eigen::VectorXd x = dist.chol * z.col(s);
    draws[s].b = x.head(q);
    draws[s].tau_sigma = x[q];
    draws[s].tau_kappa = x[q + 1];
  }
  return draws;
}

namespace ref {

double longitudinal_loglik(const ModelSpec& spec, const SubjectData& subject,
                           const ParameterSet& params, const RandomEffects& re) {
  const auto scales = residual_scales(params.mu_sigma, params.mu_kappa,
                                      re.tau_sigma, re.tau_kappa);
  double ll = 0.0;
  for (const auto& block : subject.visits) {
    const auto y = trajectory(spec, block.time, subject.marker_covariates,
                              params.beta, re.b);
    ll += visit_block_logdensity(block, y.value, scales.sigma, scales.kappa);
  }
  return ll;
}

namespace {

double hazard_at(const ModelSpec& spec, const SubjectData& subject,
                 const ParameterSet& params, const RandomEffects& re,
                 Transition kl, double sigma, double kappa, double t) {
  const auto y =
      trajectory(spec, t, subject.marker_covariates, params.beta, re.b);
  const int ix = static_cast<int>(kl);
  return transition_hazard(spec.transitions[ix], params.trans[ix], t,
                           subject.event.covariates[ix], y, sigma, kappa);
}

}  // namespace

double cumulative_hazard(const ModelSpec& spec, const SubjectData& subject,
                         const ParameterSet& params, const RandomEffects& re,
                         Transition kl, double a, double b) {
  if (a < 0.0 || a > b)
    throw std::invalid_argument("cumulative_hazard: need 0 <= a <= b");
  if (a == b) return 0.0;
  const auto scales = residual_scales(params.mu_sigma, params.mu_kappa,
                                      re.tau_sigma, re.tau_kappa);
  return GaussKronrod15::integrate(
      [&](double t) {
        return hazard_at(spec, subject, params, re, kl, scales.sigma,
                         scales.kappa, t);
      },
      a, b);
}

double log_event_contribution(const ModelSpec& spec, const SubjectData& subject,
                              const ParameterSet& params,
                              const RandomEffects& re) {
  const EventRecord& ev = subject.event;
  const CaseTag tag = classify_case(ev);
  const auto scales = residual_scales(params.mu_sigma, params.mu_kappa,
                                      re.tau_sigma, re.tau_kappa);
  const auto lam = [&](Transition kl, double t) {
    return hazard_at(spec, subject, params, re, kl, scales.sigma, scales.kappa,
                     t);
  };
  const auto cum = [&](Transition kl, double a, double b) {
    return cumulative_hazard(spec, subject, params, re, kl, a, b);
  };
  const double T = ev.terminal;

  // log of the bracketing integral over [lo, hi]:
  //   int exp(-L01(u) - L02(u) - (L12(T) - L12(u))) lam01(u) du
  const auto log_bracket = [&](double lo, double hi) {
    const double value = GaussKronrod15::integrate(
        [&](double u) {
          const double expo = cum(Transition::IllnessOnset, 0.0, u) +
                              cum(Transition::DirectDeath, 0.0, u) +
                              cum(Transition::DeathAfterIllness, u, T);
          return lam(Transition::IllnessOnset, u) * std::exp(-expo);
        },
        lo, hi);
    return value > 0.0 ? std::log(value) : kNegInf;
  };

  switch (tag) {
    case CaseTag::HealthyAtTerminal: {
      double out = -cum(Transition::IllnessOnset, 0.0, T) -
                   cum(Transition::DirectDeath, 0.0, T);
      if (ev.death) out += std::log(lam(Transition::DirectDeath, T));
      return out;
    }
    case CaseTag::HealthyBeforeTerminal: {
      double healthy = -cum(Transition::IllnessOnset, 0.0, T) -
                       cum(Transition::DirectDeath, 0.0, T);
      double bracket = log_bracket(ev.last_healthy, T);
      if (ev.death) {
        healthy += std::log(lam(Transition::DirectDeath, T));
        bracket += std::log(lam(Transition::DeathAfterIllness, T));
      }
      return log_add_exp(healthy, bracket);
    }
    case CaseTag::IntervalIllness: {
      double out = log_bracket(ev.last_healthy, *ev.diagnosis);
      if (ev.death) out += std::log(lam(Transition::DeathAfterIllness, T));
      return out;
    }
    case CaseTag::ExactIllness:
    default: {
      const double L = ev.last_healthy;
      double out = -cum(Transition::IllnessOnset, 0.0, L) -
                   cum(Transition::DirectDeath, 0.0, L) +
                   std::log(lam(Transition::IllnessOnset, L)) -
                   cum(Transition::DeathAfterIllness, L, T);
      if (ev.death) out += std::log(lam(Transition::DeathAfterIllness, T));
      return out;
    }
  }
}

double event_contribution(const ModelSpec& spec, const SubjectData& subject,
                          const ParameterSet& params, const RandomEffects& re) {
  return std::exp(log_event_contribution(spec, subject, params, re));
}

double subject_marginal_given_draws(const ModelSpec& spec,
                                    const SubjectData& subject,
                                    const ParameterSet& params,
                                    const std::vector<RandomEffects>& draws,
                                    bool longitudinal_only) {
  const double entry = subject.event.entry;
  double num_max = kNegInf, den_max = kNegInf;
  std::vector<double> num(draws.size()), den(draws.size());
  for (std::size_t s = 0; s < draws.size(); ++s) {
    double v = longitudinal_loglik(spec, subject, params, draws[s]);
    if (!longitudinal_only)
      v += log_event_contribution(spec, subject, params, draws[s]);
    num[s] = v;
    num_max = std::max(num_max, v);
    double d = 0.0;
    if (!longitudinal_only && entry > 0.0) {
      d = -cumulative_hazard(spec, subject, params, draws[s],
                             Transition::IllnessOnset, 0.0, entry) -
          cumulative_hazard(spec, subject, params, draws[s],
                            Transition::DirectDeath, 0.0, entry);
    }
    den[s] = d;
    den_max = std::max(den_max, d);
  }
  if (num_max == kNegInf) return kNegInf;  // every draw underflowed
  double num_sum = 0.0, den_sum = 0.0;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    num_sum += std::exp(num[s] - num_max);
    den_sum += std::exp(den[s] - den_max);
  }
  return (num_max + std::log(num_sum)) - (den_max + std::log(den_sum));
}

double subject_marginal_loglik(const ModelSpec& spec, const SubjectData& subject,
                               const ParameterSet& params, const QmcConfig& cfg,
                               bool longitudinal_only) {
  const auto draws = sobol_normal_draws(
      cfg, RandomEffectsDistribution::from_parameters(spec, params));
  return subject_marginal_given_draws(spec, subject, params, draws,
                                      longitudinal_only);
}

double total_loglik(const ModelSpec& spec, const Dataset& dataset,
                    const ParameterSet& params, const QmcConfig& cfg,
                    bool longitudinal_only) {
  if (dataset.empty()) throw std::invalid_argument("total_loglik: empty dataset");
  const auto draws = sobol_normal_draws(
      cfg, RandomEffectsDistribution::from_parameters(spec, params));
  std::vector<double> contrib(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    contrib[i] = subject_marginal_given_draws(spec, dataset[i], params, draws,
                                              longitudinal_only);
  return pairwise_sum(contrib);
}

}  // namespace ref
}  // namespace icjm
