#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "icjm/model.hpp"
#include "icjm/parameters.hpp"
#include "icjm/types.hpp"

namespace icjm {

// Quasi-Monte Carlo settings for the random-effects integral.
struct QmcConfig {
  int draws = 1000;
  int dimension = 4;  // q + 2
  int skip = 1;       // drop the origin of the raw sequence
  std::uint64_t scramble = 0;

  void validate() const;
};

// Event-history patterns. Equalities are tested with tolerance time_eps.
enum class CaseTag {
  IntervalIllness,          // dem, L < R
  HealthyAtTerminal,        // no dem, T = L
  HealthyBeforeTerminal,    // no dem, L < T
  ExactIllness,             // dem, L = R
};

constexpr double kTimeEps = 1e-8;

CaseTag classify_case(const EventRecord& event, double time_eps = kTimeEps);

// Closed-form log-density of one visit block under the compound-symmetric
// covariance sigma^2 11' + kappa^2 I. With residuals r_l = Y_l - mean,
// their mean rbar and SS = sum (r_l - rbar)^2:
//   -1/2 [ n log 2pi + (n-1) log kappa^2 + log(kappa^2 + n sigma^2)
//          + SS / kappa^2 + n rbar^2 / (kappa^2 + n sigma^2) ]
double visit_block_logdensity(const VisitBlock& block, double mean,
                              double sigma, double kappa);

// Standard-normal matrix (dimension x draws) obtained by pushing the Sobol
// points through the inverse normal CDF. Deterministic in cfg.
Eigen::MatrixXd sobol_standard_normals(const QmcConfig& cfg);

// The S transformed draws (b, tau) for a given random-effects distribution.
std::vector<RandomEffects> sobol_normal_draws(
    const QmcConfig& cfg, const RandomEffectsDistribution& dist);

// ---------------------------------------------------------------------------
// Reference implementations: direct, scalar, single-threaded compositions of
// the model formulas. They stay as the comparison target for the optimized
// evaluator and for the unit-test oracles.
// ---------------------------------------------------------------------------
namespace ref {

double longitudinal_loglik(const ModelSpec& spec, const SubjectData& subject,
                           const ParameterSet& params, const RandomEffects& re);

// Integrated intensity of transition kl over [a, b] given the draw, by one
// 15-point Gauss-Kronrod application.
double cumulative_hazard(const ModelSpec& spec, const SubjectData& subject,
                         const ParameterSet& params, const RandomEffects& re,
                         Transition kl, double a, double b);

// f(D | b, tau): the case-specific survival factor.
double event_contribution(const ModelSpec& spec, const SubjectData& subject,
                          const ParameterSet& params, const RandomEffects& re);
double log_event_contribution(const ModelSpec& spec, const SubjectData& subject,
                              const ParameterSet& params,
                              const RandomEffects& re);

double subject_marginal_loglik(const ModelSpec& spec, const SubjectData& subject,
                               const ParameterSet& params, const QmcConfig& cfg,
                               bool longitudinal_only = false);

double subject_marginal_given_draws(const ModelSpec& spec,
                                    const SubjectData& subject,
                                    const ParameterSet& params,
                                    const std::vector<RandomEffects>& draws,
                                    bool longitudinal_only = false);

double total_loglik(const ModelSpec& spec, const Dataset& dataset,
                    const ParameterSet& params, const QmcConfig& cfg,
                    bool longitudinal_only = false);

}  // namespace ref

// ---------------------------------------------------------------------------
// Production evaluator. Precomputes per-subject quadrature grids once, then
// evaluates the total log-likelihood for any parameter vector with
// OpenMP-parallel per-subject kernels and a fixed-order pairwise reduction,
// so results are identical for every worker count.
// ---------------------------------------------------------------------------
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(ModelSpec spec, Dataset dataset, QmcConfig cfg,
                      bool longitudinal_only = false);
  ~LikelihoodEvaluator();
  LikelihoodEvaluator(LikelihoodEvaluator&&) noexcept;

  // NaN signals a flagged evaluation failure (a rejected optimizer step).
  double total_loglik(const ParameterSet& params) const;
  double total_loglik_flat(const Eigen::VectorXd& flat) const;
  double subject_loglik(int index, const ParameterSet& params) const;

  // id of the subject that caused the last failure, empty otherwise
  const std::string& last_failure() const;

  const Dataset& dataset() const;
  const ModelSpec& spec() const;
  const QmcConfig& qmc() const;
  int draw_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace icjm
