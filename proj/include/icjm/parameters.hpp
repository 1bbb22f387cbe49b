#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace icjm {

enum class BaselineFamily { Weibull, Exponential };

// Transitions of the illness-death model, in fixed order.
enum class Transition { IllnessOnset = 0, DirectDeath = 1, DeathAfterIllness = 2 };
constexpr const char* transition_label(Transition kl) {
  switch (kl) {
    case Transition::IllnessOnset: return "01";
    case Transition::DirectDeath: return "02";
    default: return "12";
  }
}

// Which association coefficients a transition carries.
struct AssociationSet {
  bool value = true;
  bool slope = true;
  bool sigma = true;
  bool kappa = true;
};

struct TransitionSpec {
  BaselineFamily family = BaselineFamily::Weibull;
  int n_covariates = 0;
  AssociationSet assoc;
};

// Fixed and random trajectory designs are polynomial in time: column m of
// Z is t^m, and X is the same basis optionally extended by constant
// subject covariates.
struct ModelSpec {
  int n_fixed = 2;   // polynomial columns of X
  int n_random = 2;  // q, polynomial columns of Z
  int n_marker_covariates = 0;  // constant columns appended to X
  std::array<TransitionSpec, 3> transitions;
  bool independent_effects = true;  // structural zeros between b and tau

  int re_dim() const { return n_random + 2; }
  int beta_dim() const { return n_fixed + n_marker_covariates; }
  const TransitionSpec& trans(Transition kl) const {
    return transitions[static_cast<int>(kl)];
  }
  void validate() const;
};

struct TransitionParams {
  Eigen::VectorXd gamma;  // length n_covariates
  double a_value = 0.0;
  double a_slope = 0.0;
  double a_sigma = 0.0;
  double a_kappa = 0.0;
  double sqrt_eta = 1.0;  // Weibull only; eta = sqrt_eta^2
  double zeta = 0.0;      // log-scale constant of the baseline
};

// Full parameter vector theta in structured form. The flat packed order is
//   beta, mu_sigma, mu_kappa, free Cholesky entries (row-major lower
//   triangle, skipping masked ones), then per transition: gamma, the
//   present association coefficients, sqrt_eta (Weibull), zeta.
struct ParameterSet {
  Eigen::VectorXd beta;
  double mu_sigma = 0.0;
  double mu_kappa = 0.0;
  Eigen::MatrixXd chol;  // (q+2)x(q+2) lower triangular
  std::array<TransitionParams, 3> trans;

  const TransitionParams& operator[](Transition kl) const {
    return trans[static_cast<int>(kl)];
  }
  TransitionParams& operator[](Transition kl) {
    return trans[static_cast<int>(kl)];
  }

  Eigen::VectorXd pack(const ModelSpec& spec) const;
  static ParameterSet unpack(const ModelSpec& spec, const Eigen::VectorXd& flat);
  static int packed_size(const ModelSpec& spec);
};

// Names of the packed coordinates, aligned with ParameterSet::pack.
std::vector<std::string> parameter_names(const ModelSpec& spec);

// Free (unmasked) lower-triangle positions of the Cholesky factor.
std::vector<std::pair<int, int>> free_chol_entries(const ModelSpec& spec);

struct RandomEffects {
  Eigen::VectorXd b;
  double tau_sigma = 0.0;
  double tau_kappa = 0.0;
};

// Covariance of (b, tau_sigma, tau_kappa) assembled from the Cholesky
// factor, with the independence mask expressed as structural zeros in the
// factor itself.
struct RandomEffectsDistribution {
  Eigen::MatrixXd chol;
  bool independent = true;

  static RandomEffectsDistribution from_parameters(const ModelSpec& spec,
                                                   const ParameterSet& params);
  Eigen::MatrixXd covariance() const;
  Eigen::MatrixXd sigma_b(int q) const { return covariance().topLeftCorner(q, q); }
  Eigen::MatrixXd sigma_tau() const { return covariance().bottomRightCorner(2, 2); }
  Eigen::MatrixXd sigma_tau_b(int q) const {
    return covariance().bottomLeftCorner(2, q);
  }
};

Eigen::MatrixXd assemble_covariance(const Eigen::MatrixXd& chol);

}  // namespace icjm
