#pragma once

#include <Eigen/Core>

#include "icjm/parameters.hpp"
#include "icjm/types.hpp"

namespace icjm {

// Polynomial design rows (1, t, t^2, ...) and their time derivatives.
Eigen::RowVectorXd poly_row(int n, double t);
Eigen::RowVectorXd poly_row_deriv(int n, double t);

struct TrajectoryPoint {
  double value = 0.0;
  double slope = 0.0;  // per internal time unit
};

// Current value and slope of the subject trajectory at time t:
// y(t) = X(t)'beta + Z(t)'b with X(t) = poly basis (+ constant covariates).
TrajectoryPoint trajectory(const ModelSpec& spec, double t,
                           const Eigen::VectorXd& marker_covariates,
                           const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& b);

struct ResidualScales {
  double sigma = 1.0;  // between-visit
  double kappa = 1.0;  // within-visit
};

inline ResidualScales residual_scales(double mu_sigma, double mu_kappa,
                                      double tau_sigma, double tau_kappa) {
  return {std::exp(mu_sigma + tau_sigma), std::exp(mu_kappa + tau_kappa)};
}

// Weibull: eta t^(eta-1) e^zeta with eta = sqrt_eta^2; Exponential: e^zeta.
double baseline_hazard(const TransitionSpec& spec, const TransitionParams& p,
                       double t);

// baseline x exp(W'gamma + a1 y(t) + a2 y'(t) + a_sigma sigma + a_kappa kappa)
double transition_hazard(const TransitionSpec& spec, const TransitionParams& p,
                         double t, const Eigen::VectorXd& covariates,
                         const TrajectoryPoint& y, double sigma, double kappa);

}  // namespace icjm
