#pragma once

#include <Eigen/Dense>
#include <vector>

#include "recurmix/types.hpp"

namespace recurmix {

// Event intensity lambda(t) = gamma1 * gamma2 * t^(gamma2-1) * exp(x.beta).
// t must be strictly positive (t = 0 is a singularity when gamma2 < 1).
double intensity(double t, const Eigen::VectorXd& x, const ClassParams& params);

// Closed-form integral of the intensity over [0, tau]:
// Lambda(tau) = gamma1 * tau^gamma2 * exp(x.beta). Equals the expected
// event count of the process on the window.
double cumulative_intensity(double tau, const Eigen::VectorXd& x, const ClassParams& params);

// Censored log density of one subject under a single class:
// sum_j log lambda(t_j) - Lambda(tau).
double class_log_density(const Subject& s, const ClassParams& params);

// Value, gradient and Hessian of the class log density in the
// unconstrained coordinates phi = (log gamma1, log gamma2, beta). Closed
// forms; checked against finite differences in the test suite.
struct LogDensityDerivs {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

LogDensityDerivs class_log_density_derivs(const Subject& s, const Eigen::VectorXd& phi);

// Same as class_log_density but evaluated directly in unconstrained
// coordinates; tolerates phi values whose Lambda over- or underflows by
// returning -inf (used by the line search).
double class_log_density_unconstrained(const Subject& s, const Eigen::VectorXd& phi);

// log sum_k pi_k exp(class_log_density(s, theta_k)), computed with a
// max shift so that no term is exponentiated raw.
double mixture_log_density(const Subject& s, const MixtureModel& model);

// Sum of mixture_log_density over the dataset. Deterministic for any
// worker count (fixed-order block reduction).
double total_log_likelihood(const std::vector<Subject>& data, const MixtureModel& model);

}  // namespace recurmix
