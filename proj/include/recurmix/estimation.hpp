#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "recurmix/types.hpp"

namespace recurmix {

struct EMConfig {
    int max_iterations = 500;    // EM cycles per restart
    double tol = 1e-6;           // absolute log-likelihood increase threshold
    int n_restarts = 10;         // independent random-partition starts
    int newton_max_steps = 50;   // per M-step
    double newton_tol = 1e-8;    // gradient norm threshold
    std::uint64_t seed = 1;

    void validate() const;
};

struct FitReport {
    MixtureModel model;
    PosteriorMatrix posteriors;
    std::vector<double> loglik_trace;  // trace of the winning restart
    bool converged = false;
    int n_iterations = 0;
    int best_restart = 0;
    int failed_restarts = 0;
    std::vector<std::string> warnings;

    double final_loglik() const { return loglik_trace.back(); }
};

// Responsibilities rho_ik = pi_k p_k(i) / sum_l pi_l p_l(i), in log space.
PosteriorMatrix e_step(const std::vector<Subject>& data, const MixtureModel& model);

// Closed-form weight update pi_k = mean_i rho_ik.
std::vector<double> update_weights(const PosteriorMatrix& posteriors);

// Components whose updated weight fell below 1/(10n).
std::vector<int> degenerate_components(const std::vector<double>& weights, std::size_t n);

// Newton maximization of the responsibility-weighted class log likelihood
// sum_i w_i * log p(t_i | x_i; theta) in (log gamma1, log gamma2, beta).
// Safeguards: ridge-modified Hessian when not negative definite, gradient
// ascent fallback, step halving so the objective never decreases.
struct MStepResult {
    ClassParams params;
    bool converged = false;   // gradient norm <= newton_tol
    bool boundary = false;    // zero weighted events: gamma1 driven to the boundary
    double grad_norm = 0.0;
    double objective = 0.0;
    int steps = 0;
};

MStepResult m_step_class(const std::vector<Subject>& data, const Eigen::VectorXd& weights_col,
                         const ClassParams& start, const EMConfig& cfg);

// One full EM run from an explicit initial model. Exposed so that
// equivariance and fixed-point properties can be exercised directly;
// fit() drives it from random partitions.
struct EMRun {
    MixtureModel model;
    std::vector<double> loglik_trace;
    bool converged = false;
    bool degenerate = false;  // aborted: a component collapsed
    std::string abort_reason;
    std::vector<std::string> warnings;
};

EMRun em_run(const std::vector<Subject>& data, const MixtureModel& initial, const EMConfig& cfg);

// Builds the random-partition initial model for one restart; throws
// fit_error if a class ends up empty or unestimable.
MixtureModel random_partition_init(const std::vector<Subject>& data, int K, std::uint64_t seed,
                                   const EMConfig& cfg);

// n_restarts independent EM runs, best final log likelihood wins.
FitReport fit(const std::vector<Subject>& data, int K, const EMConfig& cfg);

// argmax_k rho_ik; ties broken by the lowest class index. Labels are
// 0-based.
std::vector<int> classify(const PosteriorMatrix& posteriors);

}  // namespace recurmix
