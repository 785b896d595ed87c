#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace recurmix {

// One individual's observation window [0, tau], ordered event times and
// covariate vector. Immutable once constructed; the constructor enforces
// 0 < t_1 < ... < t_n <= tau (an event exactly at tau counts, censoring
// is administrative).
class Subject {
public:
    Subject(std::string id, double tau, std::vector<double> event_times,
            Eigen::VectorXd covariates);

    const std::string& id() const { return id_; }
    double tau() const { return tau_; }
    const std::vector<double>& event_times() const { return event_times_; }
    const Eigen::VectorXd& covariates() const { return covariates_; }

    std::size_t n_events() const { return event_times_.size(); }
    // Sum of log event times, cached; the Weibull log likelihood only needs
    // (n, sum log t, tau, x).
    double sum_log_times() const { return sum_log_times_; }

private:
    std::string id_;
    double tau_;
    std::vector<double> event_times_;
    Eigen::VectorXd covariates_;
    double sum_log_times_;
};

// Per-class Weibull scale/shape and covariate coefficients.
class ClassParams {
public:
    ClassParams(double gamma1, double gamma2, Eigen::VectorXd beta);

    double gamma1() const { return gamma1_; }
    double gamma2() const { return gamma2_; }
    const Eigen::VectorXd& beta() const { return beta_; }
    Eigen::Index dim() const { return beta_.size(); }

    // Unconstrained coordinates (log gamma1, log gamma2, beta), the space
    // the M-step Newton solver works in.
    Eigen::VectorXd to_unconstrained() const;
    static ClassParams from_unconstrained(const Eigen::VectorXd& phi);

private:
    double gamma1_;
    double gamma2_;
    Eigen::VectorXd beta_;
};

class MixtureModel {
public:
    MixtureModel(std::vector<double> weights, std::vector<ClassParams> classes);

    int K() const { return static_cast<int>(classes_.size()); }
    Eigen::Index dim() const { return classes_.front().dim(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<ClassParams>& classes() const { return classes_; }
    const ClassParams& class_params(int k) const { return classes_.at(k); }
    double weight(int k) const { return weights_.at(k); }

    // Classes and weights reordered so that new class k is old class perm[k].
    MixtureModel permuted(const std::vector<int>& perm) const;

private:
    std::vector<double> weights_;
    std::vector<ClassParams> classes_;
};

// n x K responsibilities; every row sums to 1 (tolerance 1e-10 checked at
// construction).
class PosteriorMatrix {
public:
    explicit PosteriorMatrix(Eigen::MatrixXd values);

    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index cols() const { return values_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index k) const { return values_(i, k); }
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::VectorXd column(Eigen::Index k) const { return values_.col(k); }

private:
    Eigen::MatrixXd values_;
};

}  // namespace recurmix
