#include "recurmix/types.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "recurmix/errors.hpp"

namespace recurmix {

Subject::Subject(std::string id, double tau, std::vector<double> event_times,
                 Eigen::VectorXd covariates)
    : id_(std::move(id)),
      tau_(tau),
      event_times_(std::move(event_times)),
      covariates_(std::move(covariates)),
      sum_log_times_(0.0) {
    if (!(tau_ > 0.0) || !std::isfinite(tau_))
        throw input_error("subject '" + id_ + "': tau must be positive and finite");
    double prev = 0.0;
    for (double t : event_times_) {
        if (!std::isfinite(t) || !(t > prev))
            throw input_error("subject '" + id_ +
                              "': event times must be finite, strictly increasing and > 0");
        if (t > tau_)
            throw input_error("subject '" + id_ + "': event time exceeds tau");
        sum_log_times_ += std::log(t);
        prev = t;
    }
    for (Eigen::Index j = 0; j < covariates_.size(); ++j)
        if (!std::isfinite(covariates_[j]))
            throw input_error("subject '" + id_ + "': covariates must be finite");
}

ClassParams::ClassParams(double gamma1, double gamma2, Eigen::VectorXd beta)
    : gamma1_(gamma1), gamma2_(gamma2), beta_(std::move(beta)) {
    if (!(gamma1_ > 0.0) || !std::isfinite(gamma1_))
        throw input_error("gamma1 must be positive and finite");
    if (!(gamma2_ > 0.0) || !std::isfinite(gamma2_))
        throw input_error("gamma2 must be positive and finite");
    for (Eigen::Index j = 0; j < beta_.size(); ++j)
        if (!std::isfinite(beta_[j])) throw input_error("beta must be finite");
}

Eigen::VectorXd ClassParams::to_unconstrained() const {
    Eigen::VectorXd phi(2 + beta_.size());
    phi[0] = std::log(gamma1_);
    phi[1] = std::log(gamma2_);
    phi.tail(beta_.size()) = beta_;
    return phi;
}

ClassParams ClassParams::from_unconstrained(const Eigen::VectorXd& phi) {
    if (phi.size() < 2) throw input_error("parameter vector needs at least 2 entries");
    return ClassParams(std::exp(phi[0]), std::exp(phi[1]), phi.tail(phi.size() - 2));
}

MixtureModel::MixtureModel(std::vector<double> weights, std::vector<ClassParams> classes)
    : weights_(std::move(weights)), classes_(std::move(classes)) {
    if (classes_.empty()) throw input_error("mixture needs at least one class");
    if (weights_.size() != classes_.size())
        throw input_error("weights and classes must have the same length");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0) || w > 1.0 || !std::isfinite(w))
            throw input_error("mixing weights must lie in (0, 1]");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw input_error("mixing weights must sum to 1");
    const Eigen::Index d = classes_.front().dim();
    for (const auto& c : classes_)
        if (c.dim() != d) throw input_error("all classes must share the covariate dimension");
}

MixtureModel MixtureModel::permuted(const std::vector<int>& perm) const {
    if (perm.size() != classes_.size()) throw input_error("permutation length mismatch");
    std::vector<double> w;
    std::vector<ClassParams> c;
    w.reserve(perm.size());
    c.reserve(perm.size());
    for (int p : perm) {
        w.push_back(weights_.at(p));
        c.push_back(classes_.at(p));
    }
    return MixtureModel(std::move(w), std::move(c));
}

PosteriorMatrix::PosteriorMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0)
        throw input_error("posterior matrix must be non-empty");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index k = 0; k < values_.cols(); ++k) {
            const double v = values_(i, k);
            if (!(v >= 0.0) || v > 1.0 + 1e-12)
                throw input_error("responsibilities must lie in [0, 1]");
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-10)
            throw input_error("posterior row " + std::to_string(i) + " does not sum to 1");
    }
}

}  // namespace recurmix
