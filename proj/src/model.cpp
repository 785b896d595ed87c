#include "recurmix/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "recurmix/errors.hpp"
#include "recurmix/parallel.hpp"

namespace recurmix {

namespace {

void check_dims(const Eigen::VectorXd& x, const ClassParams& params) {
    if (x.size() != params.beta().size())
        throw input_error("covariate vector length does not match beta");
}

}  // namespace

double intensity(double t, const Eigen::VectorXd& x, const ClassParams& params) {
    if (!(t > 0.0)) throw std::domain_error("intensity requires t > 0");
    check_dims(x, params);
    const double eta = x.dot(params.beta());
    return params.gamma1() * params.gamma2() * std::pow(t, params.gamma2() - 1.0) *
           std::exp(eta);
}

double cumulative_intensity(double tau, const Eigen::VectorXd& x, const ClassParams& params) {
    if (!(tau > 0.0)) throw std::domain_error("cumulative_intensity requires tau > 0");
    check_dims(x, params);
    const double eta = x.dot(params.beta());
    return params.gamma1() * std::pow(tau, params.gamma2()) * std::exp(eta);
}

double class_log_density(const Subject& s, const ClassParams& params) {
    check_dims(s.covariates(), params);
    const double n = static_cast<double>(s.n_events());
    const double eta = s.covariates().dot(params.beta());
    const double log_term = n * (std::log(params.gamma1()) + std::log(params.gamma2())) +
                            (params.gamma2() - 1.0) * s.sum_log_times() + n * eta;
    const double cum = params.gamma1() * std::pow(s.tau(), params.gamma2()) * std::exp(eta);
    const double value = log_term - cum;
    if (std::isnan(value))
        throw std::domain_error("class_log_density: non-finite value for subject '" + s.id() +
                                "'");
    return value;
}

double class_log_density_unconstrained(const Subject& s, const Eigen::VectorXd& phi) {
    const Eigen::Index d = phi.size() - 2;
    if (s.covariates().size() != d)
        throw input_error("covariate vector length does not match parameter vector");
    const double a = phi[0];       // log gamma1
    const double b = phi[1];       // log gamma2
    const double g2 = std::exp(b);
    const double eta = s.covariates().dot(phi.tail(d));
    const double n = static_cast<double>(s.n_events());
    // Lambda = exp(a + g2 * log tau + eta); may overflow to inf, in which
    // case the log density is -inf and the caller backs off.
    const double cum = std::exp(a + g2 * std::log(s.tau()) + eta);
    return n * (a + b) + (g2 - 1.0) * s.sum_log_times() + n * eta - cum;
}

LogDensityDerivs class_log_density_derivs(const Subject& s, const Eigen::VectorXd& phi) {
    const Eigen::Index d = phi.size() - 2;
    if (s.covariates().size() != d)
        throw input_error("covariate vector length does not match parameter vector");
    const Eigen::Index p = phi.size();
    const double a = phi[0];
    const double b = phi[1];
    const double g2 = std::exp(b);
    const double log_tau = std::log(s.tau());
    const Eigen::VectorXd& x = s.covariates();
    const double eta = x.dot(phi.tail(d));
    const double n = static_cast<double>(s.n_events());
    const double S = s.sum_log_times();

    const double cum = std::exp(a + g2 * log_tau + eta);  // Lambda(tau)
    const double c = g2 * log_tau;                        // d(exponent)/db

    LogDensityDerivs out;
    out.value = n * (a + b) + (g2 - 1.0) * S + n * eta - cum;

    out.grad.resize(p);
    out.grad[0] = n - cum;
    out.grad[1] = n + g2 * S - cum * c;
    out.grad.tail(d) = (n - cum) * x;

    out.hess.resize(p, p);
    out.hess(0, 0) = -cum;
    out.hess(0, 1) = out.hess(1, 0) = -cum * c;
    out.hess(1, 1) = g2 * S - cum * c * (1.0 + c);
    for (Eigen::Index j = 0; j < d; ++j) {
        out.hess(0, 2 + j) = out.hess(2 + j, 0) = -cum * x[j];
        out.hess(1, 2 + j) = out.hess(2 + j, 1) = -cum * c * x[j];
    }
    // evaluate the outer product before scaling so (i,j) and (j,i) round identically
    const Eigen::MatrixXd outer = x * x.transpose();
    out.hess.bottomRightCorner(d, d) = -cum * outer;
    return out;
}

double mixture_log_density(const Subject& s, const MixtureModel& model) {
    const int K = model.K();
    double max_term = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd terms(K);
    for (int k = 0; k < K; ++k) {
        terms[k] = std::log(model.weight(k)) + class_log_density(s, model.class_params(k));
        if (terms[k] > max_term) max_term = terms[k];
    }
    if (!std::isfinite(max_term)) return max_term;  // all components vanish
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(terms[k] - max_term);
    return max_term + std::log(sum);
}

double total_log_likelihood(const std::vector<Subject>& data, const MixtureModel& model) {
    if (data.empty()) throw input_error("total_log_likelihood: empty dataset");
    for (const auto& s : data)
        if (s.covariates().size() != model.dim())
            throw input_error("subject '" + s.id() + "': covariate dimension mismatch");
    return block_sum(data.size(), [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += mixture_log_density(data[i], model);
        return acc;
    });
}

}  // namespace recurmix
