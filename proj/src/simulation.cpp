#include "recurmix/simulation.hpp"

#include <cmath>

#include "recurmix/errors.hpp"

namespace recurmix {

namespace {
constexpr std::uint64_t kSubjectStream = 0x53554244;
constexpr std::size_t kMaxEventsPerSubject = 10'000'000;
}  // namespace

CovariateSpec CovariateSpec::make_bernoulli(double p) {
    if (!(p >= 0.0) || p > 1.0) throw input_error("Bernoulli p must lie in [0, 1]");
    return CovariateSpec{Kind::bernoulli, p, 0.0};
}

CovariateSpec CovariateSpec::make_normal(double mean, double sd) {
    if (!(sd > 0.0)) throw input_error("Normal sd must be positive");
    return CovariateSpec{Kind::normal, mean, sd};
}

double CovariateSpec::draw(Rng& rng) const {
    switch (kind) {
        case Kind::bernoulli:
            return rng.bernoulli(a) ? 1.0 : 0.0;
        case Kind::normal:
            return a + b * rng.normal();
    }
    throw input_error("unknown covariate kind");
}

void Scenario::validate() const {
    if (n_subjects < 1) throw input_error("scenario: n_subjects must be >= 1");
    if (!(tau > 0.0)) throw input_error("scenario: tau must be positive");
    if (static_cast<Eigen::Index>(covariates.size()) != model.dim())
        throw input_error("scenario: covariate spec length must equal the model dimension");
}

Scenario builtin_scenario(const std::string& name, int n, std::uint64_t seed) {
    Eigen::VectorXd b11(2), b12(2);
    double g11, g21, g12, g22;
    if (name == "well_separated") {
        g11 = 3.0;
        g21 = 2.0;
        b11 << 0.4, -0.8;
        g12 = 1.0;
        g22 = 1.0;
        b12 << 0.9, 0.3;
    } else if (name == "mixed") {
        g11 = 2.0;
        g21 = 2.0;
        b11 << 0.5, -0.8;
        g12 = 1.5;
        g22 = 1.2;
        b12 << 0.9, 0.3;
    } else {
        throw input_error("unknown scenario '" + name +
                          "' (expected well_separated or mixed)");
    }
    MixtureModel model({0.5, 0.5},
                       {ClassParams(g11, g21, b11), ClassParams(g12, g22, b12)});
    Scenario sc{name,
                std::move(model),
                1.99,
                {CovariateSpec::make_bernoulli(0.5), CovariateSpec::make_normal(0.0, 1.0)},
                n,
                seed};
    sc.validate();
    return sc;
}

Subject simulate_subject(const ClassParams& params, const Eigen::VectorXd& x, double tau,
                         Rng& rng, std::string id) {
    if (!(tau > 0.0)) throw input_error("simulate_subject: tau must be positive");
    const double g2 = params.gamma2();
    const double rate = params.gamma1() * std::exp(x.dot(params.beta()));
    std::vector<double> times;
    double s = 0.0;
    double s_pow = 0.0;  // s^g2
    while (true) {
        const double e = rng.exponential();
        const double t_pow = s_pow + e / rate;
        const double t = std::pow(t_pow, 1.0 / g2);
        if (t > tau) break;
        if (!(t > s)) continue;  // fp underflow of the increment; redraw
        times.push_back(t);
        s = t;
        s_pow = t_pow;
        if (times.size() > kMaxEventsPerSubject)
            throw std::runtime_error("simulate_subject: event count cap exceeded");
    }
    return Subject(std::move(id), tau, std::move(times), x);
}

Cohort simulate_cohort(const Scenario& sc) {
    sc.validate();
    const int K = sc.model.K();
    const auto d = sc.model.dim();
    Cohort cohort;
    cohort.subjects.reserve(sc.n_subjects);
    cohort.true_labels.reserve(sc.n_subjects);
    for (int i = 0; i < sc.n_subjects; ++i) {
        Rng rng(derive_seed(sc.seed, kSubjectStream, static_cast<std::uint64_t>(i)));
        // class draw from pi
        const double u = rng.uniform();
        int label = K - 1;
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
            acc += sc.model.weight(k);
            if (u < acc) {
                label = k;
                break;
            }
        }
        Eigen::VectorXd x(d);
        for (Eigen::Index j = 0; j < d; ++j) x[j] = sc.covariates[j].draw(rng);
        cohort.subjects.push_back(simulate_subject(sc.model.class_params(label), x, sc.tau, rng,
                                                   "s" + std::to_string(i + 1)));
        cohort.true_labels.push_back(label);
    }
    return cohort;
}

}  // namespace recurmix
